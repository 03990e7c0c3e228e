#ifndef CHIRALCMT_FIT_HPP
#define CHIRALCMT_FIT_HPP

#include "model.hpp"
#include "numerics.hpp"

#include <limits>
#include <string>
#include <vector>

namespace chiralcmt::fit
{

enum class ObjectiveSpace
{
    DbMagnitude,
    LinearComplex,
};

struct Interval
{
    double min = -std::numeric_limits<double>::infinity();
    double max = std::numeric_limits<double>::infinity();

    bool contains(double v) const { return v >= min && v <= max; }
};

// Box constraints in Hz-domain units (rates and frequencies in Hz, phase in
// rad, delay in s).
struct FitBounds
{
    Interval g_hz{0.0, 1e12};
    Interval kappa0_hz{0.0, 1e12};
    Interval kappa_m_hz{0.0, 1e12};
    Interval f0_hz{0.0, std::numeric_limits<double>::infinity()};
    Interval fm_hz{0.0, std::numeric_limits<double>::infinity()};
    Interval bg_amplitude{0.0, 1e6};
    Interval bg_phase_rad{};
    Interval bg_delay_s{-1.0, 1.0};
};

struct FitConfig
{
    ObjectiveSpace objective_space = ObjectiveSpace::DbMagnitude;
    double mag_floor_db = -80.0;
    bool fit_background = false;
    FitBounds bounds;
    numerics::MinimizerConfig minimizer{100000, 1e-10, 2, 0};
    unsigned multi_starts = 8;
    double start_jitter = 0.2;  // relative log-space jitter of the seeded starts

    void validate() const;
};

struct ParameterChange
{
    std::string name;
    double initial = 0.0;
    double final = 0.0;
};

struct FitResult
{
    model::CmtParams params;
    double residual = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
    ObjectiveSpace objective_space = ObjectiveSpace::DbMagnitude;
    std::vector<ParameterChange> per_parameter_report;  // Hz-domain units, MHz for rates
};

// dB space: mean of (db(model) - db(data))^2 with both sides floored at
// mag_floor_db. Linear-complex space: mean |model - data|^2.
double objective(const model::CmtParams &params, const Spectrum &data, const FitConfig &config);

// Minimizes the objective over (g, kappa0, kappa_m, f0, fm), plus the
// background amplitude/phase/delay when enabled. The three rates are fitted
// in log space. Start 0 is `init`; later starts jitter it with a seeded
// generator. Best residual wins, ties go to the lowest start index.
FitResult fit_transmission(const Spectrum &data, const model::CmtParams &init, const FitConfig &config);

// Stable key = value block; rates in MHz (value / 2 pi).
std::string fit_report_text(const FitResult &result);

} // namespace chiralcmt::fit

#endif
