#include "fit.hpp"

#include "spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace chiralcmt::fit
{

namespace
{
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double floored_db(Complex v, double floor_db) { return std::max(spectra::magnitude_db(v), floor_db); }

void check_interval(const Interval &i, const char *name)
{
    if (!(i.min < i.max))
        throw ContractError(std::string("FitConfig: bounds for ") + name + " must satisfy min < max");
}

// Evaluates the objective against a fixed data set, with the data-side dB
// values precomputed.
class Evaluator
{
public:
    Evaluator(const Spectrum &data, const FitConfig &config) : data_(data), config_(config)
    {
        omega_.reserve(data.size());
        model_.resize(data.size());
        for (double f : data.freqs_hz())
            omega_.push_back(kTwoPi * f);
        if (config.objective_space == ObjectiveSpace::DbMagnitude)
            for (const auto &v : data.values())
                data_db_.push_back(floored_db(v, config.mag_floor_db));
    }

    double operator()(const model::CmtParams &params) const
    {
        model::transmission(params, omega_, model::Direction::Forward, model_);
        const auto &values = data_.values();
        double acc = 0.0;
        for (std::size_t i = 0; i < omega_.size(); ++i)
        {
            if (config_.objective_space == ObjectiveSpace::DbMagnitude)
            {
                // 10 log10 |t|^2, floored; same as floored_db without the square root.
                const double p = std::norm(model_[i]);
                const double floor = std::max(config_.mag_floor_db, spectra::kMagnitudeFloorDb);
                const double db = p > 0.0 ? std::max(10.0 * std::log10(p), floor) : floor;
                const double r = db - data_db_[i];
                acc += r * r;
            }
            else
            {
                acc += std::norm(model_[i] - values[i]);
            }
        }
        return acc / static_cast<double>(omega_.size());
    }

private:
    const Spectrum &data_;
    const FitConfig &config_;
    std::vector<double> omega_;
    std::vector<double> data_db_;
    mutable std::vector<Complex> model_;
};

struct HzParams
{
    double g, kappa0, kappa_m, f0, fm;
    model::BackgroundPath bg;
};

HzParams to_hz(const model::CmtParams &p)
{
    HzParams h{p.g / kTwoPi, p.kappa0 / kTwoPi, p.kappa_m / kTwoPi, p.omega0 / kTwoPi, p.omega_m / kTwoPi, {}};
    if (p.background)
        h.bg = *p.background;
    return h;
}

bool within(const HzParams &h, const FitBounds &b, bool background)
{
    bool ok = b.g_hz.contains(h.g) && b.kappa0_hz.contains(h.kappa0) && b.kappa_m_hz.contains(h.kappa_m) &&
              b.f0_hz.contains(h.f0) && b.fm_hz.contains(h.fm);
    if (background)
        ok = ok && b.bg_amplitude.contains(h.bg.amplitude) && b.bg_phase_rad.contains(h.bg.phase_offset) &&
             b.bg_delay_s.contains(h.bg.delay);
    return ok;
}

// Maps between the Hz-domain parameters and the minimizer's unit-scaled
// coordinates: log rates relative to the init, frequency offsets in units of
// the init coupling, background amplitude relative to the data peak, and
// delay as total phase slope across the data span.
class Coordinates
{
public:
    Coordinates(const HzParams &origin, double path_ratio, bool background, double amp_scale, double span_hz)
        : origin_(origin), path_ratio_(path_ratio), background_(background), amp_scale_(amp_scale),
          delay_scale_(kTwoPi * span_hz)
    {
    }

    std::size_t size() const { return background_ ? 8 : 5; }

    std::vector<double> encode(const HzParams &h) const
    {
        std::vector<double> x{std::log(h.g / origin_.g), std::log(h.kappa0 / origin_.kappa0),
                              std::log(h.kappa_m / origin_.kappa_m), (h.f0 - origin_.f0) / origin_.g,
                              (h.fm - origin_.fm) / origin_.g};
        if (background_)
        {
            x.push_back(h.bg.amplitude / amp_scale_);
            x.push_back(h.bg.phase_offset);
            x.push_back(h.bg.delay * delay_scale_);
        }
        return x;
    }

    HzParams decode(std::span<const double> x) const
    {
        HzParams h{origin_.g * std::exp(x[0]), origin_.kappa0 * std::exp(x[1]), origin_.kappa_m * std::exp(x[2]),
                   origin_.f0 + x[3] * origin_.g, origin_.fm + x[4] * origin_.g, {}};
        if (background_)
            h.bg = {x[5] * amp_scale_, x[6], x[7] / delay_scale_};
        return h;
    }

    model::CmtParams to_params(const HzParams &h) const
    {
        std::optional<model::BackgroundPath> bg;
        if (background_)
            bg = h.bg;
        return {kTwoPi * h.f0, kTwoPi * h.kappa0, kTwoPi * h.fm, kTwoPi * h.kappa_m, kTwoPi * h.g, path_ratio_, bg};
    }

private:
    HzParams origin_;
    double path_ratio_;
    bool background_;
    double amp_scale_;
    double delay_scale_;
};

std::string number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

const char *space_name(ObjectiveSpace s) { return s == ObjectiveSpace::DbMagnitude ? "db_magnitude" : "linear_complex"; }
} // namespace

void FitConfig::validate() const
{
    require(std::isfinite(mag_floor_db) && mag_floor_db < 0.0, "FitConfig: mag_floor_db must be negative");
    require(multi_starts >= 1, "FitConfig: multi_starts must be at least 1");
    require(std::isfinite(start_jitter) && start_jitter >= 0.0 && start_jitter < 1.0,
            "FitConfig: start_jitter must lie in [0, 1)");
    require(minimizer.max_evaluations >= 1, "FitConfig: max_evaluations must be at least 1");
    require(minimizer.simplex_tolerance > 0.0, "FitConfig: simplex_tolerance must be positive");
    check_interval(bounds.g_hz, "g");
    check_interval(bounds.kappa0_hz, "kappa0");
    check_interval(bounds.kappa_m_hz, "kappa_m");
    check_interval(bounds.f0_hz, "f0");
    check_interval(bounds.fm_hz, "fm");
    check_interval(bounds.bg_amplitude, "background amplitude");
    check_interval(bounds.bg_phase_rad, "background phase");
    check_interval(bounds.bg_delay_s, "background delay");
}

double objective(const model::CmtParams &params, const Spectrum &data, const FitConfig &config)
{
    params.validate();
    return Evaluator(data, config)(params);
}

FitResult fit_transmission(const Spectrum &data, const model::CmtParams &init, const FitConfig &config)
{
    config.validate();
    init.validate();
    require(init.g > 0.0, "fit_transmission: initial coupling g must be positive");

    HzParams origin = to_hz(init);
    if (config.fit_background && !init.background)
        origin.bg = {};
    if (!within(origin, config.bounds, config.fit_background))
        throw ContractError("fit_transmission: initial parameters violate the fit bounds");

    double data_peak = 0.0;
    for (const auto &v : data.values())
        data_peak = std::max(data_peak, std::abs(v));
    const double amp_scale = data_peak > 0.0 ? data_peak : 1.0;
    const Coordinates coords(origin, init.path_ratio, config.fit_background, amp_scale,
                             data.freqs_hz().back() - data.freqs_hz().front());
    const Evaluator evaluate(data, config);

    numerics::Objective objective_fn = [&](std::span<const double> x) {
        const HzParams h = coords.decode(x);
        if (!within(h, config.bounds, config.fit_background))
            return kInf;
        const auto params = coords.to_params(h);
        try
        {
            params.validate();
            return evaluate(params);
        }
        catch (const Error &)
        {
            return kInf;
        }
    };

    std::vector<double> step(coords.size(), 0.1);
    std::mt19937_64 rng(config.minimizer.seed);
    const double log_jitter = std::log1p(config.start_jitter);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const std::vector<double> x_init = coords.encode(origin);
    numerics::MinimizerResult best;
    best.value = kInf;
    bool have_best = false;
    std::size_t total_evaluations = 0;
    for (unsigned start = 0; start < config.multi_starts; ++start)
    {
        std::vector<double> x0 = x_init;
        if (start > 0)
        {
            for (std::size_t i = 0; i < 3; ++i)
                x0[i] += log_jitter * unit(rng);
            x0[3] += config.start_jitter * unit(rng);
            x0[4] += config.start_jitter * unit(rng);
        }
        if (!std::isfinite(objective_fn(x0)))
            continue;

        numerics::MinimizerConfig local = config.minimizer;
        local.seed = config.minimizer.seed + start;
        auto result = numerics::nelder_mead(objective_fn, x0, local, step);
        total_evaluations += result.evaluations;
        if (!have_best || result.value < best.value)
        {
            best = std::move(result);
            have_best = true;
        }
    }
    if (!have_best)
        throw NumericalError("fit_transmission: objective is non-finite at every start point");

    const HzParams final_hz = coords.decode(best.x);
    FitResult fit;
    fit.params = coords.to_params(final_hz);
    fit.params.validate();
    fit.residual = std::max(best.value, 0.0);
    fit.evaluations = total_evaluations;
    fit.converged = best.converged;
    fit.objective_space = config.objective_space;

    const double mhz = 1e-6;
    fit.per_parameter_report = {
        {"g_mhz", origin.g * mhz, final_hz.g * mhz},
        {"kappa0_mhz", origin.kappa0 * mhz, final_hz.kappa0 * mhz},
        {"kappa_m_mhz", origin.kappa_m * mhz, final_hz.kappa_m * mhz},
        {"f0_mhz", origin.f0 * mhz, final_hz.f0 * mhz},
        {"fm_mhz", origin.fm * mhz, final_hz.fm * mhz},
    };
    if (config.fit_background)
    {
        fit.per_parameter_report.push_back({"bg_amplitude", origin.bg.amplitude, final_hz.bg.amplitude});
        fit.per_parameter_report.push_back({"bg_phase_rad", origin.bg.phase_offset, final_hz.bg.phase_offset});
        fit.per_parameter_report.push_back({"bg_delay_s", origin.bg.delay, final_hz.bg.delay});
    }
    return fit;
}

std::string fit_report_text(const FitResult &result)
{
    const auto &p = result.params;
    const double mhz = 1e-6 / kTwoPi;
    std::ostringstream out;
    out << "[fit]\n";
    out << "g_mhz = " << number(p.g * mhz) << "\n";
    out << "kappa0_mhz = " << number(p.kappa0 * mhz) << "\n";
    out << "kappa_m_mhz = " << number(p.kappa_m * mhz) << "\n";
    out << "f0_mhz = " << number(p.omega0 * mhz) << "\n";
    out << "fm_mhz = " << number(p.omega_m * mhz) << "\n";
    out << "path_ratio = " << number(p.path_ratio) << "\n";
    if (p.background)
    {
        out << "bg_amplitude = " << number(p.background->amplitude) << "\n";
        out << "bg_phase_rad = " << number(p.background->phase_offset) << "\n";
        out << "bg_delay_s = " << number(p.background->delay) << "\n";
    }
    else
    {
        out << "background = none\n";
    }
    out << "objective = " << space_name(result.objective_space) << "\n";
    out << "residual = " << number(result.residual) << "\n";
    out << "evaluations = " << result.evaluations << "\n";
    out << "converged = " << (result.converged ? "true" : "false") << "\n";
    if (!result.per_parameter_report.empty())
    {
        out << "\n[initial -> final]\n";
        for (const auto &c : result.per_parameter_report)
            out << c.name << " = " << number(c.initial) << " -> " << number(c.final) << "\n";
    }
    return out.str();
}

} // namespace chiralcmt::fit
