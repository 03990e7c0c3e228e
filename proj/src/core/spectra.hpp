#ifndef CHIRALCMT_SPECTRA_HPP
#define CHIRALCMT_SPECTRA_HPP

#include "spectrum.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chiralcmt::spectra
{

constexpr double kMagnitudeFloorDb = -200.0;

// 20 log10 |v|, floored at kMagnitudeFloorDb.
double magnitude_db(Complex v);

// Unwrapped phase; successive differences lie in (-pi, pi]. Zero values carry
// the previous phase forward.
std::vector<double> unwrap_phase(const Spectrum &spectrum);
std::vector<double> unwrap_phase(std::span<const double> phases);

// tau_G = -d phi / d omega, central differences (one-sided at the ends).
std::vector<double> group_delay(const Spectrum &spectrum);

struct NormalizedPair
{
    Spectrum target;
    Spectrum reference;
};

// Scales both spectra by 1 / max |reference|.
NormalizedPair normalize_to_reference(const Spectrum &target, const Spectrum &reference);

struct IsolationTrace
{
    std::vector<double> db;
    double max_db = 0.0;
    double f_at_max_hz = 0.0;
};

IsolationTrace isolation_db(const Spectrum &s_fwd, const Spectrum &s_rev);

enum class ResonanceKind
{
    Peak,
    Dip,
};

struct ResonanceReport
{
    double f_center_hz = 0.0;
    double q_factor = 0.0;
    double bandwidth_3db_hz = 0.0;
    double peak_mag_db = 0.0;  // fitted |S|^2 at the center, dB
    ResonanceKind kind = ResonanceKind::Peak;
};

// Lorentzian fit of |S|^2 = c + a / (1 + (2 (f - f0) / fwhm)^2) around the
// strongest interior extremum of the requested kind. Q = f0 / fwhm.
ResonanceReport fit_resonance(const Spectrum &spectrum, ResonanceKind kind);

struct Extremum
{
    std::size_t index = 0;
    double f_hz = 0.0;
    double mag_db = 0.0;
    ResonanceKind kind = ResonanceKind::Peak;
};

// Strict interior local maxima and minima of |S|, in grid order.
std::vector<Extremum> find_extrema(const Spectrum &spectrum);

struct PowerSweepEntry
{
    double power_dbm = 0.0;
    Spectrum fwd;  // transmitting path
    Spectrum rev;  // isolated path carrying the dip
};

struct PowerTrendRow
{
    double power_dbm = 0.0;
    double max_isolation_db = 0.0;
    double dip_frequency_hz = 0.0;
    double bandwidth_3db_hz = 0.0;
    std::optional<std::string> error;  // extraction failure for this row only
};

// One row per entry, ordered by power. The dip is fitted on rev.
std::vector<PowerTrendRow> power_trend(std::span<const PowerSweepEntry> entries);

} // namespace chiralcmt::spectra

#endif
