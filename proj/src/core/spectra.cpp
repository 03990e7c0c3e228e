#include "spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace chiralcmt::spectra
{

namespace
{
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wrap into (-pi, pi].
double wrap(double x)
{
    double w = std::remainder(x, kTwoPi);
    if (w <= -kPi)
        w += kTwoPi;
    return w;
}

void require_same_grid(const Spectrum &a, const Spectrum &b, const char *op)
{
    if (!a.same_grid(b))
        throw ContractError(std::string(op) + ": spectra do not share a frequency grid");
}
} // namespace

double magnitude_db(Complex v)
{
    const double mag = std::abs(v);
    if (!(mag > 0.0))
        return kMagnitudeFloorDb;
    return std::max(20.0 * std::log10(mag), kMagnitudeFloorDb);
}

std::vector<double> unwrap_phase(std::span<const double> phases)
{
    std::vector<double> out(phases.size());
    for (std::size_t i = 0; i < phases.size(); ++i)
        out[i] = i == 0 ? phases[0] : out[i - 1] + wrap(phases[i] - out[i - 1]);
    return out;
}

std::vector<double> unwrap_phase(const Spectrum &spectrum)
{
    const auto &values = spectrum.values();
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        const bool zero = values[i] == Complex{};
        if (i == 0)
            out[i] = zero ? 0.0 : std::arg(values[i]);
        else
            out[i] = zero ? out[i - 1] : out[i - 1] + wrap(std::arg(values[i]) - out[i - 1]);
    }
    return out;
}

std::vector<double> group_delay(const Spectrum &spectrum)
{
    const std::size_t n = spectrum.size();
    require(n >= 3, "group_delay: at least three points are required");
    const auto phase = unwrap_phase(spectrum);
    const auto &f = spectrum.freqs_hz();

    std::vector<double> tau(n);
    auto slope = [&](std::size_t lo, std::size_t hi) { return -(phase[hi] - phase[lo]) / (kTwoPi * (f[hi] - f[lo])); };
    tau[0] = slope(0, 1);
    tau[n - 1] = slope(n - 2, n - 1);
    for (std::size_t i = 1; i + 1 < n; ++i)
        tau[i] = slope(i - 1, i + 1);
    return tau;
}

NormalizedPair normalize_to_reference(const Spectrum &target, const Spectrum &reference)
{
    require_same_grid(target, reference, "normalize_to_reference");
    double peak = 0.0;
    for (const auto &v : reference.values())
        peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0))
        throw DataError("normalize_to_reference: reference spectrum is identically zero");

    auto scaled = [peak](const Spectrum &s) {
        std::vector<Complex> v = s.values();
        for (auto &x : v)
            x /= peak;
        return Spectrum(s.freqs_hz(), std::move(v), s.label());
    };
    return {scaled(target), scaled(reference)};
}

IsolationTrace isolation_db(const Spectrum &s_fwd, const Spectrum &s_rev)
{
    require_same_grid(s_fwd, s_rev, "isolation_db");
    IsolationTrace trace;
    trace.db.resize(s_fwd.size());
    for (std::size_t i = 0; i < s_fwd.size(); ++i)
    {
        trace.db[i] = magnitude_db(s_fwd.values()[i]) - magnitude_db(s_rev.values()[i]);
        if (i == 0 || trace.db[i] > trace.max_db)
        {
            trace.max_db = trace.db[i];
            trace.f_at_max_hz = s_fwd.freqs_hz()[i];
        }
    }
    return trace;
}

std::vector<Extremum> find_extrema(const Spectrum &spectrum)
{
    std::vector<Extremum> out;
    const auto &v = spectrum.values();
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
    {
        const double m = std::abs(v[i]);
        const double l = std::abs(v[i - 1]);
        const double r = std::abs(v[i + 1]);
        if (m > l && m > r)
            out.push_back({i, spectrum.freqs_hz()[i], magnitude_db(v[i]), ResonanceKind::Peak});
        else if (m < l && m < r)
            out.push_back({i, spectrum.freqs_hz()[i], magnitude_db(v[i]), ResonanceKind::Dip});
    }
    return out;
}

namespace
{
struct Lorentzian
{
    double f0;
    double fwhm;
    double amplitude;  // negative for a dip
    double baseline;

    double operator()(double f) const
    {
        const double u = 2.0 * (f - f0) / fwhm;
        return baseline + amplitude / (1.0 + u * u);
    }
};

// Linear interpolation of the crossing of `level` between samples i and j.
double crossing(const std::vector<double> &f, const std::vector<double> &y, std::size_t i, std::size_t j, double level)
{
    const double dy = y[j] - y[i];
    if (dy == 0.0)
        return f[i];
    return f[i] + (level - y[i]) * (f[j] - f[i]) / dy;
}

// Samples [lo, hi] bracket the resonance at idx: walk outward while the
// curve keeps moving away from the extremum.
struct Shoulders
{
    std::size_t lo;
    std::size_t hi;
};

// Key cols on either side, as in topographic prominence: walk outward until the
// curve passes the extremum (or the edge), keeping the point furthest from it.
Shoulders find_shoulders(const std::vector<double> &y, std::size_t idx, double sign)
{
    const double top = sign * y[idx];
    std::size_t lo = idx;
    for (std::size_t i = idx; i-- > 0 && sign * y[i] <= top;)
        if (sign * y[i] < sign * y[lo])
            lo = i;
    std::size_t hi = idx;
    for (std::size_t i = idx + 1; i < y.size() && sign * y[i] <= top; ++i)
        if (sign * y[i] < sign * y[hi])
            hi = i;
    return {lo, hi};
}

Lorentzian initial_guess(const std::vector<double> &f, const std::vector<double> &y, std::size_t idx, double sign,
                         const Shoulders &sh)
{
    const double baseline = sign > 0 ? std::max(y[sh.lo], y[sh.hi]) : std::min(y[sh.lo], y[sh.hi]);
    const double amplitude = y[idx] - baseline;
    const double half = baseline + 0.5 * amplitude;

    double left = f[sh.lo];
    for (std::size_t i = idx; i-- > sh.lo;)
        if (sign * (y[i] - half) <= 0.0)
        {
            left = crossing(f, y, i, i + 1, half);
            break;
        }
    double right = f[sh.hi];
    for (std::size_t i = idx + 1; i <= sh.hi; ++i)
        if (sign * (y[i] - half) <= 0.0)
        {
            right = crossing(f, y, i - 1, i, half);
            break;
        }
    double fwhm = right - left;
    if (!(fwhm > 0.0))
        fwhm = f[idx + 1] - f[idx - 1];
    return {f[idx], fwhm, amplitude, baseline};
}

Lorentzian fit_window(const std::vector<double> &f, const std::vector<double> &y, const Lorentzian &start,
                      const Shoulders &sh)
{
    std::vector<double> wf, wy;
    for (std::size_t i = sh.lo; i <= sh.hi; ++i)
        if (std::abs(f[i] - start.f0) <= 5.0 * start.fwhm)
        {
            wf.push_back(f[i]);
            wy.push_back(y[i]);
        }
    if (wf.size() < 6)
    {
        wf.assign(f.begin() + static_cast<std::ptrdiff_t>(sh.lo), f.begin() + static_cast<std::ptrdiff_t>(sh.hi) + 1);
        wy.assign(y.begin() + static_cast<std::ptrdiff_t>(sh.lo), y.begin() + static_cast<std::ptrdiff_t>(sh.hi) + 1);
    }

    const double scale = std::abs(start.amplitude);
    const double inv_n = 1.0 / static_cast<double>(wf.size());
    auto unpack = [&](std::span<const double> p) {
        return Lorentzian{start.f0 + p[0] * start.fwhm, start.fwhm * std::exp(p[1]), p[2] * scale, p[3] * scale};
    };
    // A half-width wider than the whole window is not a resolved resonance.
    const double max_fwhm = wf.back() - wf.front();
    numerics::Objective objective = [&](std::span<const double> p) {
        if (std::abs(p[1]) > 50.0)
            return std::numeric_limits<double>::infinity();
        const Lorentzian model = unpack(p);
        if (model.fwhm > max_fwhm)
            return std::numeric_limits<double>::infinity();
        double acc = 0.0;
        for (std::size_t i = 0; i < wf.size(); ++i)
        {
            const double r = (model(wf[i]) - wy[i]) / scale;
            acc += r * r;
        }
        return acc * inv_n;
    };

    numerics::MinimizerConfig config;
    config.simplex_tolerance = 1e-12;
    config.max_evaluations = 40000;
    config.restarts = 3;
    const std::vector<double> x0{0.0, 0.0, start.amplitude / scale, start.baseline / scale};
    const std::vector<double> step{0.1, 0.1, 0.05, 0.05};
    const auto result = numerics::nelder_mead(objective, x0, config, step);
    return unpack(result.x);
}
} // namespace

ResonanceReport fit_resonance(const Spectrum &spectrum, ResonanceKind kind)
{
    const auto &f = spectrum.freqs_hz();
    const std::size_t n = f.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = std::norm(spectrum.values()[i]);
    const double sign = kind == ResonanceKind::Peak ? 1.0 : -1.0;

    // Deepest interior local extremum of the requested kind, measured
    // against its own shoulders.
    const double y_scale = *std::max_element(y.begin(), y.end());
    std::size_t idx = 0;
    Shoulders sh{0, 0};
    double best_depth = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i)
    {
        const bool local = sign * (y[i] - y[i - 1]) >= 0.0 && sign * (y[i] - y[i + 1]) > 0.0;
        if (!local)
            continue;
        const Shoulders s = find_shoulders(y, i, sign);
        const double depth = sign * y[i] - std::max(sign * y[s.lo], sign * y[s.hi]);
        if (depth > best_depth)
        {
            best_depth = depth;
            idx = i;
            sh = s;
        }
    }
    if (idx == 0 || !(best_depth > 1e-12 * y_scale))
        throw DataError(std::string("fit_resonance: no interior ") + (kind == ResonanceKind::Peak ? "peak" : "dip") +
                        " in spectrum '" + spectrum.label() + "'");

    Lorentzian fit = initial_guess(f, y, idx, sign, sh);
    for (int pass = 0; pass < 2; ++pass)
        fit = fit_window(f, y, fit, sh);

    if (!std::isfinite(fit.f0) || !std::isfinite(fit.fwhm) || !(fit.fwhm > 0.0) || sign * fit.amplitude <= 0.0)
        throw NumericalError("fit_resonance: Lorentzian fit did not converge to a valid resonance");
    if (fit.fwhm >= 0.99 * (f[sh.hi] - f[sh.lo]) || fit.baseline + fit.amplitude < 0.0)
        throw NumericalError("fit_resonance: extremum is not Lorentzian (width not resolved inside its shoulders)");
    if (fit.f0 < f.front() || fit.f0 > f.back())
        throw NumericalError("fit_resonance: fitted center lies outside the frequency grid");

    ResonanceReport report;
    report.f_center_hz = fit.f0;
    report.bandwidth_3db_hz = fit.fwhm;
    report.q_factor = fit.f0 / fit.fwhm;
    const double center = fit.baseline + fit.amplitude;
    report.peak_mag_db = center > 0.0 ? std::max(10.0 * std::log10(center), kMagnitudeFloorDb) : kMagnitudeFloorDb;
    report.kind = kind;
    return report;
}

std::vector<PowerTrendRow> power_trend(std::span<const PowerSweepEntry> entries)
{
    require(!entries.empty(), "power_trend: at least one entry is required");
    std::vector<const PowerSweepEntry *> order;
    for (const auto &e : entries)
        order.push_back(&e);
    std::stable_sort(order.begin(), order.end(),
                     [](const PowerSweepEntry *a, const PowerSweepEntry *b) { return a->power_dbm < b->power_dbm; });

    std::vector<PowerTrendRow> rows;
    for (const auto *e : order)
    {
        PowerTrendRow row;
        row.power_dbm = e->power_dbm;
        try
        {
            const auto iso = isolation_db(e->fwd, e->rev);
            const auto dip = fit_resonance(e->rev, ResonanceKind::Dip);
            row.max_isolation_db = iso.max_db;
            row.dip_frequency_hz = dip.f_center_hz;
            row.bandwidth_3db_hz = dip.bandwidth_3db_hz;
        }
        catch (const Error &err)
        {
            std::ostringstream msg;
            msg << "power " << e->power_dbm << " dBm: " << err.what();
            row.error = msg.str();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace chiralcmt::spectra
