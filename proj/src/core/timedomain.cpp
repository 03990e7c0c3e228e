#include "timedomain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chiralcmt::timedomain
{

namespace
{
constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;
constexpr double kEdgeClip = 1e-6;
constexpr double kOccupancy = 1e-6;

// Standard deviation (s) of exp(-t^2 / (2 sigma^2)) whose spectrum has FWHM B.
double gaussian_sigma(double bandwidth_hz) { return std::sqrt(2.0 * kLn2) / (kPi * bandwidth_hz); }
} // namespace

void PulseSpec::validate() const
{
    require(std::isfinite(f_center_hz) && f_center_hz > 0.0, "PulseSpec: f_center_hz must be positive");
    require(std::isfinite(bandwidth_hz) && bandwidth_hz > 0.0, "PulseSpec: bandwidth_hz must be positive");
    require(bandwidth_hz < 0.01 * f_center_hz, "PulseSpec: bandwidth must be far below the center frequency");
    require(std::isfinite(span_s) && span_s > 0.0, "PulseSpec: span_s must be positive");
    require(numerics::is_power_of_two(n_samples) && n_samples >= 2, "PulseSpec: n_samples must be a power of two");
}

void TimeSeries::validate() const
{
    require(std::isfinite(dt_s) && dt_s > 0.0, "TimeSeries: dt_s must be positive");
    require(std::isfinite(t0_s), "TimeSeries: t0_s must be finite");
    require(values.size() >= 2, "TimeSeries: at least two samples are required");
}

double gaussian_time_fwhm(double bandwidth_hz) { return 2.0 * std::sqrt(2.0 * kLn2) * gaussian_sigma(bandwidth_hz); }

TimeSeries synth_pulse(const PulseSpec &spec)
{
    spec.validate();
    const double sigma = gaussian_sigma(spec.bandwidth_hz);
    const double half_span = 0.5 * spec.span_s;
    const double edge = std::exp(-half_span * half_span / (2.0 * sigma * sigma));
    if (edge > kEdgeClip)
        throw ContractError("synth_pulse: envelope is clipped at the span edges (bandwidth too narrow for span_s)");

    TimeSeries series;
    series.t0_s = 0.0;
    series.dt_s = spec.dt();
    series.values.resize(spec.n_samples);
    const double center = half_span;
    for (std::size_t k = 0; k < spec.n_samples; ++k)
    {
        const double t = series.time(k) - center;
        series.values[k] = std::exp(-t * t / (2.0 * sigma * sigma));
    }
    return series;
}

Complex interpolate(const Spectrum &channel, double f_hz)
{
    const auto &f = channel.freqs_hz();
    const auto &v = channel.values();
    if (f_hz <= f.front())
        return v.front();
    if (f_hz >= f.back())
        return v.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(f.begin(), f.end(), f_hz) - f.begin());
    const std::size_t lo = hi - 1;
    const double w = (f_hz - f[lo]) / (f[hi] - f[lo]);
    return v[lo] + w * (v[hi] - v[lo]);
}

ChannelOutput apply_channel(const TimeSeries &pulse, const Spectrum &channel, double f_center_hz)
{
    pulse.validate();
    require(numerics::is_power_of_two(pulse.values.size()), "apply_channel: pulse length must be a power of two");
    require(std::isfinite(f_center_hz), "apply_channel: f_center_hz must be finite");

    const std::size_t n = pulse.values.size();
    auto spectrum = numerics::dft(pulse.values);
    const double df = 1.0 / (static_cast<double>(n) * pulse.dt_s);

    double peak = 0.0;
    for (const auto &x : spectrum)
        peak = std::max(peak, std::abs(x));

    const double lo = channel.freqs_hz().front();
    const double hi = channel.freqs_hz().back();
    ChannelOutput out;
    std::size_t occupied = 0;
    std::size_t covered = 0;
    for (std::size_t k = 0; k < n; ++k)
    {
        const double fb = (k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n)) * df;
        const double f = f_center_hz + fb;
        if (std::abs(spectrum[k]) > kOccupancy * peak)
        {
            ++occupied;
            if (f >= lo && f <= hi)
                ++covered;
            else
                out.coverage_warning = true;
        }
        spectrum[k] *= interpolate(channel, f);
    }
    if (occupied > 0 && covered == 0)
        throw ContractError("apply_channel: channel grid does not cover the pulse band");

    out.output.t0_s = pulse.t0_s;
    out.output.dt_s = pulse.dt_s;
    out.output.values = numerics::idft(spectrum);
    return out;
}

double refined_peak_time(const TimeSeries &series)
{
    series.validate();
    const auto &v = series.values;
    std::size_t idx = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        const double m = std::abs(v[i]);
        if (m > best)
        {
            best = m;
            idx = i;
        }
    }
    if (idx == 0 || idx + 1 == v.size())
        throw DataError("estimate_delay: envelope maximum lies on the series boundary");
    const double left = std::abs(v[idx - 1]);
    const double right = std::abs(v[idx + 1]);
    if (!(left < best) || !(right < best))
        throw DataError("estimate_delay: envelope maximum is a plateau (ambiguous peak)");

    double y0 = left, y1 = best, y2 = right;
    if (y0 > 0.0 && y2 > 0.0)
    {
        y0 = std::log(y0);
        y1 = std::log(y1);
        y2 = std::log(y2);
    }
    const double curvature = y0 - 2.0 * y1 + y2;
    const double offset = curvature != 0.0 ? 0.5 * (y0 - y2) / curvature : 0.0;
    return series.time(idx) + offset * series.dt_s;
}

double estimate_delay(const TimeSeries &input_env, const TimeSeries &output_env)
{
    input_env.validate();
    output_env.validate();
    require(input_env.dt_s == output_env.dt_s, "estimate_delay: series must share the sample interval");
    return refined_peak_time(output_env) - refined_peak_time(input_env);
}

} // namespace chiralcmt::timedomain
