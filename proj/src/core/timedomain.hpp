#ifndef CHIRALCMT_TIMEDOMAIN_HPP
#define CHIRALCMT_TIMEDOMAIN_HPP

#include "spectrum.hpp"

#include <vector>

namespace chiralcmt::timedomain
{

// Narrowband Gaussian pulse. bandwidth_hz is the FWHM of the envelope's
// magnitude spectrum; the carrier at f_center_hz is implied, never sampled.
struct PulseSpec
{
    double f_center_hz = 543.8e6;
    double bandwidth_hz = 50.0;
    double span_s = 0.1;
    std::size_t n_samples = 1u << 16;

    void validate() const;
    double dt() const { return span_s / static_cast<double>(n_samples); }
};

// Complex baseband envelope sampled at t0_s + k dt_s.
struct TimeSeries
{
    double t0_s = 0.0;
    double dt_s = 0.0;
    std::vector<Complex> values;

    void validate() const;
    double time(std::size_t k) const { return t0_s + static_cast<double>(k) * dt_s; }
};

// Unit-peak Gaussian envelope centered at span/2.
TimeSeries synth_pulse(const PulseSpec &spec);

// Time-domain FWHM implied by a frequency-domain FWHM for a Gaussian envelope.
double gaussian_time_fwhm(double bandwidth_hz);

struct ChannelOutput
{
    TimeSeries output;
    bool coverage_warning = false;  // some occupied bins fell outside the channel grid
};

// Multiplies every baseband bin f_b by channel(f_center + f_b), linearly
// interpolated component-wise. A bin is "occupied" when its magnitude exceeds
// 1e-6 of the spectral peak; occupied bins outside the grid take the nearest
// edge value and raise coverage_warning.
ChannelOutput apply_channel(const TimeSeries &pulse, const Spectrum &channel, double f_center_hz);

// Linear complex interpolation, clamped to the edge values outside the grid.
Complex interpolate(const Spectrum &channel, double f_hz);

// Peak time of |output| minus peak time of |input|, each refined by a
// three-point parabola through the log-magnitudes (exact for Gaussians).
// Negative means the output envelope leads.
double estimate_delay(const TimeSeries &input_env, const TimeSeries &output_env);

// Refined time of the unique interior maximum of |values|.
double refined_peak_time(const TimeSeries &series);

} // namespace chiralcmt::timedomain

#endif
