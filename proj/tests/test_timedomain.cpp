#include <catch_amalgamated.hpp>

#include "error.hpp"
#include "model.hpp"
#include "spectra.hpp"
#include "timedomain.hpp"

#include <cmath>
#include <numbers>

using namespace chiralcmt;
using namespace chiralcmt::timedomain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
constexpr double kPi = std::numbers::pi;
constexpr double kF0 = 543.8e6;

PulseSpec small_spec(double bandwidth = 50.0)
{
    PulseSpec s;
    s.bandwidth_hz = bandwidth;
    s.n_samples = 1u << 13;
    return s;
}

Spectrum constant_channel(Complex value, double lo, double hi)
{
    return Spectrum({lo, hi}, {value, value});
}

Spectrum delay_channel(double tau, double lo, double hi, std::size_t n)
{
    std::vector<double> f(n);
    std::vector<Complex> v(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        f[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        v[i] = std::polar(1.0, -2.0 * kPi * f[i] * tau);
    }
    return Spectrum(f, v);
}

// Full width at half maximum of |x|, with linear interpolation of both crossings.
double measured_fwhm(const TimeSeries &s)
{
    std::size_t peak = 0;
    for (std::size_t i = 0; i < s.values.size(); ++i)
        if (std::abs(s.values[i]) > std::abs(s.values[peak]))
            peak = i;
    const double half = 0.5 * std::abs(s.values[peak]);
    auto cross = [&](std::size_t i, std::size_t j) {
        const double a = std::abs(s.values[i]), b = std::abs(s.values[j]);
        return s.time(i) + (half - a) / (b - a) * (s.time(j) - s.time(i));
    };
    std::size_t l = peak, r = peak;
    while (std::abs(s.values[l]) > half)
        --l;
    while (std::abs(s.values[r]) > half)
        ++r;
    return cross(r - 1, r) - cross(l, l + 1);
}

TimeSeries shifted_gaussian(double shift_samples, std::size_t n = 256, double sigma = 12.0)
{
    TimeSeries s;
    s.dt_s = 1e-6;
    s.values.resize(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const double x = static_cast<double>(k) - 100.0 - shift_samples;
        s.values[k] = std::exp(-x * x / (2.0 * sigma * sigma));
    }
    return s;
}
} // namespace

TEST_CASE("pulse is centered and has unit peak", "[timedomain][pulse]")
{
    PulseSpec spec;
    const auto p = synth_pulse(spec);
    REQUIRE(p.values.size() == spec.n_samples);
    CHECK_THAT(p.dt_s * static_cast<double>(p.values.size()), WithinRel(0.1, 1e-15));
    const std::size_t mid = spec.n_samples / 2;
    CHECK_THAT(p.time(mid), WithinRel(0.05, 1e-12));
    CHECK_THAT(std::abs(p.values[mid]), WithinAbs(1.0, 1e-15));
    CHECK_THAT(refined_peak_time(p), WithinAbs(0.05, 1e-9));
}

TEST_CASE("doubling the bandwidth halves the duration", "[timedomain][pulse]")
{
    const double a = measured_fwhm(synth_pulse(small_spec(50.0)));
    const double b = measured_fwhm(synth_pulse(small_spec(100.0)));
    CHECK_THAT(a / b, WithinRel(2.0, 1e-3));
    CHECK_THAT(gaussian_time_fwhm(50.0) / gaussian_time_fwhm(100.0), WithinRel(2.0, 1e-6));
    CHECK_THAT(a, WithinRel(gaussian_time_fwhm(50.0), 1e-3));
}

TEST_CASE("pulse spectrum has the requested FWHM", "[timedomain][pulse]")
{
    PulseSpec spec;
    spec.span_s = 1.0;
    spec.n_samples = 1u << 14;
    const auto p = synth_pulse(spec);
    const auto X = numerics::dft(p.values);
    const double df = 1.0 / spec.span_s;
    const double peak = std::abs(X[0]);
    std::size_t k = 0;
    while (std::abs(X[k + 1]) > 0.5 * peak)
        ++k;
    const double a = std::abs(X[k]), b = std::abs(X[k + 1]);
    const double half_width = (static_cast<double>(k) + (a - 0.5 * peak) / (a - b)) * df;
    CHECK_THAT(2.0 * half_width, WithinRel(50.0, 0.02));
}

TEST_CASE("pulse spec validation", "[timedomain][pulse]")
{
    PulseSpec s;
    s.n_samples = 1000;
    CHECK_THROWS_AS(synth_pulse(s), ContractError);
    s = PulseSpec{};
    s.bandwidth_hz = 6e6;
    CHECK_THROWS_AS(synth_pulse(s), ContractError);
    s = PulseSpec{};
    s.bandwidth_hz = 5.0;  // envelope too long for a 100 ms span
    CHECK_THROWS_AS(synth_pulse(s), ContractError);
    s = PulseSpec{};
    s.span_s = -1.0;
    CHECK_THROWS_AS(synth_pulse(s), ContractError);
}

TEST_CASE("unit channel returns the input", "[timedomain][channel]")
{
    const auto p = synth_pulse(small_spec());
    const auto out = apply_channel(p, constant_channel(1.0, kF0 - 1e3, kF0 + 1e3), kF0);
    CHECK_FALSE(out.coverage_warning);
    for (std::size_t k = 0; k < p.values.size(); ++k)
        CHECK(std::abs(out.output.values[k] - p.values[k]) <= 1e-10);
}

TEST_CASE("constant channel scales the envelope", "[timedomain][channel][property]")
{
    const auto p = synth_pulse(small_spec());
    const Complex c = std::polar(0.37, 2.1);
    const auto out = apply_channel(p, constant_channel(c, kF0 - 1e3, kF0 + 1e3), kF0);
    for (std::size_t k = 0; k < p.values.size(); ++k)
        CHECK(std::abs(out.output.values[k] - c * p.values[k]) <= 1e-9);
}

TEST_CASE("pure delay channel shifts the envelope", "[timedomain][channel]")
{
    const auto p = synth_pulse(small_spec());
    const double tau = 1e-6;
    const auto out = apply_channel(p, delay_channel(tau, kF0 - 1e3, kF0 + 1e3, 2001), kF0);
    CHECK_THAT(estimate_delay(p, out.output), WithinAbs(tau, p.dt_s));
}

TEST_CASE("cascaded delays add", "[timedomain][channel][property]")
{
    const auto p = synth_pulse(small_spec());
    const auto one = apply_channel(p, delay_channel(3e-4, kF0 - 1e3, kF0 + 1e3, 2001), kF0).output;
    const auto two = apply_channel(one, delay_channel(-1e-4, kF0 - 1e3, kF0 + 1e3, 2001), kF0).output;
    const auto direct = apply_channel(p, delay_channel(2e-4, kF0 - 1e3, kF0 + 1e3, 2001), kF0).output;
    CHECK_THAT(estimate_delay(p, two), WithinAbs(2e-4, 0.05 * p.dt_s));
    CHECK_THAT(estimate_delay(p, two), WithinAbs(estimate_delay(p, direct), 0.05 * p.dt_s));
}

TEST_CASE("coverage warning and missing band", "[timedomain][channel]")
{
    const auto p = synth_pulse(small_spec());
    const auto partial = apply_channel(p, constant_channel(1.0, kF0 - 10.0, kF0 + 10.0), kF0);
    CHECK(partial.coverage_warning);
    CHECK_THROWS_AS(apply_channel(p, constant_channel(1.0, kF0 + 1e6, kF0 + 2e6), kF0), ContractError);
}

TEST_CASE("channel interpolation is linear and clamps at the edges", "[timedomain][channel]")
{
    Spectrum ch({1.0, 3.0}, {Complex(0.0, 2.0), Complex(4.0, 0.0)});
    CHECK(interpolate(ch, 2.0) == Complex(2.0, 1.0));
    CHECK(interpolate(ch, 0.0) == Complex(0.0, 2.0));
    CHECK(interpolate(ch, 10.0) == Complex(4.0, 0.0));
}

TEST_CASE("delay of identical series is zero", "[timedomain][delay]")
{
    const auto a = shifted_gaussian(0.0);
    CHECK(estimate_delay(a, a) == 0.0);
}

TEST_CASE("integer and sub-sample shifts", "[timedomain][delay]")
{
    const auto a = shifted_gaussian(0.0);
    CHECK_THAT(estimate_delay(a, shifted_gaussian(7.0)), WithinAbs(7.0 * a.dt_s, 1e-3 * a.dt_s));
    CHECK_THAT(estimate_delay(a, shifted_gaussian(0.3)), WithinAbs(0.3 * a.dt_s, 0.05 * a.dt_s));
    CHECK_THAT(estimate_delay(a, shifted_gaussian(-2.6)), WithinAbs(-2.6 * a.dt_s, 0.05 * a.dt_s));
}

TEST_CASE("ambiguous peaks are rejected", "[timedomain][delay]")
{
    TimeSeries edge;
    edge.dt_s = 1.0;
    edge.values = {3.0, 2.0, 1.0, 0.5};
    TimeSeries plateau;
    plateau.dt_s = 1.0;
    plateau.values = {0.0, 1.0, 1.0, 0.0};
    CHECK_THROWS_AS(refined_peak_time(edge), DataError);
    CHECK_THROWS_AS(refined_peak_time(plateau), DataError);
    TimeSeries other_dt = shifted_gaussian(0.0);
    other_dt.dt_s = 2e-6;
    CHECK_THROWS_AS(estimate_delay(shifted_gaussian(0.0), other_dt), ContractError);
}

TEST_CASE("envelope advance through the high-power dip matches the group delay", "[timedomain][consistency]")
{
    const auto params = model::CmtParams::from_hz(kF0, 2.0e6, kF0, 2.7e6, 6.1e6);
    const auto channel = model::sweep_spectrum(params, kF0 - 1e3, kF0 + 1e3, 2001, model::Direction::Forward, true);
    const double tau_g = spectra::group_delay(channel)[1000];
    REQUIRE(tau_g < 0.0);

    const auto pulse = synth_pulse(PulseSpec{});
    const auto out = apply_channel(pulse, channel, kF0);
    CHECK_FALSE(out.coverage_warning);
    const double advance = estimate_delay(pulse, out.output);
    CHECK(advance < 0.0);
    CHECK_THAT(advance, WithinRel(tau_g, 0.05));
}

TEST_CASE("delay converges to the group delay as the band narrows", "[timedomain][consistency][property]")
{
    // Narrow the band by 1:2:4 on a channel whose delay varies over ~ kHz.
    const auto params = model::CmtParams::from_hz(kF0, 2.0e3, kF0, 2.7e3, 6.1e3);
    const auto channel = model::sweep_spectrum(params, kF0 - 20e3, kF0 + 20e3, 8001, model::Direction::Forward, true);
    const double tau_g = spectra::group_delay(channel)[4000];

    std::vector<double> errors;
    for (double b : {400.0, 200.0, 100.0})
    {
        PulseSpec spec;
        spec.bandwidth_hz = b;
        spec.span_s = 0.2;
        spec.n_samples = 1u << 16;
        const auto pulse = synth_pulse(spec);
        const auto out = apply_channel(pulse, channel, kF0);
        errors.push_back(std::abs(estimate_delay(pulse, out.output) - tau_g));
    }
    CHECK(errors[1] < errors[0]);
    CHECK(errors[2] < errors[1]);
}
