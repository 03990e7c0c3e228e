#include <catch_amalgamated.hpp>

#include "error.hpp"
#include "model.hpp"
#include "spectra.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace chiralcmt;
using namespace chiralcmt::spectra;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
constexpr double kPi = std::numbers::pi;
constexpr double kF0 = 543.8e6;

std::vector<double> grid(double lo, double hi, std::size_t n)
{
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return f;
}

Spectrum from_phases(const std::vector<double> &phases)
{
    std::vector<double> f(phases.size());
    std::vector<Complex> v(phases.size());
    for (std::size_t i = 0; i < phases.size(); ++i)
    {
        f[i] = 1e6 + static_cast<double>(i);
        v[i] = std::polar(1.0, phases[i]);
    }
    return Spectrum(f, v);
}

Spectrum delay_line(double tau, double lo, double hi, std::size_t n)
{
    const auto f = grid(lo, hi, n);
    std::vector<Complex> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::polar(1.0, -2.0 * kPi * f[i] * tau);
    return Spectrum(f, v);
}

// |S|^2 = baseline + amplitude / (1 + (2 (f - f0) / fwhm)^2), returned as |S|.
Spectrum lorentzian(double f0, double q, double baseline, double amplitude, std::size_t points_per_fwhm,
                    double half_width_fwhm = 10.0, double noise = 0.0, std::uint64_t seed = 0)
{
    const double fwhm = f0 / q;
    const std::size_t n = static_cast<std::size_t>(2.0 * half_width_fwhm * static_cast<double>(points_per_fwhm)) + 1;
    const auto f = grid(f0 - half_width_fwhm * fwhm, f0 + half_width_fwhm * fwhm, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<Complex> v(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double u = 2.0 * (f[i] - f0) / fwhm;
        v[i] = std::sqrt(baseline + amplitude / (1.0 + u * u));
        if (noise > 0.0)
            v[i] += noise * Complex(d(rng), d(rng));
    }
    return Spectrum(f, v, "lorentzian");
}
} // namespace

TEST_CASE("magnitude_db floors at -200 dB", "[spectra][db]")
{
    CHECK(magnitude_db(0.0) == kMagnitudeFloorDb);
    CHECK(magnitude_db(1e-20) == kMagnitudeFloorDb);
    CHECK_THAT(magnitude_db(0.1), WithinAbs(-20.0, 1e-12));
    CHECK_THAT(magnitude_db(Complex(0.0, 2.0)), WithinAbs(6.0206, 1e-4));
}

TEST_CASE("unwrap of a constant phase stays constant", "[spectra][unwrap]")
{
    for (double p : unwrap_phase(from_phases(std::vector<double>(9, 0.5))))
        CHECK_THAT(p, WithinAbs(0.5, 1e-15));
}

TEST_CASE("unwrap applies one 2 pi correction", "[spectra][unwrap]")
{
    const std::vector<double> raw{3.0, -3.0};
    const auto u = unwrap_phase(raw);
    CHECK(u[0] == 3.0);
    CHECK_THAT(u[1], WithinAbs(2.0 * kPi - 3.0, 1e-12));
    CHECK_THAT(u[1], WithinAbs(3.2832, 1e-4));
    const auto from_spectrum = unwrap_phase(from_phases(raw));
    CHECK_THAT(from_spectrum[1], WithinAbs(u[1], 1e-12));
}

TEST_CASE("unwrap of a linear phase is linear", "[spectra][unwrap]")
{
    const double tau = 100e-9;
    const auto s = delay_line(tau, kF0 - 0.5e6, kF0 + 0.5e6, 1001);
    const auto ph = unwrap_phase(s);
    const auto &f = s.freqs_hz();
    const double p0 = std::arg(s.values().front());
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK_THAT(ph[i] - p0, WithinAbs(-2.0 * kPi * tau * (f[i] - f[0]), 1e-9));
}

TEST_CASE("unwrap properties on random phase walks", "[spectra][unwrap][property]")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> step(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial)
    {
        std::vector<double> raw(200);
        double acc = 0.0;
        for (auto &p : raw)
        {
            acc += step(rng);
            p = std::remainder(acc, 2.0 * kPi);
        }
        const auto u = unwrap_phase(raw);
        CHECK(u.front() == raw.front());
        for (std::size_t i = 1; i < u.size(); ++i)
        {
            const double d = u[i] - u[i - 1];
            CHECK(d > -kPi - 1e-12);
            CHECK(d <= kPi + 1e-12);
        }
        const auto twice = unwrap_phase(u);
        for (std::size_t i = 0; i < u.size(); ++i)
            CHECK(twice[i] == u[i]);
    }
}

TEST_CASE("zeros carry the previous phase", "[spectra][unwrap]")
{
    Spectrum s({1.0, 2.0, 3.0}, {std::polar(1.0, 1.0), 0.0, std::polar(1.0, 1.2)});
    const auto u = unwrap_phase(s);
    CHECK(u[1] == u[0]);
    CHECK_THAT(u[2], WithinAbs(1.2, 1e-15));
}

TEST_CASE("group delay of a delay line is constant", "[spectra][gd]")
{
    const auto s = delay_line(10e-9, 500e6, 600e6, 2001);
    for (double t : group_delay(s))
        CHECK_THAT(t, WithinRel(10e-9, 1e-9));
}

TEST_CASE("group delay of a constant phase is zero", "[spectra][gd]")
{
    for (double t : group_delay(from_phases(std::vector<double>(5, -1.0))))
        CHECK(t == 0.0);
}

TEST_CASE("group delay needs three points", "[spectra][gd]")
{
    CHECK_THROWS_AS(group_delay(Spectrum({1.0, 2.0}, {1.0, 1.0})), ContractError);
}

TEST_CASE("conjugated model spectrum has negative group delay at the dip", "[spectra][gd]")
{
    const auto p = model::CmtParams::from_hz(kF0, 2.0e6, kF0, 2.7e6, 6.1e6);
    const auto s = model::sweep_spectrum(p, kF0 - 5e6, kF0 + 5e6, 1001, model::Direction::Forward, true);
    const auto tau = group_delay(s);
    CHECK(tau[500] < 0.0);
    // Frozen from a fine-grid finite difference of the closed form.
    CHECK_THAT(tau[500], WithinRel(-64.9e-9, 2e-3));
}

TEST_CASE("group delay flips sign under conjugation", "[spectra][gd][property]")
{
    const auto p = model::CmtParams::from_hz(kF0, 0.9e6, kF0 + 0.4e6, 1.3e6, 4.9e6);
    const auto a = model::sweep_spectrum(p, kF0 - 15e6, kF0 + 15e6, 301, model::Direction::Forward, false);
    const auto b = model::sweep_spectrum(p, kF0 - 15e6, kF0 + 15e6, 301, model::Direction::Forward, true);
    const auto ta = group_delay(a);
    const auto tb = group_delay(b);
    for (std::size_t i = 0; i < ta.size(); ++i)
        CHECK_THAT(tb[i], WithinAbs(-ta[i], 1e-12 * std::abs(ta[i]) + 1e-25));
}

TEST_CASE("normalization scales both spectra by the reference maximum", "[spectra][normalize]")
{
    Spectrum ref({1.0, 2.0, 3.0}, {0.5, 2.0, 1.0}, "ref");
    Spectrum tgt({1.0, 2.0, 3.0}, {0.1, 0.2, Complex(0.0, 0.4)}, "tgt");
    const auto n = normalize_to_reference(tgt, ref);
    CHECK(n.target.values()[1] == Complex(0.1));
    CHECK(n.target.values()[2] == Complex(0.0, 0.2));
    CHECK(n.reference.values()[1] == Complex(1.0));
    CHECK(n.target.label() == "tgt");

    Spectrum unit({1.0, 2.0}, {1.0, Complex(0.0, 0.5)});
    const auto same = normalize_to_reference(unit, unit);
    CHECK(same.target.values() == unit.values());
}

TEST_CASE("normalized reference peaks at 0 dB", "[spectra][normalize]")
{
    const auto p = model::CmtParams::from_hz(kF0, 0.9e6, kF0, 1.3e6, 4.9e6);
    const auto fwd = model::sweep_spectrum(p, kF0 - 15e6, kF0 + 15e6, 301, model::Direction::Forward, false);
    const auto rev = model::sweep_spectrum(p, kF0 - 15e6, kF0 + 15e6, 301, model::Direction::Reverse, false);
    const auto n = normalize_to_reference(rev, fwd);
    double peak = 0.0;
    for (const auto &v : n.reference.values())
        peak = std::max(peak, std::abs(v));
    CHECK_THAT(peak, WithinAbs(1.0, 1e-12));
    for (std::size_t i = 0; i < rev.size(); ++i)
        CHECK_THAT(std::abs(n.target.values()[i] / n.reference.values()[i]), WithinRel(0.5, 1e-12));
}

TEST_CASE("normalization errors", "[spectra][normalize]")
{
    Spectrum a({1.0, 2.0}, {1.0, 1.0});
    Spectrum b({1.0, 3.0}, {1.0, 1.0});
    Spectrum zero({1.0, 2.0}, {0.0, 0.0});
    CHECK_THROWS_AS(normalize_to_reference(a, b), ContractError);
    CHECK_THROWS_AS(normalize_to_reference(a, zero), DataError);
}

TEST_CASE("isolation of a -50 dB reverse path", "[spectra][isolation]")
{
    Spectrum fwd({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0});
    Spectrum rev({1.0, 2.0, 3.0}, {1.0, std::pow(10.0, -2.5), 0.1});
    const auto iso = isolation_db(fwd, rev);
    CHECK_THAT(iso.db[0], WithinAbs(0.0, 1e-12));
    CHECK_THAT(iso.db[1], WithinAbs(50.0, 1e-12));
    CHECK_THAT(iso.max_db, WithinAbs(50.0, 1e-12));
    CHECK(iso.f_at_max_hz == 2.0);
    CHECK_THAT(isolation_db(fwd, Spectrum({1.0, 2.0, 3.0}, {1.0, 0.00316, 1.0})).max_db, WithinAbs(50.0, 0.01));
}

TEST_CASE("isolation identities", "[spectra][isolation][property]")
{
    const auto p = model::CmtParams::from_hz(kF0, 0.9e6, kF0, 1.3e6, 4.9e6);
    const auto fwd = model::sweep_spectrum(p, kF0 - 15e6, kF0 + 15e6, 201, model::Direction::Forward, false);
    const auto rev = model::sweep_spectrum(p, kF0 - 15e6, kF0 + 15e6, 201, model::Direction::Reverse, false);
    for (double d : isolation_db(fwd, fwd).db)
        CHECK(d == 0.0);
    const auto ab = isolation_db(fwd, rev);
    const auto ba = isolation_db(rev, fwd);
    for (std::size_t i = 0; i < ab.db.size(); ++i)
    {
        CHECK(ab.db[i] == -ba.db[i]);
        // |fwd / rev| = path_ratio = 2
        CHECK_THAT(ab.db[i], WithinAbs(20.0 * std::log10(2.0), 1e-9));
    }
    CHECK_THROWS_AS(isolation_db(fwd, Spectrum({1.0, 2.0}, {1.0, 1.0})), ContractError);
}

TEST_CASE("isolation floors zero magnitudes", "[spectra][isolation]")
{
    const auto iso = isolation_db(Spectrum({1.0, 2.0}, {1.0, 1.0}), Spectrum({1.0, 2.0}, {0.0, 1.0}));
    CHECK(iso.db[0] == 200.0);
}

TEST_CASE("Q of a synthetic Lorentzian peak", "[spectra][q]")
{
    const auto r = fit_resonance(lorentzian(kF0, 236.0, 0.01, 1.0, 20), ResonanceKind::Peak);
    CHECK_THAT(r.q_factor, WithinRel(236.0, 1e-3));
    CHECK_THAT(r.f_center_hz, WithinRel(kF0, 1e-9));
    CHECK_THAT(r.bandwidth_3db_hz, WithinRel(kF0 / 236.0, 1e-3));
    CHECK_THAT(r.peak_mag_db, WithinAbs(10.0 * std::log10(1.01), 1e-3));
    CHECK(r.kind == ResonanceKind::Peak);
}

TEST_CASE("Q of a synthetic Lorentzian dip", "[spectra][q]")
{
    const auto r = fit_resonance(lorentzian(kF0, 236.0, 1.0, -0.9, 20), ResonanceKind::Dip);
    CHECK_THAT(r.q_factor, WithinRel(236.0, 1e-3));
    CHECK_THAT(r.peak_mag_db, WithinAbs(-10.0, 1e-3));
    CHECK(r.kind == ResonanceKind::Dip);
}

TEST_CASE("Q with 1% noise stays within 5%", "[spectra][q]")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        const auto r = fit_resonance(lorentzian(kF0, 236.0, 0.0, 1.0, 20, 10.0, 0.01, seed), ResonanceKind::Peak);
        CHECK_THAT(r.q_factor, WithinRel(236.0, 0.05));
    }
}

TEST_CASE("noiseless Q recovery across the Q range", "[spectra][q][property]")
{
    for (double q : {50.0, 120.0, 236.0, 800.0, 2000.0, 5000.0})
    {
        const auto peak = fit_resonance(lorentzian(kF0, q, 0.05, 1.0, 20), ResonanceKind::Peak);
        CHECK_THAT(peak.q_factor, WithinRel(q, 1e-3));
        const auto dip = fit_resonance(lorentzian(kF0, q, 1.0, -0.7, 20), ResonanceKind::Dip);
        CHECK_THAT(dip.q_factor, WithinRel(q, 1e-3));
    }
}

TEST_CASE("flat or monotonic spectra have no resonance", "[spectra][q]")
{
    const auto f = grid(1e6, 2e6, 50);
    Spectrum flat(f, std::vector<Complex>(50, 0.5));
    CHECK_THROWS_AS(fit_resonance(flat, ResonanceKind::Peak), DataError);
    CHECK_THROWS_AS(fit_resonance(flat, ResonanceKind::Dip), DataError);
    std::vector<Complex> ramp(50);
    for (std::size_t i = 0; i < 50; ++i)
        ramp[i] = 0.1 + 0.01 * static_cast<double>(i);
    CHECK_THROWS_AS(fit_resonance(Spectrum(f, ramp), ResonanceKind::Peak), DataError);
    CHECK_THROWS_AS(fit_resonance(lorentzian(kF0, 236.0, 0.0, 1.0, 20), ResonanceKind::Dip), DataError);
}

TEST_CASE("extrema scan of a model spectrum", "[spectra][extrema]")
{
    const auto p = model::CmtParams::from_hz(kF0, 0.9e6, kF0, 1.3e6, 4.9e6);
    const auto s = model::sweep_spectrum(p, kF0 - 15e6, kF0 + 15e6, 201, model::Direction::Forward, false);
    const auto ext = find_extrema(s);
    REQUIRE(ext.size() == 3);
    CHECK(ext[1].index == 100);
    CHECK(ext[1].kind == ResonanceKind::Dip);
    CHECK_THAT(ext[1].mag_db, WithinAbs(-23.213, 1e-3));
}

namespace
{
PowerSweepEntry entry(double power, double q)
{
    auto rev = lorentzian(kF0, q, 1.0, -0.99, 20);
    std::vector<Complex> fv(rev.size(), 1.0);
    return {power, Spectrum(rev.freqs_hz(), fv, "fwd"), rev};
}
} // namespace

TEST_CASE("power trend of a single row", "[spectra][power]")
{
    const std::vector<PowerSweepEntry> e{entry(-20.0, 236.0)};
    const auto rows = power_trend(e);
    REQUIRE(rows.size() == 1);
    CHECK_FALSE(rows[0].error);
    CHECK(rows[0].power_dbm == -20.0);
    CHECK_THAT(rows[0].dip_frequency_hz, WithinRel(kF0, 1e-9));
    CHECK_THAT(rows[0].bandwidth_3db_hz, WithinRel(kF0 / 236.0, 1e-3));
    CHECK_THAT(rows[0].max_isolation_db, WithinAbs(20.0, 1e-6));  // |rev|^2 = 0.01 at the center
}

TEST_CASE("power trend orders by power and repeats identical rows", "[spectra][power]")
{
    const std::vector<PowerSweepEntry> e{entry(-10.0, 300.0), entry(-30.0, 236.0), entry(-30.0, 236.0)};
    const auto rows = power_trend(e);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].power_dbm == -30.0);
    CHECK(rows[2].power_dbm == -10.0);
    CHECK(rows[0].bandwidth_3db_hz == rows[1].bandwidth_3db_hz);
    CHECK(rows[0].max_isolation_db == rows[1].max_isolation_db);
}

TEST_CASE("power trend flags a flat row and keeps the others", "[spectra][power]")
{
    auto good = entry(-20.0, 236.0);
    Spectrum flat(good.rev.freqs_hz(), std::vector<Complex>(good.rev.size(), 0.5));
    const std::vector<PowerSweepEntry> e{good, {-5.0, flat, flat}};
    const auto rows = power_trend(e);
    CHECK_FALSE(rows[0].error);
    REQUIRE(rows[1].error);
    CHECK(rows[1].error->find("-5 dBm") != std::string::npos);
    CHECK_THROWS_AS(power_trend(std::span<const PowerSweepEntry>{}), ContractError);
}
