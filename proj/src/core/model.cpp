#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace chiralcmt::model
{

namespace
{
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPoleGuard = 1e-30;
constexpr Complex kI{0.0, 1.0};

void require_finite_positive(double v, const char *name)
{
    if (!std::isfinite(v) || !(v > 0.0))
        throw ContractError(std::string("CmtParams: ") + name + " must be finite and positive");
}

void require_omega(double omega)
{
    if (!std::isfinite(omega))
        throw ContractError("transmission: evaluation frequency must be finite");
}

Complex alpha(double omega, double omega_res, double kappa) { return -kI * omega + kI * omega_res + kappa; }

struct Alphas
{
    Complex lc;
    Complex m;
};

Alphas alphas(const CmtParams &p, double omega)
{
    return {alpha(omega, p.omega0, p.kappa0), alpha(omega, p.omega_m, p.kappa_m)};
}

// Shared resonant part without the numerator path factor:
//   -sqrt(2) kappa0 alpha_m g^2 / (alpha0^2 alpha_m^2 - g^4)
Complex resonant(const CmtParams &p, double omega)
{
    const auto [a0, am] = alphas(p, omega);
    const double g2 = p.g * p.g;
    const double g4 = g2 * g2;
    const Complex loop = a0 * a0 * am * am;
    const Complex den = loop - g4;
    const double scale = std::norm(a0) * std::norm(am) + g4;
    if (std::abs(den) < kPoleGuard * scale)
    {
        std::ostringstream msg;
        msg << "transmission: pole at omega = " << omega << " rad/s";
        throw PoleError(msg.str());
    }
    return -std::numbers::sqrt2 * p.kappa0 * am * g2 / den;
}

Complex background(const CmtParams &p, double omega)
{
    if (!p.background)
        return {};
    const auto &bg = *p.background;
    return std::polar(bg.amplitude, bg.phase_offset - omega * bg.delay);
}
} // namespace

void CmtParams::validate() const
{
    require_finite_positive(omega0, "omega0");
    require_finite_positive(kappa0, "kappa0");
    require_finite_positive(omega_m, "omega_m");
    require_finite_positive(kappa_m, "kappa_m");
    require_finite_positive(path_ratio, "path_ratio");
    if (!std::isfinite(g) || g < 0.0)
        throw ContractError("CmtParams: g must be finite and non-negative");
    if (background)
    {
        if (!std::isfinite(background->amplitude) || background->amplitude < 0.0)
            throw ContractError("BackgroundPath: amplitude must be finite and non-negative");
        if (!std::isfinite(background->phase_offset))
            throw ContractError("BackgroundPath: phase_offset must be finite");
        if (!std::isfinite(background->delay))
            throw ContractError("BackgroundPath: delay must be finite");
    }
}

CmtParams CmtParams::create(double omega0, double kappa0, double omega_m, double kappa_m, double g,
                            double path_ratio, std::optional<BackgroundPath> background)
{
    CmtParams p{omega0, kappa0, omega_m, kappa_m, g, path_ratio, background};
    p.validate();
    return p;
}

CmtParams CmtParams::from_hz(double f0_hz, double kappa0_hz, double fm_hz, double kappa_m_hz, double g_hz,
                             double path_ratio, std::optional<BackgroundPath> background)
{
    return create(kTwoPi * f0_hz, kTwoPi * kappa0_hz, kTwoPi * fm_hz, kTwoPi * kappa_m_hz, kTwoPi * g_hz,
                  path_ratio, background);
}

double CmtParams::kappa_m1() const { return std::sqrt(path_ratio) * kappa_m; }

double CmtParams::kappa_m2() const { return kappa_m / std::sqrt(path_ratio); }

namespace
{
Matrix4 coupling_ring(const CmtParams &p, const std::array<Complex, 4> &diag)
{
    Matrix4 m{};
    for (std::size_t i = 0; i < 4; ++i)
        m[i][i] = diag[i];
    m[kModeA][kModeM1] = p.g;
    m[kModeM1][kModeB] = p.g;
    m[kModeB][kModeM2] = p.g;
    m[kModeM2][kModeA] = p.g;
    return m;
}
} // namespace

Matrix4 detuned_matrix(const CmtParams &params, double omega)
{
    params.validate();
    require_omega(omega);
    const double nu0 = omega - params.omega0;
    const double num = omega - params.omega_m;
    return coupling_ring(params, {Complex(nu0, -params.kappa0), Complex(num, -params.kappa_m1()),
                                  Complex(nu0, -params.kappa0), Complex(num, -params.kappa_m2())});
}

Matrix4 mode_matrix(const CmtParams &params)
{
    params.validate();
    return coupling_ring(params, {Complex(params.omega0, -params.kappa0), Complex(params.omega_m, -params.kappa_m1()),
                                  Complex(params.omega0, -params.kappa0), Complex(params.omega_m, -params.kappa_m2())});
}

numerics::ComplexDense to_dense(const Matrix4 &m)
{
    numerics::ComplexDense d(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            d(i, j) = m[i][j];
    return d;
}

std::array<Complex, 4> eigenmodes(const CmtParams &params)
{
    const auto values = numerics::eigenvalues_small(to_dense(mode_matrix(params)));
    std::array<Complex, 4> out{};
    std::copy(values.begin(), values.end(), out.begin());

    double scale = 0.0;
    for (const auto &v : out)
        scale = std::max(scale, std::abs(v));
    const double tie = 1e-12 * scale;
    std::sort(out.begin(), out.end(), [tie](const Complex &a, const Complex &b) {
        if (std::abs(a.real() - b.real()) > tie)
            return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

double ep_gap(const CmtParams &params)
{
    const auto modes = eigenmodes(params);
    double gap = std::abs(modes[0] - modes[1]);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            gap = std::min(gap, std::abs(modes[i] - modes[j]));
    return gap;
}

Complex forward_transmission(const CmtParams &params, double omega)
{
    params.validate();
    require_omega(omega);
    return resonant(params, omega) + background(params, omega);
}

Complex reverse_transmission(const CmtParams &params, double omega)
{
    params.validate();
    require_omega(omega);
    return resonant(params, omega) / params.path_ratio + background(params, omega);
}

Complex transmission(const CmtParams &params, double omega, Direction direction)
{
    return direction == Direction::Forward ? forward_transmission(params, omega)
                                           : reverse_transmission(params, omega);
}

void transmission(const CmtParams &params, std::span<const double> omega, Direction direction,
                  std::span<Complex> out)
{
    params.validate();
    require(omega.size() == out.size(), "transmission: output length must match the frequency count");
    for (std::size_t i = 0; i < omega.size(); ++i)
    {
        require_omega(omega[i]);
        const Complex r = resonant(params, omega[i]);
        out[i] = (direction == Direction::Forward ? r : r / params.path_ratio) + background(params, omega[i]);
    }
}

Complex oracle_transmission(const CmtParams &params, double omega, Direction direction)
{
    params.validate();
    require_omega(omega);
    const auto [a0, am] = alphas(params, omega);
    const double root = std::sqrt(params.path_ratio);

    numerics::ComplexDense k = to_dense(coupling_ring(params, {-kI * a0, -kI * root * am, -kI * a0, -kI * am / root}));

    const std::size_t in = direction == Direction::Forward ? kModeA : kModeB;
    const std::size_t out = direction == Direction::Forward ? kModeB : kModeA;
    std::array<Complex, 4> drive{};
    drive[in] = -kI * params.kappa0;  // sqrt(kappa_a kappa_b) with kappa_a = kappa_b

    try
    {
        return numerics::lu_solve(std::move(k), drive)[out];
    }
    catch (const NumericalError &e)
    {
        std::ostringstream msg;
        msg << "oracle_transmission: singular system at omega = " << omega << " rad/s";
        throw PoleError(msg.str());
    }
}

double oracle_prefactor(const CmtParams &params) { return std::sqrt(params.path_ratio / 2.0); }

Spectrum sweep_spectrum(const CmtParams &params, double f_start_hz, double f_stop_hz, std::size_t n_points,
                        Direction direction, bool conjugate_for_export)
{
    params.validate();
    require(std::isfinite(f_start_hz) && std::isfinite(f_stop_hz) && f_start_hz < f_stop_hz,
            "sweep_spectrum: f_start must be below f_stop");
    require(n_points >= 2, "sweep_spectrum: at least two points are required");

    std::vector<double> freqs(n_points);
    std::vector<Complex> values(n_points);
    const double step = (f_stop_hz - f_start_hz) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i)
    {
        freqs[i] = i + 1 == n_points ? f_stop_hz : f_start_hz + static_cast<double>(i) * step;
        try
        {
            values[i] = transmission(params, kTwoPi * freqs[i], direction);
        }
        catch (const PoleError &e)
        {
            std::ostringstream msg;
            msg << e.what() << " (f = " << freqs[i] << " Hz)";
            throw PoleError(msg.str());
        }
        if (conjugate_for_export)
            values[i] = std::conj(values[i]);
    }
    return Spectrum(std::move(freqs), std::move(values), direction == Direction::Forward ? "forward" : "reverse");
}

} // namespace chiralcmt::model
