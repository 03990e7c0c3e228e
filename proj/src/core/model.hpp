#ifndef CHIRALCMT_MODEL_HPP
#define CHIRALCMT_MODEL_HPP

#include "numerics.hpp"
#include "spectrum.hpp"

#include <array>
#include <optional>
#include <span>

namespace chiralcmt::model
{

// Broadband parasitic path added coherently to the resonant transmission:
// amplitude * exp(i (phase_offset - omega * delay)).
struct BackgroundPath
{
    double amplitude = 0.0;     // linear
    double phase_offset = 0.0;  // rad
    double delay = 0.0;         // s
};

// Coupled-mode rates of the LC / edge-magnetoplasmon ring, all in rad/s.
//
// Both LC resonators share (omega0, kappa0). The two edge-plasmon paths share
// omega_m; their damping is split by path_ratio around the geometric mean
// kappa_m: kappa_m1 = sqrt(path_ratio) * kappa_m, kappa_m2 = kappa_m / sqrt(path_ratio),
// so kappa_m1 = path_ratio * kappa_m2.
struct CmtParams
{
    double omega0 = 0.0;
    double kappa0 = 0.0;
    double omega_m = 0.0;
    double kappa_m = 0.0;
    double g = 0.0;
    double path_ratio = 2.0;
    std::optional<BackgroundPath> background;

    // Throws ContractError on any invariant violation.
    void validate() const;

    static CmtParams create(double omega0, double kappa0, double omega_m, double kappa_m, double g,
                            double path_ratio = 2.0, std::optional<BackgroundPath> background = std::nullopt);

    // Same as create() but every rate given as ordinary frequency (value / 2 pi) in Hz.
    static CmtParams from_hz(double f0_hz, double kappa0_hz, double fm_hz, double kappa_m_hz, double g_hz,
                             double path_ratio = 2.0, std::optional<BackgroundPath> background = std::nullopt);

    double kappa_m1() const;
    double kappa_m2() const;
};

enum class Direction
{
    Forward,
    Reverse,
};

using Matrix4 = std::array<std::array<Complex, 4>, 4>;

// Mode order used by every matrix below.
enum Mode : std::size_t
{
    kModeA = 0,
    kModeM1 = 1,
    kModeB = 2,
    kModeM2 = 3,
};

// Detuned coupling matrix as printed for the minimal non-Hermitian model:
// diagonal (omega - omega_x) - i kappa_x, coupling g on the cyclic
// a -> m1 -> b -> m2 -> a superdiagonal.
//
// Relation to mode_matrix M: the diagonals satisfy detuned = conj(omega I - M),
// the off-diagonal couplings are identical. Transmission depends on g only
// through g^2 and g^4, so it is insensitive to that sign.
Matrix4 detuned_matrix(const CmtParams &params, double omega);

// Frequency-independent mode matrix: diagonal omega_x - i kappa_x, same
// coupling pattern. Its eigenvalues are the complex normal-mode frequencies
// (negative imaginary part = decay).
Matrix4 mode_matrix(const CmtParams &params);

// Eigenvalues of mode_matrix sorted by real part, then imaginary part.
std::array<Complex, 4> eigenmodes(const CmtParams &params);

// Minimum pairwise distance between the four eigenvalues (rad/s); zero at
// an exceptional point.
double ep_gap(const CmtParams &params);

// Closed-form dip-path transmission
//   t = -sqrt(2) kappa0 alpha_m g^2 / (alpha0^2 alpha_m^2 - g^4)
// with alpha_x = -i omega + i omega_x + kappa_x, plus the background path when set.
Complex forward_transmission(const CmtParams &params, double omega);

// Opposite circulation sense: the numerator picks up the m2 path instead of
// m1, so reverse = forward_resonant / path_ratio (plus background).
// |reverse / forward| == 1 / path_ratio at every frequency without background.
Complex reverse_transmission(const CmtParams &params, double omega);

Complex transmission(const CmtParams &params, double omega, Direction direction);

// transmission() at every omega, validating the parameters once.
void transmission(const CmtParams &params, std::span<const double> omega, Direction direction,
                  std::span<Complex> out);

// Independent check of the closed forms: solves the steady-state 4x4 system
// K x = s e_in with K = diag(-i alpha_a, -i alpha_m1, -i alpha_b, -i alpha_m2)
// plus the cyclic coupling g, where alpha_m1 = sqrt(path_ratio) alpha_m and
// alpha_m2 = alpha_m / sqrt(path_ratio). Drive s = -i sqrt(kappa_a kappa_b) on
// mode a (b for Reverse), readout on mode b (a for Reverse). The background
// path is not included.
//
// oracle / closed form == sqrt(path_ratio / 2) at every frequency.
Complex oracle_transmission(const CmtParams &params, double omega, Direction direction = Direction::Forward);

// The ratio oracle_transmission / resonant closed form.
double oracle_prefactor(const CmtParams &params);

// Uniform sweep in Hz. With conjugate_for_export the values are conjugated so
// phases follow the exp(+i omega t) measurement convention (negative group
// delay at the dip).
Spectrum sweep_spectrum(const CmtParams &params, double f_start_hz, double f_stop_hz, std::size_t n_points,
                        Direction direction, bool conjugate_for_export);

numerics::ComplexDense to_dense(const Matrix4 &m);

} // namespace chiralcmt::model

#endif
