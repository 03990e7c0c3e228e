#ifndef CHIRALCMT_NUMERICS_HPP
#define CHIRALCMT_NUMERICS_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace chiralcmt
{

using Complex = std::complex<double>;

namespace numerics
{

// Row-major dense complex matrix for small systems (n <= 64).
class ComplexDense
{
public:
    static constexpr std::size_t kMaxDim = 64;

    ComplexDense() = default;
    ComplexDense(std::size_t rows, std::size_t cols);
    ComplexDense(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

    static ComplexDense identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    Complex &operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const Complex &operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    std::span<const Complex> entries() const noexcept { return entries_; }

    ComplexDense operator*(const ComplexDense &rhs) const;
    std::vector<Complex> operator*(std::span<const Complex> x) const;

    Complex trace() const;
    double frobenius_norm() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> entries_;
};

// Gaussian elimination with partial pivoting. Throws NumericalError when a
// pivot vanishes to working precision.
std::vector<Complex> lu_solve(ComplexDense a, std::span<const Complex> b);

// Coefficients c[0..n] of det(zI - A) = sum_k c[k] z^k (c[n] == 1), by the
// Faddeev-LeVerrier recursion.
std::vector<Complex> characteristic_polynomial(const ComplexDense &a);

Complex evaluate_polynomial(std::span<const Complex> coeffs, Complex z);

// All roots of the polynomial sum_k coeffs[k] z^k via Durand-Kerner
// (Weierstrass) iteration. Throws NumericalError after max_sweeps.
std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs, std::size_t max_sweeps = 10000);

// Eigenvalues of a square matrix with n <= 8, unordered.
std::vector<Complex> eigenvalues_small(const ComplexDense &a);

// Radix-2 transforms. dft uses exp(-2 pi i k n / N); idft carries the 1/N.
std::vector<Complex> dft(std::span<const Complex> x);
std::vector<Complex> idft(std::span<const Complex> x);

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

struct MinimizerConfig
{
    std::size_t max_evaluations = 100000;
    double simplex_tolerance = 1e-10;
    unsigned restarts = 8;
    std::uint64_t seed = 0;
};

struct MinimizerResult
{
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    std::size_t iterations = 0;
    bool converged = false;  // false when the evaluation cap ended the search
};

using Objective = std::function<double(std::span<const double>)>;

// Called once per simplex iteration with the best value found so far.
using IterationObserver = std::function<void(std::size_t iteration, double best_value)>;

// Nelder-Mead simplex minimizer (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). The simplex has collapsed once every vertex lies within
// simplex_tolerance * max(1, |x_best|) of the best one. It is then rebuilt
// around the best point with seeded random step perturbations, up to
// config.restarts times, stopping early when a restart brings no improvement. NaN objective values
// are treated as +inf.
//
// initial_step gives per-coordinate simplex edge lengths; empty means 5% of
// |x0[i]| (or 2.5e-4 for zero coordinates).
MinimizerResult nelder_mead(const Objective &objective,
                            std::vector<double> x0,
                            const MinimizerConfig &config,
                            std::span<const double> initial_step = {},
                            const IterationObserver &observer = {});

} // namespace numerics
} // namespace chiralcmt

#endif
