#include "numerics.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace chiralcmt::numerics
{

namespace
{
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

ComplexDense::ComplexDense(std::size_t rows, std::size_t cols)
    : ComplexDense(rows, cols, std::vector<Complex>(rows * cols))
{
}

ComplexDense::ComplexDense(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries))
{
    require(rows >= 1 && cols >= 1, "ComplexDense: dimensions must be positive");
    require(rows <= kMaxDim && cols <= kMaxDim, "ComplexDense: dimension exceeds 64");
    require(entries_.size() == rows * cols, "ComplexDense: entry count does not match dimensions");
}

ComplexDense ComplexDense::identity(std::size_t n)
{
    ComplexDense m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

ComplexDense ComplexDense::operator*(const ComplexDense &rhs) const
{
    require(cols_ == rhs.rows_, "ComplexDense: multiplication dimension mismatch");
    ComplexDense out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k)
        {
            const Complex a = (*this)(i, k);
            if (a == Complex{})
                continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j)
                out(i, j) += a * rhs(k, j);
        }
    return out;
}

std::vector<Complex> ComplexDense::operator*(std::span<const Complex> x) const
{
    require(x.size() == cols_, "ComplexDense: vector length mismatch");
    std::vector<Complex> y(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            y[i] += (*this)(i, j) * x[j];
    return y;
}

Complex ComplexDense::trace() const
{
    Complex t{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i)
        t += (*this)(i, i);
    return t;
}

double ComplexDense::frobenius_norm() const
{
    double s = 0.0;
    for (const auto &v : entries_)
        s += std::norm(v);
    return std::sqrt(s);
}

std::vector<Complex> lu_solve(ComplexDense a, std::span<const Complex> b)
{
    require(a.square(), "lu_solve: matrix must be square");
    const std::size_t n = a.rows();
    require(b.size() == n, "lu_solve: right-hand side length mismatch");

    std::vector<Complex> x(b.begin(), b.end());
    const double scale = std::max(a.frobenius_norm(), std::numeric_limits<double>::min());

    for (std::size_t col = 0; col < n; ++col)
    {
        std::size_t pivot = col;
        double best = std::abs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r)
        {
            const double mag = std::abs(a(r, col));
            if (mag > best)
            {
                best = mag;
                pivot = r;
            }
        }
        if (best <= kEps * scale)
            throw NumericalError("lu_solve: matrix is singular to working precision (column " +
                                 std::to_string(col) + ")");
        if (pivot != col)
        {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(a(col, c), a(pivot, c));
            std::swap(x[col], x[pivot]);
        }
        const Complex inv_pivot = 1.0 / a(col, col);
        for (std::size_t r = col + 1; r < n; ++r)
        {
            const Complex factor = a(r, col) * inv_pivot;
            if (factor == Complex{})
                continue;
            a(r, col) = 0.0;
            for (std::size_t c = col + 1; c < n; ++c)
                a(r, c) -= factor * a(col, c);
            x[r] -= factor * x[col];
        }
    }

    for (std::size_t i = n; i-- > 0;)
    {
        Complex acc = x[i];
        for (std::size_t c = i + 1; c < n; ++c)
            acc -= a(i, c) * x[c];
        x[i] = acc / a(i, i);
    }
    return x;
}

std::vector<Complex> characteristic_polynomial(const ComplexDense &a)
{
    require(a.square(), "characteristic_polynomial: matrix must be square");
    const std::size_t n = a.rows();
    std::vector<Complex> c(n + 1);
    c[n] = 1.0;

    // M_k = A M_{k-1} + c_{n-k+1} I,  c_{n-k} = -tr(A M_k) / k
    ComplexDense m(n, n);
    for (std::size_t k = 1; k <= n; ++k)
    {
        ComplexDense next = a * m;
        for (std::size_t i = 0; i < n; ++i)
            next(i, i) += c[n - k + 1];
        m = std::move(next);
        c[n - k] = -(a * m).trace() / static_cast<double>(k);
    }
    return c;
}

Complex evaluate_polynomial(std::span<const Complex> coeffs, Complex z)
{
    Complex acc{};
    for (std::size_t k = coeffs.size(); k-- > 0;)
        acc = acc * z + coeffs[k];
    return acc;
}

std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs, std::size_t max_sweeps)
{
    require(coeffs.size() >= 2, "polynomial_roots: degree must be at least 1");
    const Complex lead = coeffs.back();
    require(lead != Complex{}, "polynomial_roots: leading coefficient is zero");
    const std::size_t n = coeffs.size() - 1;

    std::vector<Complex> monic(coeffs.begin(), coeffs.end());
    for (auto &c : monic)
        c /= lead;

    double max_coeff = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        max_coeff = std::max(max_coeff, std::abs(monic[k]));

    const double radius = 1.0 + max_coeff;
    std::vector<Complex> z(n);
    for (std::size_t k = 0; k < n; ++k)
        z[k] = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4);

    auto backward_error_ok = [&](Complex root) {
        const Complex p = evaluate_polynomial(monic, root);
        double bound = 0.0;
        const double r = std::abs(root);
        double power = 1.0;
        for (std::size_t k = 0; k <= n; ++k)
        {
            bound += std::abs(monic[k]) * power;
            power *= r;
        }
        return std::abs(p) <= 16.0 * kEps * bound;
    };

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep)
    {
        bool settled = true;
        for (std::size_t k = 0; k < n; ++k)
        {
            Complex denom = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != k)
                    denom *= (z[k] - z[j]);
            if (denom == Complex{})
                denom = Complex(kEps, kEps);
            const Complex delta = evaluate_polynomial(monic, z[k]) / denom;
            z[k] -= delta;
            if (!std::isfinite(z[k].real()) || !std::isfinite(z[k].imag()))
                throw NumericalError("polynomial_roots: iteration diverged");
            if (std::abs(delta) > 4.0 * kEps * std::max(1.0, std::abs(z[k])))
                settled = false;
        }
        if (settled)
            return z;
        if (std::all_of(z.begin(), z.end(), backward_error_ok))
            return z;
    }
    throw NumericalError("polynomial_roots: no convergence after " + std::to_string(max_sweeps) + " sweeps");
}

namespace
{
bool is_triangular(const ComplexDense &a)
{
    const std::size_t n = a.rows();
    bool upper = true;
    bool lower = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
        {
            if (a(i, j) == Complex{})
                continue;
            if (i > j)
                upper = false;
            if (i < j)
                lower = false;
        }
    return upper || lower;
}
} // namespace

std::vector<Complex> eigenvalues_small(const ComplexDense &a)
{
    require(a.square(), "eigenvalues_small: matrix must be square");
    const std::size_t n = a.rows();
    require(n <= 8, "eigenvalues_small: dimension exceeds 8");
    for (const auto &v : a.entries())
        require(std::isfinite(v.real()) && std::isfinite(v.imag()), "eigenvalues_small: non-finite entry");

    if (is_triangular(a))
    {
        std::vector<Complex> diag(n);
        for (std::size_t i = 0; i < n; ++i)
            diag[i] = a(i, i);
        return diag;
    }

    // Shift to zero mean eigenvalue and scale to unit Frobenius norm so the
    // characteristic polynomial coefficients are O(1).
    const Complex shift = a.trace() / static_cast<double>(n);
    ComplexDense centered = a;
    for (std::size_t i = 0; i < n; ++i)
        centered(i, i) -= shift;
    const double scale = centered.frobenius_norm();
    if (scale == 0.0)
        return std::vector<Complex>(n, shift);

    std::vector<Complex> scaled_entries(centered.entries().begin(), centered.entries().end());
    for (auto &v : scaled_entries)
        v /= scale;
    const ComplexDense unit(n, n, std::move(scaled_entries));

    auto roots = polynomial_roots(characteristic_polynomial(unit));
    for (auto &r : roots)
        r = r * scale + shift;
    return roots;
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept
{
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

namespace
{
std::vector<Complex> radix2(std::span<const Complex> x, bool inverse)
{
    const std::size_t n = x.size();
    require(is_power_of_two(n), "dft: length " + std::to_string(n) + " is not a power of two");
    require(n <= (std::size_t{1} << 22), "dft: length exceeds 2^22");

    std::vector<Complex> a(x.begin(), x.end());
    for (std::size_t i = 1, j = 0; i < n; ++i)
    {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    std::vector<Complex> twiddle(n / 2 + 1);
    for (std::size_t k = 0; k < twiddle.size(); ++k)
        twiddle[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));

    for (std::size_t len = 2; len <= n; len <<= 1)
    {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len)
            for (std::size_t k = 0; k < half; ++k)
            {
                const Complex u = a[start + k];
                const Complex v = a[start + k + half] * twiddle[k * stride];
                a[start + k] = u + v;
                a[start + k + half] = u - v;
            }
    }

    if (inverse)
    {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto &v : a)
            v *= inv_n;
    }
    return a;
}
} // namespace

std::vector<Complex> dft(std::span<const Complex> x) { return radix2(x, false); }

std::vector<Complex> idft(std::span<const Complex> x) { return radix2(x, true); }

namespace
{
struct Vertex
{
    std::vector<double> x;
    double f;
};

class SimplexSearch
{
public:
    SimplexSearch(const Objective &objective, const MinimizerConfig &config)
        : objective_(objective), config_(config)
    {
    }

    bool exhausted() const { return evaluations_ >= config_.max_evaluations; }

    double evaluate(const std::vector<double> &x)
    {
        ++evaluations_;
        double f = objective_(x);
        if (std::isnan(f))
            f = kInf;
        if (f < best_.f)
            best_ = {x, f};
        return f;
    }

    // Returns true when the simplex met the tolerance, false when the
    // evaluation budget ran out.
    bool run(const std::vector<double> &base, double base_f, const std::vector<double> &step,
             const IterationObserver &observer)
    {
        const std::size_t n = base.size();
        std::vector<Vertex> simplex;
        simplex.reserve(n + 1);
        simplex.push_back({base, base_f});
        bool any_finite = false;
        for (std::size_t i = 0; i < n; ++i)
        {
            if (exhausted())
                return false;
            std::vector<double> v = base;
            v[i] += step[i];
            const double f = evaluate(v);
            any_finite = any_finite || std::isfinite(f);
            simplex.push_back({std::move(v), f});
        }
        if (!any_finite)
            throw NumericalError("nelder_mead: objective is non-finite at every simplex neighbor of the start point");

        std::vector<double> centroid(n), trial(n);
        auto along = [&](double coeff, const std::vector<double> &worst) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = centroid[i] + coeff * (worst[i] - centroid[i]);
            return p;
        };

        while (true)
        {
            std::sort(simplex.begin(), simplex.end(), [](const Vertex &a, const Vertex &b) { return a.f < b.f; });
            if (observer)
                observer(iterations_, best_.f);
            ++iterations_;

            double x_scale = 1.0;
            for (double v : simplex.front().x)
                x_scale = std::max(x_scale, std::abs(v));
            double size = 0.0;
            for (std::size_t j = 1; j <= n; ++j)
                for (std::size_t i = 0; i < n; ++i)
                    size = std::max(size, std::abs(simplex[j].x[i] - simplex.front().x[i]));
            if (size <= config_.simplex_tolerance * x_scale)
                return true;
            if (exhausted())
                return false;

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < n; ++i)
                    centroid[i] += simplex[j].x[i];
            for (auto &c : centroid)
                c /= static_cast<double>(n);

            Vertex &worst = simplex.back();
            const Vertex &second = simplex[n - 1];

            std::vector<double> reflected = along(-1.0, worst.x);
            const double f_r = evaluate(reflected);
            if (f_r < simplex.front().f)
            {
                if (exhausted())
                {
                    worst = {std::move(reflected), f_r};
                    continue;
                }
                std::vector<double> expanded = along(-2.0, worst.x);
                const double f_e = evaluate(expanded);
                if (f_e < f_r)
                    worst = {std::move(expanded), f_e};
                else
                    worst = {std::move(reflected), f_r};
                continue;
            }
            if (f_r < second.f)
            {
                worst = {std::move(reflected), f_r};
                continue;
            }
            if (exhausted())
                continue;

            const bool outside = f_r < worst.f;
            std::vector<double> contracted = outside ? along(-0.5, worst.x) : along(0.5, worst.x);
            const double f_c = evaluate(contracted);
            if (f_c < (outside ? f_r : worst.f))
            {
                worst = {std::move(contracted), f_c};
                continue;
            }

            const std::vector<double> best_x = simplex.front().x;
            for (std::size_t j = 1; j <= n; ++j)
            {
                if (exhausted())
                    break;
                for (std::size_t i = 0; i < n; ++i)
                    simplex[j].x[i] = best_x[i] + 0.5 * (simplex[j].x[i] - best_x[i]);
                simplex[j].f = evaluate(simplex[j].x);
            }
        }
    }

    const Vertex &best() const { return best_; }
    std::size_t evaluations() const { return evaluations_; }
    std::size_t iterations() const { return iterations_; }

private:
    const Objective &objective_;
    const MinimizerConfig &config_;
    Vertex best_{{}, kInf};
    std::size_t evaluations_ = 0;
    std::size_t iterations_ = 0;
};
} // namespace

MinimizerResult nelder_mead(const Objective &objective, std::vector<double> x0, const MinimizerConfig &config,
                            std::span<const double> initial_step, const IterationObserver &observer)
{
    require(config.max_evaluations >= 1, "nelder_mead: max_evaluations must be at least 1");
    require(config.simplex_tolerance > 0.0, "nelder_mead: simplex_tolerance must be positive");
    require(!x0.empty(), "nelder_mead: empty start point");
    const std::size_t n = x0.size();

    std::vector<double> step(n);
    if (initial_step.empty())
    {
        for (std::size_t i = 0; i < n; ++i)
            step[i] = x0[i] != 0.0 ? 0.05 * std::abs(x0[i]) : 2.5e-4;
    }
    else
    {
        require(initial_step.size() == n, "nelder_mead: initial_step length mismatch");
        for (std::size_t i = 0; i < n; ++i)
        {
            require(std::isfinite(initial_step[i]) && initial_step[i] != 0.0, "nelder_mead: initial steps must be finite and non-zero");
            step[i] = initial_step[i];
        }
    }

    SimplexSearch search(objective, config);
    const double f0 = search.evaluate(x0);
    require(std::isfinite(f0), "nelder_mead: objective is not finite at the start point");

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    std::bernoulli_distribution flip(0.5);

    bool converged = false;
    double previous = f0;
    for (unsigned round = 0; round <= config.restarts; ++round)
    {
        std::vector<double> round_step = step;
        if (round > 0)
            for (auto &s : round_step)
                s *= jitter(rng) * (flip(rng) ? -1.0 : 1.0);

        const auto base = search.best();
        converged = search.run(base.x, base.f, round_step, observer);
        if (!converged)
            break;
        const double now = search.best().f;
        if (round > 0 && previous - now <= config.simplex_tolerance * std::abs(previous))
            break;
        previous = now;
    }

    MinimizerResult result;
    result.x = search.best().x;
    result.value = search.best().f;
    result.evaluations = search.evaluations();
    result.iterations = search.iterations();
    result.converged = converged;
    return result;
}

} // namespace chiralcmt::numerics
