#include <catch_amalgamated.hpp>

#include "error.hpp"
#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace chiralcmt;
using namespace chiralcmt::numerics;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
ComplexDense random_matrix(std::size_t n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> d;
    ComplexDense a(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            a(r, c) = {d(rng), d(rng)};
    return a;
}

std::vector<Complex> random_vector(std::size_t n, std::mt19937_64 &rng)
{
    std::normal_distribution<double> d;
    std::vector<Complex> v(n);
    for (auto &x : v)
        x = {d(rng), d(rng)};
    return v;
}

double norm2(std::span<const Complex> v)
{
    double s = 0.0;
    for (const auto &x : v)
        s += std::norm(x);
    return std::sqrt(s);
}

Complex determinant(ComplexDense a)
{
    // Plain elimination; only used on well-conditioned random matrices.
    const std::size_t n = a.rows();
    Complex det = 1.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        std::size_t p = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(a(r, k)) > std::abs(a(p, k)))
                p = r;
        if (p != k)
        {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(a(k, c), a(p, c));
            det = -det;
        }
        det *= a(k, k);
        for (std::size_t r = k + 1; r < n; ++r)
        {
            const Complex f = a(r, k) / a(k, k);
            for (std::size_t c = k; c < n; ++c)
                a(r, c) -= f * a(k, c);
        }
    }
    return det;
}

// Matches each expected value to the nearest unused computed value.
void require_same_set(std::vector<Complex> got, const std::vector<Complex> &want, double tol)
{
    REQUIRE(got.size() == want.size());
    for (const auto &w : want)
    {
        auto it = std::min_element(got.begin(), got.end(),
                                   [&](Complex a, Complex b) { return std::abs(a - w) < std::abs(b - w); });
        CHECK(std::abs(*it - w) <= tol);
        got.erase(it);
    }
}
} // namespace

TEST_CASE("lu_solve identity returns the right-hand side", "[numerics][lu]")
{
    const std::vector<Complex> b{{1, 2}, {-3, 0.5}, {0, -1}};
    const auto x = lu_solve(ComplexDense::identity(3), b);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(x[i] == b[i]);
}

TEST_CASE("lu_solve diagonal system", "[numerics][lu]")
{
    ComplexDense a(2, 2, {2.0, 0.0, 0.0, 4.0});
    const std::vector<Complex> b{2.0, 8.0};
    const auto x = lu_solve(a, b);
    CHECK_THAT(x[0].real(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(x[1].real(), WithinAbs(2.0, 1e-15));
}

TEST_CASE("lu_solve recovers a known solution of random systems", "[numerics][lu]")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial)
    {
        const std::size_t n = 1 + trial % 8;
        const auto a = random_matrix(n, rng);
        const auto x = random_vector(n, rng);
        const auto b = a * std::span<const Complex>(x);
        const auto got = lu_solve(a, b);
        const auto resid = a * std::span<const Complex>(got);
        std::vector<Complex> diff(n);
        for (std::size_t i = 0; i < n; ++i)
            diff[i] = resid[i] - b[i];
        CHECK(norm2(diff) <= 1e-10 * norm2(b));
    }
}

TEST_CASE("lu_solve needs pivoting on a zero leading entry", "[numerics][lu]")
{
    ComplexDense a(2, 2, {0.0, 1.0, 1.0, 0.0});
    const std::vector<Complex> b{3.0, 5.0};
    const auto x = lu_solve(a, b);
    CHECK(x[0] == Complex(5.0));
    CHECK(x[1] == Complex(3.0));
}

TEST_CASE("lu_solve rejects singular and mismatched systems", "[numerics][lu]")
{
    ComplexDense singular(2, 2, {1.0, 2.0, 2.0, 4.0});
    const std::vector<Complex> b{1.0, 1.0};
    CHECK_THROWS_AS(lu_solve(singular, b), NumericalError);
    CHECK_THROWS_AS(lu_solve(ComplexDense(2, 3), b), ContractError);
    CHECK_THROWS_AS(lu_solve(ComplexDense::identity(3), b), ContractError);
}

TEST_CASE("ComplexDense enforces its shape", "[numerics][dense]")
{
    CHECK_THROWS_AS(ComplexDense(2, 2, std::vector<Complex>(3)), ContractError);
    CHECK_THROWS_AS(ComplexDense(65, 1), ContractError);
    CHECK_THROWS_AS(ComplexDense(2, 2) * ComplexDense(3, 3), ContractError);
}

TEST_CASE("eigenvalues of a diagonal matrix are its diagonal", "[numerics][eig]")
{
    ComplexDense a(3, 3);
    a(0, 0) = {1.0, -2.0};
    a(1, 1) = {-4.0, 0.5};
    a(2, 2) = {7.0, 0.0};
    require_same_set(eigenvalues_small(a), {{1.0, -2.0}, {-4.0, 0.5}, {7.0, 0.0}}, 1e-14);
}

TEST_CASE("eigenvalues of the 4x4 cyclic shift are the fourth roots of unity", "[numerics][eig]")
{
    ComplexDense p(4, 4);
    for (std::size_t k = 0; k < 4; ++k)
        p(k, (k + 1) % 4) = 1.0;
    require_same_set(eigenvalues_small(p), {{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, 1e-12);
}

TEST_CASE("circulant d*I + g*P has eigenvalues d + g i^k", "[numerics][eig]")
{
    const Complex d{543.8, -0.9};
    const double g = 4.9;
    ComplexDense a(4, 4);
    for (std::size_t k = 0; k < 4; ++k)
    {
        a(k, k) = d;
        a(k, (k + 1) % 4) = g;
    }
    const Complex i{0.0, 1.0};
    require_same_set(eigenvalues_small(a), {d + g, d + g * i, d - g, d - g * i}, 1e-9);
}

TEST_CASE("zero and scalar matrices", "[numerics][eig]")
{
    require_same_set(eigenvalues_small(ComplexDense(3, 3)), {0.0, 0.0, 0.0}, 0.0);
    ComplexDense s = ComplexDense::identity(4);
    for (std::size_t k = 0; k < 4; ++k)
        s(k, k) = {2.0, 1.0};
    require_same_set(eigenvalues_small(s), {{2, 1}, {2, 1}, {2, 1}, {2, 1}}, 1e-14);
}

TEST_CASE("random matrices: trace, determinant and char-poly residual", "[numerics][eig][property]")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const std::size_t n = 2 + trial % 7;
        const auto a = random_matrix(n, rng);
        const auto ev = eigenvalues_small(a);
        REQUIRE(ev.size() == n);

        Complex sum = 0.0, prod = 1.0;
        for (const auto &z : ev)
        {
            sum += z;
            prod *= z;
        }
        const Complex tr = a.trace();
        const Complex det = determinant(a);
        CHECK(std::abs(sum - tr) <= 1e-8 * std::max(1.0, std::abs(tr)));
        CHECK(std::abs(prod - det) <= 1e-8 * std::max(1.0, std::abs(det)));

        const auto c = characteristic_polynomial(a);
        double cnorm = 0.0;
        for (const auto &x : c)
            cnorm += std::norm(x);
        cnorm = std::sqrt(cnorm);
        for (const auto &z : ev)
        {
            double scale = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k)
                scale += std::abs(c[k]) * std::pow(std::abs(z), static_cast<double>(k));
            CHECK(std::abs(evaluate_polynomial(c, z)) <= 1e-8 * std::max(cnorm, scale));
        }
    }
}

TEST_CASE("characteristic polynomial of a 2x2", "[numerics][eig]")
{
    // det(zI - [[1,2],[3,4]]) = z^2 - 5z - 2
    ComplexDense a(2, 2, {1.0, 2.0, 3.0, 4.0});
    const auto c = characteristic_polynomial(a);
    REQUIRE(c.size() == 3);
    CHECK_THAT(c[0].real(), WithinAbs(-2.0, 1e-14));
    CHECK_THAT(c[1].real(), WithinAbs(-5.0, 1e-14));
    CHECK(c[2] == Complex(1.0));
}

TEST_CASE("polynomial roots of (z-1)(z-2)(z+3i)", "[numerics][eig]")
{
    const Complex i{0.0, 1.0};
    // z^3 + (3i - 3) z^2 + (2 - 9i) z + 6i
    const std::vector<Complex> c{6.0 * i, 2.0 - 9.0 * i, 3.0 * i - 3.0, 1.0};
    require_same_set(polynomial_roots(c), {1.0, 2.0, -3.0 * i}, 1e-12);
}

TEST_CASE("eigenvalues_small rejects oversize and non-square input", "[numerics][eig]")
{
    CHECK_THROWS_AS(eigenvalues_small(ComplexDense(9, 9)), ContractError);
    CHECK_THROWS_AS(eigenvalues_small(ComplexDense(2, 3)), ContractError);
}

TEST_CASE("dft of an impulse is flat", "[numerics][dft]")
{
    const std::vector<Complex> x{1.0, 0.0, 0.0, 0.0};
    for (const auto &v : dft(x))
        CHECK(std::abs(v - Complex(1.0)) < 1e-15);
}

TEST_CASE("dft of a single tone lands in one bin", "[numerics][dft]")
{
    const std::size_t n = 16;
    std::vector<Complex> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = std::polar(1.0, 2.0 * std::numbers::pi * 3.0 * static_cast<double>(k) / static_cast<double>(n));
    const auto spec = dft(x);
    for (std::size_t k = 0; k < n; ++k)
        CHECK(std::abs(spec[k] - Complex(k == 3 ? 16.0 : 0.0)) < 1e-12);
}

TEST_CASE("dft round trip and Parseval on random data", "[numerics][dft][property]")
{
    std::mt19937_64 rng(5);
    const auto x = random_vector(1024, rng);
    const auto spec = dft(x);
    const auto back = idft(spec);
    double err = 0.0, ref = 0.0, energy_t = 0.0, energy_f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        err += std::norm(back[i] - x[i]);
        ref += std::norm(x[i]);
        energy_t += std::norm(x[i]);
        energy_f += std::norm(spec[i]);
    }
    CHECK(std::sqrt(err / ref) <= 1e-10);
    CHECK_THAT(energy_f / 1024.0, WithinRel(energy_t, 1e-9));
}

TEST_CASE("dft is linear", "[numerics][dft][property]")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto x = random_vector(256, rng);
        const auto y = random_vector(256, rng);
        const Complex a{0.3, -1.2}, b{2.0, 0.7};
        std::vector<Complex> combo(256);
        for (std::size_t i = 0; i < 256; ++i)
            combo[i] = a * x[i] + b * y[i];
        const auto lhs = dft(combo);
        const auto fx = dft(x);
        const auto fy = dft(y);
        std::vector<Complex> diff(256);
        for (std::size_t i = 0; i < 256; ++i)
            diff[i] = lhs[i] - (a * fx[i] + b * fy[i]);
        CHECK(norm2(diff) <= 1e-10 * norm2(lhs));
    }
}

TEST_CASE("dft rejects lengths that are not powers of two", "[numerics][dft]")
{
    CHECK_THROWS_AS(dft(std::vector<Complex>(12)), ContractError);
    CHECK_THROWS_AS(idft(std::vector<Complex>(0)), ContractError);
    CHECK(is_power_of_two(1));
    CHECK(is_power_of_two(4096));
    CHECK_FALSE(is_power_of_two(0));
    CHECK_FALSE(is_power_of_two(6));
    CHECK(next_power_of_two(5) == 8);
    CHECK(next_power_of_two(8) == 8);
}

TEST_CASE("nelder_mead finds a 1-D parabola minimum", "[numerics][nm]")
{
    const Objective f = [](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); };
    const auto r = nelder_mead(f, {0.0}, MinimizerConfig{});
    CHECK_THAT(r.x[0], WithinAbs(3.0, 1e-6));
    CHECK(r.converged);
}

TEST_CASE("nelder_mead solves Rosenbrock", "[numerics][nm]")
{
    const Objective f = [](std::span<const double> x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    const auto r = nelder_mead(f, {-1.2, 1.0}, MinimizerConfig{});
    CHECK_THAT(r.x[0], WithinAbs(1.0, 1e-5));
    CHECK_THAT(r.x[1], WithinAbs(1.0, 1e-5));
}

TEST_CASE("nelder_mead recovers the center of random quadratic bowls", "[numerics][nm][property]")
{
    std::mt19937_64 rng(99);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 10; ++trial)
    {
        const std::size_t n = 3;
        // H = L L^T + I, positive definite
        std::vector<double> l(n * n), h(n * n, 0.0), c(n);
        for (auto &v : l)
            v = d(rng);
        for (auto &v : c)
            v = d(rng);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
            {
                for (std::size_t k = 0; k < n; ++k)
                    h[i * n + j] += l[i * n + k] * l[j * n + k];
                if (i == j)
                    h[i * n + j] += 1.0;
            }
        const Objective f = [&](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    s += (x[i] - c[i]) * h[i * n + j] * (x[j] - c[j]);
            return s;
        };
        const auto r = nelder_mead(f, {0.0, 0.0, 0.0}, MinimizerConfig{});
        for (std::size_t i = 0; i < n; ++i)
            CHECK_THAT(r.x[i], WithinAbs(c[i], 1e-6));
    }
}

TEST_CASE("nelder_mead best value never increases", "[numerics][nm][property]")
{
    const Objective f = [](std::span<const double> x) {
        return std::pow(x[0] - 1.0, 2) + 10.0 * std::pow(x[1] + 2.0, 2) + std::sin(3.0 * x[0]);
    };
    std::vector<double> seen;
    nelder_mead(f, {4.0, 4.0}, MinimizerConfig{}, {},
                [&](std::size_t, double best) { seen.push_back(best); });
    REQUIRE(seen.size() > 10);
    for (std::size_t i = 1; i < seen.size(); ++i)
        CHECK(seen[i] <= seen[i - 1]);
}

TEST_CASE("nelder_mead is deterministic for a seed", "[numerics][nm]")
{
    const Objective f = [](std::span<const double> x) {
        return std::pow(x[0] * x[0] + x[1] - 11.0, 2) + std::pow(x[0] + x[1] * x[1] - 7.0, 2);
    };
    MinimizerConfig cfg;
    cfg.seed = 17;
    const auto a = nelder_mead(f, {0.1, 0.2}, cfg);
    const auto b = nelder_mead(f, {0.1, 0.2}, cfg);
    CHECK(a.x == b.x);
    CHECK(a.value == b.value);
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("nelder_mead treats NaN as +inf", "[numerics][nm]")
{
    const Objective f = [](std::span<const double> x) {
        if (x[0] < 0.5)
            return std::nan("");
        return (x[0] - 2.0) * (x[0] - 2.0);
    };
    const auto r = nelder_mead(f, {1.0}, MinimizerConfig{});
    CHECK_THAT(r.x[0], WithinAbs(2.0, 1e-6));
}

TEST_CASE("nelder_mead failure modes", "[numerics][nm]")
{
    const Objective nan_everywhere_but_x0 = [](std::span<const double> x) {
        return x[0] == 1.0 ? 0.0 : std::nan("");
    };
    CHECK_THROWS_AS(nelder_mead(nan_everywhere_but_x0, {1.0}, MinimizerConfig{}), NumericalError);

    const Objective bad_start = [](std::span<const double>) { return std::nan(""); };
    CHECK_THROWS_AS(nelder_mead(bad_start, {1.0}, MinimizerConfig{}), ContractError);

    MinimizerConfig zero_budget;
    zero_budget.max_evaluations = 0;
    const Objective ok = [](std::span<const double> x) { return x[0] * x[0]; };
    CHECK_THROWS_AS(nelder_mead(ok, {1.0}, zero_budget), ContractError);
}

TEST_CASE("nelder_mead reports the evaluation cap", "[numerics][nm]")
{
    const Objective f = [](std::span<const double> x) {
        return std::pow(1.0 - x[0], 2) + 100.0 * std::pow(x[1] - x[0] * x[0], 2);
    };
    MinimizerConfig cfg;
    cfg.max_evaluations = 30;
    const auto r = nelder_mead(f, {-1.2, 1.0}, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.evaluations <= 30);
}
