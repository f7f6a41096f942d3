#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stm/kernel.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace stm;

namespace {

// 50-term tail series for zeta(N, s), summed in long double: the
// reference is independent of the cancellation-avoiding production path.
long double zeta_series(int n, long double s)
{
    long double term = 1.0L;
    for (int k = 1; k <= n - 1; ++k)
        term *= s / k;
    long double sum = 0.0L;
    for (int k = n - 1; k < n + 80; ++k) {
        sum += term;
        term *= s / (k + 1);
    }
    return sum;
}

}  // namespace

TEST_CASE("model parameter validation")
{
    CHECK_THROWS_AS(ModelParams(1, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams(2, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams(2, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams(2, 0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams(2, 0.5, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams(2, 0.5, 1.0, -0.1), std::invalid_argument);
    CHECK_NOTHROW(ModelParams(2, 0.5, 1.0, 0.49));
}

TEST_CASE("zeta reduces to e^s - 1 at order two")
{
    for (double s : {0.0, 1e-8, 0.3, 1.0, 5.0, 40.0})
        CHECK(zeta(2, s) == doctest::Approx(std::expm1(s)).epsilon(1e-14));
}

TEST_CASE("zeta vanishes at zero for every order")
{
    for (int n = 2; n <= 8; ++n)
        CHECK(zeta(n, 0.0) == 0.0);
}

TEST_CASE("zeta(3, 1) = e - 2")
{
    CHECK(zeta(3, 1.0)
          == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
}

TEST_CASE("zeta matches the extended-precision series near zero")
{
    for (int n : {2, 3, 4, 6}) {
        for (double s : {1e-12, 1e-6, 1e-3, 0.1, 0.9}) {
            const double ref = double(zeta_series(n, s));
            CHECK(zeta(n, s) == doctest::Approx(ref).epsilon(1e-13));
        }
    }
}

TEST_CASE("zeta rejects invalid domain")
{
    CHECK_THROWS_AS(zeta(2, -1e-9), std::domain_error);
    CHECK_THROWS_AS(zeta(0, 1.0), std::domain_error);
    CHECK_THROWS_AS(log_zeta(2, -1.0), std::domain_error);
}

TEST_CASE("zeta is nondecreasing and solves the derivative recursion")
{
    for (int n : {2, 3, 5}) {
        double prev = 0.0;
        for (double s = 0.0; s <= 6.0; s += 0.25) {
            const double v = zeta(n, s);
            CHECK(v >= prev);
            prev = v;
        }
        const double h = 1e-5;
        for (double s : {0.2, 1.0, 3.0, 8.0}) {
            const double fd = (zeta(n, s + h) - zeta(n, s - h)) / (2 * h);
            CHECK(fd == doctest::Approx(zeta(n - 1, s)).epsilon(1e-8));
        }
    }
}

TEST_CASE("power inequality zeta(N,t)^p <= zeta(N,pt)")
{
    for (int n : {2, 3, 4}) {
        for (double t = 1e-6; t < 60.0; t *= 3.0) {
            for (double p : {1.0, 1.5, 2.0, 3.0, 5.0}) {
                const double lhs = p * log_zeta(n, t);
                const double rhs = log_zeta(n, p * t);
                CHECK(lhs <= rhs + 1e-12 * std::abs(rhs));
            }
        }
    }
}

TEST_CASE("exponential inequality (e^a - 1)^p <= e^{pa} - 1")
{
    for (double a = 1e-6; a < 30.0; a *= 2.5) {
        for (double p : {1.0, 1.25, 2.0, 4.0}) {
            const double lhs = p * std::log(std::expm1(a));
            const double rhs = std::log(std::expm1(p * a));
            CHECK(lhs <= rhs + 1e-12 * std::abs(rhs));
        }
    }
}

TEST_CASE("contraction inequality t zeta(N-1,t) >= zeta(N,t)")
{
    for (int n : {2, 3, 4, 6}) {
        for (double t = 1e-8; t < 80.0; t *= 2.0) {
            const double lhs = t * zeta(n - 1, t);
            const double rhs = zeta(n, t);
            CHECK(lhs >= rhs * (1.0 - 1e-13));
        }
    }
}

TEST_CASE("sphere areas")
{
    const double pi = std::acos(-1.0);
    CHECK(sphere_area(2) == doctest::Approx(2 * pi).epsilon(1e-15));
    CHECK(sphere_area(3) == doctest::Approx(4 * pi).epsilon(1e-15));
    CHECK(sphere_area(4) == doctest::Approx(2 * pi * pi).epsilon(1e-15));
    CHECK(sphere_area(5) == doctest::Approx(8 * pi * pi / 3).epsilon(1e-15));
    CHECK_THROWS_AS(sphere_area(1), std::domain_error);
}

TEST_CASE("derived model constants")
{
    const double pi = std::acos(-1.0);
    ModelParams p(2, 0.5, 1.0, 0.1);
    CHECK(p.sharp_exponent() == doctest::Approx(4 * pi).epsilon(1e-15));
    CHECK(p.growth_coefficient()
          == doctest::Approx(4 * pi * 0.4).epsilon(1e-15));
    // the normalization that collapses the bubble prefactors
    for (int n : {2, 3, 4, 5}) {
        ModelParams q(n, 0.25, 2.0);
        const double alpha = q.sharp_exponent();
        CHECK(sphere_area(n) * std::pow(n / alpha, n - 1.0)
              == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("bubble profile closed form")
{
    BubbleProfile b(2, 0.5);
    CHECK(b.value(0.0) == 0.0);
    const double pi = std::acos(-1.0);
    // coefficient inside the log is pi/(1-beta) = 2 pi at N=2, beta=1/2
    CHECK(b.inner_coefficient() == doctest::Approx(2 * pi).epsilon(1e-13));
    CHECK(b.radial_power() == doctest::Approx(1.0).epsilon(1e-15));
    double prev = 1.0;
    for (double r : {0.0, 0.1, 0.5, 1.0, 4.0, 50.0}) {
        const double v = b.value(r);
        CHECK(v <= 0.0);
        CHECK(v < prev);
        prev = v;
    }
    // explicit 2D formula: -(1/(2 pi)) log(1 + 2 pi r)
    for (double r : {0.3, 1.0, 7.0})
        CHECK(b.value(r)
              == doctest::Approx(-std::log1p(2 * pi * r) / (2 * pi))
                     .epsilon(1e-14));
}

TEST_CASE("bubble solves its radial equation")
{
    {
        BubbleProfile b(2, 0.5);
        CHECK(std::abs(bubble_ode_residual(b, 1.0, 1e-4)) < 1e-5);
    }
    {
        BubbleProfile b(3, 0.25);
        CHECK(std::abs(bubble_ode_residual(b, 0.7, 1e-4)) < 1e-5);
    }
    // centered stencil: quartering under step halving
    BubbleProfile b(4, 0.5);
    const double r0 = std::abs(bubble_ode_residual(b, 1.3, 2e-3));
    const double r1 = std::abs(bubble_ode_residual(b, 1.3, 1e-3));
    CHECK(r0 / r1 == doctest::Approx(4.0).epsilon(0.08));
    CHECK_THROWS_AS(bubble_ode_residual(b, 1e-4, 1e-3), std::invalid_argument);
}

TEST_CASE("integral recursion closed form")
{
    {
        const IntegralCheck c = i_integral_check(2, std::acos(-1.0));
        CHECK(c.closed_form
              == doctest::Approx(1.0 / std::acos(-1.0)).epsilon(1e-15));
        CHECK(c.quadrature == doctest::Approx(c.closed_form).epsilon(1e-12));
    }
    {
        const IntegralCheck c = i_integral_check(3, 1.0);
        CHECK(c.closed_form == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(c.quadrature == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (int n = 2; n <= 6; ++n) {
        for (double c : {0.5, 1.0, std::acos(-1.0)}) {
            const IntegralCheck chk = i_integral_check(n, c);
            CHECK(std::abs(chk.quadrature - chk.closed_form)
                  <= 1e-10 * std::abs(chk.closed_form));
        }
    }
}

TEST_CASE("bubble inner coefficient normalizes the sphere measure")
{
    // sphere/(N(1-beta)) * c_N^{1-N} = 1
    for (int n : {2, 3, 4, 5}) {
        for (double beta : {0.25, 0.5, 0.75}) {
            BubbleProfile b(n, beta);
            const double lhs = sphere_area(n) / (n * (1.0 - beta))
                             * std::pow(b.inner_coefficient(), 1.0 - n);
            CHECK(lhs == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("concentration limit constant")
{
    const double pi = std::acos(-1.0);
    CHECK(carleson_chang_const(2)
          == doctest::Approx(pi * std::exp(1.0)).epsilon(1e-14));
    CHECK(carleson_chang_const(3)
          == doctest::Approx(4 * pi / 3 * std::exp(1.5)).epsilon(1e-14));
    CHECK(carleson_chang_const(3) == doctest::Approx(18.772855).epsilon(1e-5));
    double prev = 0.0;
    for (int n = 2; n <= 7; ++n) {
        CHECK(carleson_chang_const(n) > 0.0);
        const double normalized = carleson_chang_const(n) / sphere_area(n) * n;
        CHECK(normalized == doctest::Approx(std::exp(harmonic(n - 1))));
        CHECK(normalized > prev);  // increasing with the harmonic sum
        prev = normalized;
    }
}

TEST_CASE("critical threshold closed form")
{
    const double pi = std::acos(-1.0);
    ModelParams p(2, 0.5, 1.0, 0.0);
    CHECK(critical_threshold(p, 0.0)
          == doctest::Approx(2 * pi * std::exp(1.0)).epsilon(1e-14));
    // factorization through the concentration constant
    for (int n : {2, 3, 4}) {
        for (double beta : {0.25, 0.5}) {
            ModelParams q(n, beta, 1.0, 0.0);
            CHECK(critical_threshold(q, 0.0)
                  == doctest::Approx(carleson_chang_const(n) / (1.0 - beta))
                         .epsilon(1e-14));
        }
    }
    // 2D closed form (pi/(1-beta)) e^{1 + 4 pi (1-beta) A0}
    const double a0 = 0.0184508;
    CHECK(critical_threshold(p, a0)
          == doctest::Approx(2 * pi
                             * std::exp(1.0 + 4 * pi * 0.5 * a0))
                 .epsilon(1e-14));
}

TEST_CASE("log_zeta agrees with zeta in range and extends beyond")
{
    for (int n : {2, 4}) {
        for (double s : {0.5, 5.0, 50.0, 500.0})
            CHECK(log_zeta(n, s)
                  == doctest::Approx(std::log(zeta(n, s))).epsilon(1e-12));
        const double huge = 1e4;  // e^s overflows, log path must not
        CHECK(std::isfinite(log_zeta(n, huge)));
        CHECK(log_zeta(n, huge) == doctest::Approx(huge).epsilon(1e-10));
    }
}

TEST_CASE("harmonic sums")
{
    CHECK(harmonic(0) == 0.0);
    CHECK(harmonic(1) == 1.0);
    CHECK(harmonic(3) == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
}
