#include "stm/kernel.hpp"
#include "stm/quadrature.hpp"

#include <cmath>
#include <limits>

namespace stm {

namespace {
const double pi = 3.14159265358979323846;

// Gamma(n/2) by closed form: integer and half-integer arguments only.
double gamma_half(int n)
{
    if (n % 2 == 0) {
        double g = 1.0;                    // (n/2 - 1)!
        for (int k = 2; k <= n / 2 - 1; ++k)
            g *= k;
        return g;
    }
    double dfac = 1.0;                     // (n-2)!! with (-1)!! = 1
    for (int k = n - 2; k >= 3; k -= 2)
        dfac *= k;
    return std::sqrt(pi) * dfac / std::ldexp(1.0, (n - 1) / 2);
}
}  // namespace

double sphere_area(int n)
{
    if (n < 2)
        throw std::domain_error("sphere_area: n must be >= 2");
    return 2.0 * std::pow(pi, 0.5 * n) / gamma_half(n);
}

double harmonic(int m)
{
    if (m < 0)
        throw std::invalid_argument("harmonic: m must be >= 0");
    double h = 0.0;
    for (int k = 1; k <= m; ++k)
        h += 1.0 / k;
    return h;
}

double ModelParams::sphere() const
{
    return sphere_area(dim);
}

double ModelParams::sharp_exponent() const
{
    return dim * std::pow(sphere(), 1.0 / (dim - 1));
}

double ModelParams::growth_coefficient() const
{
    return sharp_exponent() * (1.0 - beta - eps);
}

double ModelParams::bubble_coefficient() const
{
    // alpha^{N-1} = N^{N-1} omega, so this equals (omega/(N(1-beta)))^{1/(N-1)}.
    return sharp_exponent() * std::pow(dim, -double(dim) / (dim - 1))
         * std::pow(1.0 - beta, -1.0 / (dim - 1));
}

double zeta(int n, double s)
{
    if (n < 1)
        throw std::domain_error("zeta: n must be >= 1");
    if (s < 0.0)
        throw std::domain_error("zeta: s must be >= 0");
    if (s == 0.0)
        return 0.0;
    if (s < 0.5 * n) {
        // Tail series sum_{k>=n-1} s^k/k!; first term carries the scale,
        // successive ratios s/(k+1) < 1/2 so ~50 terms always suffice.
        double term = 1.0;
        for (int k = 1; k <= n - 1; ++k)
            term *= s / k;
        double sum = term;
        for (int k = n; k < n + 200; ++k) {
            term *= s / k;
            sum += term;
            if (term < sum * 1e-18)
                break;
        }
        return sum;
    }
    const double es = std::exp(s);
    if (!std::isfinite(es))
        return std::numeric_limits<double>::infinity();  // saturation
    double part = 0.0, term = 1.0;
    for (int k = 0; k <= n - 2; ++k) {
        part += term;
        term *= s / (k + 1);
    }
    return es - part;
}

double log_zeta(int n, double s)
{
    if (n < 1)
        throw std::domain_error("log_zeta: n must be >= 1");
    if (s < 0.0)
        throw std::domain_error("log_zeta: s must be >= 0");
    if (s == 0.0)
        return -std::numeric_limits<double>::infinity();
    if (s < 700.0)
        return std::log(zeta(n, s));
    // Beyond overflow the subtracted polynomial is below e^s by a factor
    // e^{-s} s^{n-2}/(n-2)!, itself under 1e-250 for any sane n.
    return s;
}

double carleson_chang_const(int n)
{
    if (n < 2)
        throw std::invalid_argument("carleson_chang_const: n must be >= 2");
    return sphere_area(n) / n * std::exp(harmonic(n - 1));
}

double critical_threshold(const ModelParams& params, double a0)
{
    const double omb = 1.0 - params.beta;
    return carleson_chang_const(params.dim) / omb
         * std::exp(params.sharp_exponent() * omb * a0);
}

BubbleProfile::BubbleProfile(int dim, double beta)
    : dim_(dim), beta_(beta)
{
    ModelParams check(dim, beta, 1.0, 0.0);  // reuse the domain validation
    power_ = dim * (1.0 - beta) / (dim - 1);
    coeff_ = (dim - 1) / (check.sharp_exponent() * (1.0 - beta));
    inner_ = check.bubble_coefficient();
}

double BubbleProfile::value(double r) const
{
    if (r < 0.0)
        throw std::domain_error("BubbleProfile::value: r must be >= 0");
    if (r == 0.0)
        return 0.0;
    return -coeff_ * std::log1p(inner_ * std::pow(r, power_));
}

double BubbleProfile::slope(double r) const
{
    if (!(r > 0.0))
        throw std::domain_error("BubbleProfile::slope: r must be > 0");
    const double t = inner_ * std::pow(r, power_);
    return -coeff_ * power_ * t / ((1.0 + t) * r);
}

double bubble_ode_residual(const BubbleProfile& profile, double r, double h)
{
    if (!(h > 0.0) || !(r - 2.0 * h > 0.0))
        throw std::invalid_argument(
            "bubble_ode_residual: need h > 0 and r - 2h > 0");
    const int n = profile.dim();
    const double beta = profile.beta();

    // flux(x) = (-x f'(x))^{N-1} with f' itself a centered difference.
    auto flux = [&](double x) {
        const double d = (profile.value(x + h) - profile.value(x - h)) / (2.0 * h);
        return std::pow(-x * d, n - 1);
    };
    const double lhs = (flux(r + h) - flux(r - h)) / (2.0 * h);
    // alpha (1-beta) N/(N-1) = N / log_coefficient.
    const double expo = n / profile.log_coefficient() * profile.value(r);
    const double rhs = std::pow(r, n - 1 - n * beta) * std::exp(expo);
    return lhs - rhs;
}

IntegralCheck i_integral_check(int n, double c)
{
    if (n < 2)
        throw std::invalid_argument("i_integral_check: n must be >= 2");
    if (!(c > 0.0))
        throw std::invalid_argument("i_integral_check: c must be > 0");
    // Split at T = 1/c; the tail t in (T, inf) maps to u = 1/t in (0, 1/T)
    // with integrand (u + c)^{-n}, removing the infinite interval exactly.
    const double split = 1.0 / c;
    auto head = [&](double t) {
        return std::pow(t, n - 2) * std::pow(1.0 + c * t, -double(n));
    };
    auto tail = [&](double u) { return std::pow(u + c, -double(n)); };
    quad::Result h = quad::adaptive(head, 0.0, split, 1e-13, 0.0);
    quad::Result t = quad::adaptive(tail, 0.0, 1.0 / split, 1e-13, 0.0);
    IntegralCheck out;
    out.quadrature = (n - 1) * (h.value + t.value);
    out.closed_form = std::pow(c, 1.0 - n);
    out.error_estimate = (n - 1) * (h.error + t.error);
    return out;
}

}  // namespace stm
