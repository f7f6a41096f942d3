#include "stm/testfn.hpp"
#include "stm/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace stm {

namespace {

double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

// Dirichlet energy of the bubble over the ball of radius R, in closed
// form: with T = inner * R^power,
//   kappa * ( log(1+T) - sum_{k=1}^{N-1} (1/k) (T/(1+T))^k ).
// The prefactor collapses because sphere * (N/alpha)^{N-1} = 1.
double bubble_dirichlet(const BubbleProfile& bubble, double R)
{
    const int n = bubble.dim();
    const double T = bubble.inner_coefficient()
                   * std::pow(R, bubble.radial_power());
    const double z = T / (1.0 + T);
    double sum = 0.0, zk = 1.0;
    for (int k = 1; k <= n - 1; ++k) {
        zk *= z;
        sum += zk / k;
    }
    return bubble.log_coefficient() * (std::log1p(T) - sum);
}

}  // namespace

BubbleMass bubble_mass(const ModelParams& params, double radius)
{
    if (!(radius > 0.0))
        throw std::invalid_argument("bubble_mass: radius must be positive");
    const int dim = params.dim;
    const BubbleProfile bubble(dim, params.beta);
    const double p = bubble.radial_power();
    const double c = bubble.inner_coefficient();
    const double scale = sphere_area(dim) / p;
    const double T = std::pow(radius, p);
    BubbleMass m;
    m.truncated = scale
                * quad::adaptive(
                      [&](double t) {
                          return std::pow(t, dim - 2.0)
                               * std::pow(1.0 + c * t, -double(dim));
                      },
                      0.0, T, 1e-13, 0.0)
                      .value;
    // With u = 1/t the remainder becomes integral_0^{1/T} (u+c)^{-N} du.
    m.tail = scale
           * (std::pow(c, 1.0 - dim) - std::pow(1.0 / T + c, 1.0 - dim))
           / (dim - 1);
    m.total = m.truncated + m.tail;
    return m;
}

TestFunctionReport build_test_function(double cutoff, const ModelParams& params,
                                       const GreenProfile& green)
{
    if (params.eps != 0.0)
        throw std::invalid_argument(
            "build_test_function: params.eps must be 0 (critical exponent)");
    if (green.dim != params.dim || green.tau != params.tau)
        throw std::invalid_argument(
            "build_test_function: profile solved for different parameters");
    if (!(cutoff > 0.0 && cutoff < 1.0))
        throw std::invalid_argument("build_test_function: cutoff outside (0,1)");

    const int n = params.dim;
    const double omega = sphere_area(n);
    const double np = double(n) / (n - 1);  // exponent N/(N-1)
    const BubbleProfile bubble(n, params.beta);
    const double kappa = bubble.log_coefficient();
    const double cN = bubble.inner_coefficient();
    const double growth = params.growth_coefficient();  // alpha (1 - beta)

    TestFunctionReport rep;
    rep.cutoff = cutoff;
    rep.window = std::pow(-std::log(cutoff), 1.0 / (1.0 - params.beta));
    rep.matching_radius = rep.window * cutoff;
    if (!(rep.window >= 2.0))
        throw std::invalid_argument("build_test_function: cutoff too large");
    if (!(rep.matching_radius >= green.r_min
          && rep.matching_radius <= 0.5 * green.r_max))
        throw std::invalid_argument(
            "build_test_function: matching radius escapes the profile domain");

    const double a = rep.matching_radius;
    const GreenOuterData outer = green_outer_data(green, a, params);
    const AdditiveConstantFit a0 = extract_A0(green);
    const double d_inner = bubble_dirichlet(bubble, rep.window);
    const double K = d_inner + outer.energy;
    const double g_at_a = green.value_at(a);
    const double logT = std::log1p(cN * std::pow(rep.window, bubble.radial_power()));

    auto shift_of = [&](double c) { return g_at_a - std::pow(c, np) + kappa * logT; };
    auto inner_of = [&](double c, double b) {
        return [=, &bubble](double r) {
            return c + std::pow(c, -1.0 / (n - 1))
                     * (bubble.value(r / cutoff) + b);
        };
    };
    auto mass_inner = [&](double c) {
        const auto phi = inner_of(c, shift_of(c));
        return omega
             * quad::adaptive(
                   [&](double r) {
                       return std::pow(std::abs(phi(r)), double(n))
                            * std::pow(r, n - 1.0);
                   },
                   0.0, a, 1e-12, 0.0)
                   .value;
    };
    auto defect = [&](double c) {
        return std::pow(c, -np) * K + params.tau * mass_inner(c) - 1.0;
    };

    // Peak height: bracket around the leading-order prediction, bisect.
    rep.asymptote_shift = kappa * harmonic(n - 1);
    rep.asymptote_peak_pow = -std::log(cutoff) * n / params.sharp_exponent()
                           + a0.value - rep.asymptote_shift
                           + kappa * std::log(cN);
    const double c_guess = std::pow(std::max(rep.asymptote_peak_pow, 0.1),
                                    1.0 / np);
    double lo = 0.7 * c_guess, hi = 1.4 * c_guess;
    for (int k = 0; defect(lo) <= 0.0; ++k) {
        if (k >= 50)
            throw std::runtime_error("build_test_function: no lower bracket");
        lo *= 0.7;
    }
    for (int k = 0; defect(hi) >= 0.0; ++k) {
        if (k >= 50)
            throw std::runtime_error("build_test_function: no upper bracket");
        hi *= 1.4;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (defect(mid) > 0.0 ? lo : hi) = mid;
    }
    const double c = 0.5 * (lo + hi);
    rep.peak = c;
    rep.peak_pow = std::pow(c, np);
    rep.shift = shift_of(c);
    rep.norm = std::pow(defect(c) + 1.0, 1.0 / n);

    // All-quadrature cross-check of the norm (no closed-form Dirichlet).
    {
        const double grad_inner =
            omega * std::pow(c, -np)
            * quad::adaptive(
                  [&](double r) {
                      const double sl = bubble.slope(r / cutoff) / cutoff;
                      return std::pow(std::abs(sl), double(n))
                           * std::pow(r, n - 1.0);
                  },
                  1e-12 * a, a, 1e-11, 0.0)
                  .value;
        rep.norm_quadrature = std::pow(
            grad_inner + std::pow(c, -np) * outer.energy
                + params.tau * mass_inner(c),
            1.0 / n);
    }

    // Functional value: concentrated core (weight removed by r = y^{1/(1-beta)}),
    // sampled midrange, fitted exponential tail.
    const auto phi = inner_of(c, rep.shift);
    auto zeta_of = [&](double v) {
        return zeta(n, growth * std::pow(std::abs(v), np));
    };
    const double omb = 1.0 - params.beta;
    const double core =
        omega / omb
        * quad::adaptive(
              [&](double y) {
                  return std::pow(y, n - 1.0)
                       * zeta_of(phi(std::pow(y, 1.0 / omb)));
              },
              0.0, std::pow(a, omb), 1e-12, 0.0)
              .value;
    const double lift = std::pow(c, -1.0 / (n - 1));
    const double mid =
        omega
        * quad::adaptive(
              [&](double r) {
                  return zeta_of(lift * green.value_at(r))
                       * std::pow(r, n - 1.0 - n * params.beta);
              },
              a, green.r_max, 1e-10, 0.0)
              .value;
    const TailFit tail = fit_tail(green);
    const double far =
        omega
        * quad::adaptive(
              [&](double r) {
                  return zeta_of(lift * tail.coeff * std::exp(-tail.rate * r))
                       * std::pow(r, n - 1.0 - n * params.beta);
              },
              green.r_max, green.r_max + 45.0 / tail.rate, 1e-10, 0.0)
              .value;
    rep.value = core + mid + far;
    rep.threshold = critical_threshold(params, a0.value);
    rep.gap = rep.value - rep.threshold;
    rep.predicted_correction = std::pow(growth, n - 1) / factorial(n - 1)
                             / rep.peak_pow * outer.weighted_power;
    rep.saturated = !std::isfinite(rep.value) || !std::isfinite(rep.norm);
    return rep;
}

GapSweep verify_critical_gap(const std::vector<double>& cutoffs,
                             const ModelParams& params,
                             const GreenProfile& green)
{
    if (cutoffs.size() < 2)
        throw std::invalid_argument("verify_critical_gap: need two cutoffs");
    GapSweep sweep;
    sweep.expected_rate = BubbleProfile(params.dim, params.beta).radial_power();
    sweep.gaps_positive = true;
    double sx = 0, sy_b = 0, sy_c = 0, sxx = 0, sxy_b = 0, sxy_c = 0;
    for (double eps : cutoffs) {
        TestFunctionReport rep = build_test_function(eps, params, green);
        const double x = std::log(rep.window);
        const double yb = std::log(std::abs(rep.shift - rep.asymptote_shift));
        const double yc = std::log(std::abs(rep.peak_pow - rep.asymptote_peak_pow));
        sx += x;
        sxx += x * x;
        sy_b += yb;
        sy_c += yc;
        sxy_b += x * yb;
        sxy_c += x * yc;
        sweep.gaps_positive = sweep.gaps_positive && rep.gap > 0.0;
        sweep.points.push_back(std::move(rep));
    }
    const double m = double(sweep.points.size());
    const double det = m * sxx - sx * sx;
    sweep.shift_rate = -(m * sxy_b - sx * sy_b) / det;
    sweep.peak_rate = -(m * sxy_c - sx * sy_c) / det;
    return sweep;
}

}  // namespace stm
