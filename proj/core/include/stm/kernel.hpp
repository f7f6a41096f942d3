/// \file kernel.hpp
/// Model parameters and closed-form constants for the weighted
/// exponential-growth variational problem on R^N, together with the
/// truncated-exponential special function and the explicit concentration
/// (bubble) profile that governs the blow-up regime.
#pragma once

#include <stdexcept>

namespace stm {

/// Parameter pack shared by every module.
///
/// dim   N >= 2          ambient dimension
/// beta  0 < beta < 1    strength of the |x|^{-N beta} weight
/// tau   tau > 0         coefficient of the zeroth-order norm term
/// eps   0 <= eps < 1-beta  subcriticality margin (0 = critical problem)
struct ModelParams {
    int dim;
    double beta;
    double tau;
    double eps;

    ModelParams(int dim_, double beta_, double tau_, double eps_ = 0.0)
        : dim(dim_), beta(beta_), tau(tau_), eps(eps_)
    {
        if (dim < 2)
            throw std::invalid_argument("ModelParams: dim must be >= 2");
        if (!(beta > 0.0 && beta < 1.0))
            throw std::invalid_argument("ModelParams: beta must lie in (0,1)");
        if (!(tau > 0.0))
            throw std::invalid_argument("ModelParams: tau must be positive");
        if (!(eps >= 0.0 && eps < 1.0 - beta))
            throw std::invalid_argument("ModelParams: eps must lie in [0, 1-beta)");
    }

    /// Surface measure of the unit sphere S^{N-1}.
    double sphere() const;

    /// Sharp growth exponent N * sphere()^{1/(N-1)}; the borderline
    /// coefficient for exponential integrability of unit-norm functions.
    double sharp_exponent() const;

    /// Subcritical growth coefficient sharp_exponent() * (1 - beta - eps):
    /// the factor multiplying |u|^{N/(N-1)} inside the functional.
    double growth_coefficient() const;

    /// Coefficient inside the bubble logarithm; satisfies
    /// sphere() / (N (1-beta)) * bubble_coefficient()^{-(N-1)} = 1 exactly.
    double bubble_coefficient() const;
};

/// Surface measure of S^{n-1}: 2 pi^{n/2} / Gamma(n/2), with the
/// half-integer Gamma evaluated by closed form (no lgamma round-trip).
double sphere_area(int n);

/// Harmonic sum H_m = 1 + 1/2 + ... + 1/m (H_0 = 0).
double harmonic(int m);

/// Truncated exponential zeta(n, s) = e^s - sum_{k=0}^{n-2} s^k/k!
///                                  = sum_{k>=n-1} s^k/k!,  s >= 0, n >= 1.
/// Small arguments (s < n/2) use the tail series so the result keeps full
/// relative precision; large arguments subtract the finite sum from e^s.
/// Returns +infinity when e^s overflows (callers treat that as saturation
/// and switch to the log-domain path).
double zeta(int n, double s);

/// log(zeta(n, s)), finite for all s > 0 including where zeta overflows.
double log_zeta(int n, double s);

/// Sharp limit constant of concentrating families on the unit ball:
/// sphere_area(n)/n * exp(harmonic(n-1)).
double carleson_chang_const(int n);

/// Upper bound for the critical supremum: the Carleson-Chang constant
/// scaled by 1/(1-beta) and by exp(sharp_exponent * (1-beta) * a0), where
/// a0 is the additive constant of the Green function at the origin.
/// Ignores params.eps (the threshold belongs to the critical problem).
double critical_threshold(const ModelParams& params, double a0);

/// Explicit radial concentration profile
///   value(r) = -(N-1)/(alpha (1-beta)) * log(1 + c r^{N(1-beta)/(N-1)}),
/// the limit shape of rescaled maximizers.  value(0) = 0, decreasing.
class BubbleProfile {
public:
    BubbleProfile(int dim, double beta);
    explicit BubbleProfile(const ModelParams& params)
        : BubbleProfile(params.dim, params.beta) {}

    double value(double r) const;
    double slope(double r) const;  ///< d value / dr, r > 0

    int dim() const { return dim_; }
    double beta() const { return beta_; }
    /// Exponent of r inside the logarithm: N(1-beta)/(N-1).
    double radial_power() const { return power_; }
    /// Prefactor of the logarithm: (N-1)/(alpha (1-beta)).
    double log_coefficient() const { return coeff_; }
    /// Coefficient of r^{radial_power} inside the logarithm.
    double inner_coefficient() const { return inner_; }

private:
    int dim_;
    double beta_;
    double power_;
    double coeff_;
    double inner_;
};

/// Finite-difference residual of the radial bubble equation
///   d/dr[(-r f')^{N-1}] = r^{N-1-N beta} exp(alpha (1-beta) N/(N-1) f)
/// at radius r with step h (both derivatives by centered differences, so
/// the residual decays like h^2).  Requires r - 2h > 0.
double bubble_ode_residual(const BubbleProfile& profile, double r, double h);

/// Quadrature cross-check of the closed-form moment identity
///   (n-1) * integral_0^inf t^{n-2} (1+c t)^{-n} dt = c^{1-n}.
/// `quadrature` is the adaptive result (tail mapped to a finite interval
/// by t -> 1/t), `closed_form` is c^{1-n}, `error_estimate` is the
/// quadrature's own error bound.
struct IntegralCheck {
    double quadrature;
    double closed_form;
    double error_estimate;
};
IntegralCheck i_integral_check(int n, double c);

}  // namespace stm
