/// \file green.hpp
/// Radial profile of the fundamental singular solution G of the
/// tau-perturbed N-Laplace operator: -div(|grad G|^{N-2} grad G) +
/// tau G^{N-1} = (unit point mass at 0), G > 0, G decaying at infinity.
/// Near the origin G(r) = -(N/alpha) log r + A + w(r) with alpha the sharp
/// growth exponent and w = O(r^N |log r|^{N-1}); the additive constant A
/// feeds the critical threshold.
#pragma once

#include "stm/kernel.hpp"

#include <string>
#include <vector>

namespace stm {

struct GreenOptions {
    double r_min = 1e-3;      ///< inner cutoff where the log expansion seeds
    double r_max = 12.0;      ///< outer truncation radius
    double rel_tol = 1e-10;   ///< integrator relative tolerance
    double abs_tol = 1e-12;   ///< integrator absolute tolerance
    double bracket = 5.0;     ///< initial shooting bracket [-bracket, bracket]
    int max_bracket_growth = 3;  ///< geometric expansions before giving up
    double sample_dx = 2.5e-4;   ///< spacing of stored samples in log r
};

/// Converged shooting solution sampled uniformly in x = log r.
/// flux holds q = r^{N-1} |G'|^{N-2} G' (negative for decaying profiles);
/// sphere * |q| -> 1 as r -> 0 is the unit point-mass normalization.
struct GreenProfile {
    int dim = 0;
    double tau = 0.0;
    double r_min = 0.0, r_max = 0.0;
    double additive_constant = 0.0;  ///< shooting parameter A at convergence
    std::vector<double> r;
    std::vector<double> value;       ///< G(r_i)
    std::vector<double> flux;        ///< q(r_i)

    /// Monotone cubic Hermite interpolation in x = log r (slopes from the
    /// differential equation, so interpolation error is O(dx^4)).
    double value_at(double radius) const;
    /// dG/dr recovered from the flux variable.
    double derivative_at(double radius) const;
    /// |sphere * |q(r_min)| - 1|; zero up to round-off by construction.
    double flux_residual() const;
};

GreenProfile solve_green(const ModelParams& params, const GreenOptions& opt = {});

/// Extrapolation of the additive constant to r -> 0 over a decreasing
/// radius sequence in the inner decade [r_min, 10 r_min], with remainder
/// model w = C r^N |log r|^{N-1}. `value` is the innermost pairwise
/// extrapolant, `spread` an error proxy: the span of the extrapolant
/// sequence plus the modeled bias of seeding the shot without w'(r_min),
/// `remainder_coeff` the fitted C, and `sequence_monotone` flags whether
/// the estimates approached the limit from one side.
struct AdditiveConstantFit {
    double value = 0.0;
    double spread = 0.0;
    double remainder_coeff = 0.0;
    bool sequence_monotone = true;
};
AdditiveConstantFit extract_A0(const GreenProfile& profile);

/// Exponential tail model G ~ coeff * exp(-rate * r) fitted over the last
/// portion of the profile; closes integrals beyond r_max.
struct TailFit {
    double coeff = 0.0;
    double rate = 0.0;
};
TailFit fit_tail(const GreenProfile& profile);

/// Boundary data and exterior integrals at radius a:
///   energy         = integral_{|x|>a} (|grad G|^N + tau G^N) dx
///   weighted_power = integral_{|x|>a} G^N |x|^{-N beta} dx
/// both from composite quadrature over the stored samples plus the fitted
/// exponential tail beyond r_max; tail_flagged reports a tail share above
/// five percent of either integral.
struct GreenOuterData {
    double boundary_value = 0.0;   ///< G(a)
    double boundary_flux = 0.0;    ///< q(a)
    double energy = 0.0;
    double weighted_power = 0.0;
    double tail_fraction = 0.0;
    bool tail_flagged = false;
};
GreenOuterData green_outer_data(const GreenProfile& profile, double a,
                                const ModelParams& params);

/// Three-column CSV `r,G,q` with a `# key=value` header (N, tau, r_min,
/// r_max, additive constant); same shortest round-trip format as radial
/// profiles.
void save_green_csv(const std::string& path, const GreenProfile& profile);

}  // namespace stm
