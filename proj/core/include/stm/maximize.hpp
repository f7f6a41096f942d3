/// \file maximize.hpp
/// Subcritical maximization: over radial profiles with unit norm
/// (integral |grad u|^N + tau u^N)^{1/N} = 1, maximize
///   J(u) = sphere * integral zeta(N, g u^{N/(N-1)}) r^{N-1-N beta} dr,
/// g = growth_coefficient(). For eps > 0 the supremum is attained; the
/// maximizer satisfies a quasilinear Euler-Lagrange equation whose
/// multiplier and residual are exposed for verification. Ascent is
/// projected (decreasing rearrangement + renormalization keep iterates
/// feasible) and preconditioned with the lagged-diffusivity linearization
/// of the norm's energy; once it stagnates, a fixed-point polish of the
/// discrete optimality system drives the stationarity defect toward
/// round-off.
#pragma once

#include "stm/kernel.hpp"
#include "stm/radial.hpp"

#include <memory>

namespace stm {

struct MaximizeOptions {
    int max_iters = 2000;
    double step0 = 1.0;        ///< initial Armijo step
    double shrink = 0.5;       ///< backtracking factor
    int max_halvings = 40;
    double rel_tol = 1e-9;     ///< relative objective change for stagnation
    int stall_iters = 5;       ///< consecutive stagnant iterations to stop
    unsigned seed = 0;         ///< perturbs the default start (0 = plain)
    double precond_floor = 1e-8;  ///< diagonal regularization scale
    int polish_iters = 60;     ///< fixed-point refinements after the ascent
};

struct MaximizerResult {
    RadialFunction profile;    ///< feasible maximizer, decreasing, unit norm
    double value = 0.0;        ///< J at the maximizer
    double multiplier = 0.0;   ///< Euler-Lagrange multiplier lambda
    double peak = 0.0;         ///< u(0)
    double el_residual = 0.0;  ///< scaled stationarity defect, see el_residual()
    int iterations = 0;
    bool converged = false;
    bool saturated = false;    ///< objective overflowed during evaluation
};

/// J(u); +infinity when the exponential overflows (saturation).
double functional(const RadialFunction& u, const ModelParams& params);

/// Exact derivative of the discrete J with respect to nodal values
/// (same per-cell quadrature as functional()), returned on u's grid.
/// The boundary node is part of the derivative; the solver pins it.
RadialFunction functional_gradient(const RadialFunction& u,
                                   const ModelParams& params);

/// lambda = sphere * integral u^{N/(N-1)} zeta(N-1, g u^{N/(N-1)})
///          r^{N-1-N beta} dr,
/// the multiplier turning the Euler-Lagrange equation into
/// a(u, phi) = b(u, phi) / lambda for every test function phi.
double el_multiplier(const RadialFunction& u, const ModelParams& params);

/// max_j |a(u, phi_j) - b(u, phi_j)/lag| / norm(phi_j) over interior hat
/// functions phi_j; a is the quasilinear form of the norm, b the
/// derivative form of the objective. Vanishes at the discrete optimum
/// when lag is the multiplier of el_multiplier().
double el_residual(const RadialFunction& u, double lag,
                   const ModelParams& params);

/// Cold start on the given grid (tent profile, optionally seed-perturbed).
/// Requires params.eps > 0 and grid grading == params.beta.
MaximizerResult maximize_subcritical(const ModelParams& params,
                                     std::shared_ptr<const RadialGrid> grid,
                                     const MaximizeOptions& opt = {});

/// Warm start from a feasible profile (renormalized copy of `start`);
/// with a maximizer for a larger eps this makes the objective sweep
/// monotone by construction.
MaximizerResult maximize_subcritical(const ModelParams& params,
                                     const RadialFunction& start,
                                     const MaximizeOptions& opt = {});

/// Concentration data of a converged maximizer: the scale
///   r_eps = multiplier^{1/N} c^{-1/(N-1)} exp(-g c^{N/(N-1)} / N),
/// with c = u(0); the profile rescaled about the peak,
///   x -> c^{1/(N-1)} (u(r_eps^{1/(1-beta)} x) - c),
/// resampled on [0, window]; its sup distance to the limiting bubble at
/// the resample nodes; and the ratio multiplier / c^{N/(N-1)}, which
/// approaches the objective value as eps -> 0.
///
/// The default window is deliberately tight: the rescaled profile
/// converges to the bubble locally uniformly from the origin outward, so
/// a tight window tracks the trend at the peak heights reachable on
/// desk-scale grids, while wide windows are dominated by the tail
/// mismatch that only vanishes at much smaller eps.
struct BlowupDiagnostics {
    double r_eps = 0.0;
    RadialFunction rescaled_profile;  ///< exactly 0 at x = 0
    double bubble_distance = 0.0;
    double ratio = 0.0;  ///< multiplier / c^{N/(N-1)}
};

/// Throws if the result is not converged or the rescaled window
/// r_eps^{1/(1-beta)} * window escapes the profile's grid support.
BlowupDiagnostics blowup_diagnostics(const MaximizerResult& result,
                                     const ModelParams& params,
                                     double window = 0.5,
                                     int window_cells = 256);

}  // namespace stm
