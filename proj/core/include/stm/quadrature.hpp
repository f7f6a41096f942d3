/// \file quadrature.hpp
/// One-dimensional quadrature helpers: a 15-point Gauss-Kronrod rule with
/// embedded 7-point Gauss error estimate, an adaptive bisection driver, and
/// the fixed 4-point Gauss-Legendre rule used for per-cell integration on
/// radial grids.
#pragma once

#include <cmath>

namespace stm::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;       ///< estimated absolute error
    int evaluations = 0;
    bool converged = true;
};

namespace detail {
// Gauss-Kronrod 7/15 abscissae and weights on [-1,1] (positive half).
inline constexpr double kx[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kw[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
// 7-point Gauss weights matching kx[1], kx[3], kx[5], kx[7].
inline constexpr double gw[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};
}  // namespace detail

/// Single Gauss-Kronrod 7/15 panel on [a,b].
template <class F>
Result gk15(F&& f, double a, double b)
{
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = detail::kx[i];
        if (i == 7) {
            const double fv = f(c);
            kron += detail::kw[i] * fv;
            gauss += detail::gw[3] * fv;
        } else {
            const double fv = f(c - h * x) + f(c + h * x);
            kron += detail::kw[i] * fv;
            if (i % 2 == 1)
                gauss += detail::gw[i / 2] * fv;
        }
    }
    Result res;
    res.value = kron * h;
    res.error = std::abs((kron - gauss) * h);
    res.evaluations = 15;
    return res;
}

/// Adaptive bisection on [a,b].  Each panel is accepted once its error
/// estimate drops below its length-proportional share of the global budget
/// abs_tol + rel_tol * |integral|.  Depth-first with an explicit stack
/// (max occupancy = max_depth + 1); panels that hit the depth cap clear
/// the `converged` flag but still contribute their best estimate.
template <class F>
Result adaptive(F&& f, double a, double b, double rel_tol = 1e-12,
                double abs_tol = 0.0, int max_depth = 48)
{
    Result whole = gk15(f, a, b);
    const double scale = std::abs(whole.value);
    const double budget = abs_tol + rel_tol * (scale > 0 ? scale : 1.0);

    struct Frame { double lo, hi; Result est; int depth; };
    Frame stack[64];
    if (max_depth > 60)
        max_depth = 60;
    Result total;
    total.evaluations = whole.evaluations;
    int pending = 1;
    stack[0] = {a, b, whole, 0};
    while (pending > 0) {
        const Frame fr = stack[--pending];
        const double local_tol = budget * (fr.hi - fr.lo) / (b - a)
                               + 0.25 * rel_tol * std::abs(fr.est.value);
        if (fr.est.error <= local_tol || fr.depth >= max_depth) {
            if (fr.est.error > local_tol)
                total.converged = false;
            total.value += fr.est.value;
            total.error += fr.est.error;
            continue;
        }
        const double mid = 0.5 * (fr.lo + fr.hi);
        stack[pending++] = {fr.lo, mid, gk15(f, fr.lo, mid), fr.depth + 1};
        stack[pending++] = {mid, fr.hi, gk15(f, mid, fr.hi), fr.depth + 1};
        total.evaluations += 30;
    }
    return total;
}

// 4-point Gauss-Legendre rule on [-1,1]; exact through degree 7.
inline constexpr double gauss4_x[4] = {
    -0.8611363115940526, -0.3399810435848563,
     0.3399810435848563,  0.8611363115940526};
inline constexpr double gauss4_w[4] = {
    0.34785484513745385, 0.6521451548625461,
    0.6521451548625461,  0.34785484513745385};

}  // namespace stm::quad
