#include "stm/maximize.hpp"
#include "stm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace stm {

namespace {

double spow(double v, double p)  // sign(v) |v|^p
{
    return v < 0 ? -std::pow(-v, p) : std::pow(v, p);
}

// Derivative density of the objective integrand with respect to the
// profile value: d/dv zeta(N, g |v|^{N/(N-1)}) =
//   g (N/(N-1)) sign(v) |v|^{1/(N-1)} zeta(N-1, g |v|^{N/(N-1)}).
// assemble_b leaves out the leading g N/(N-1) so that b matches the
// bilinear form whose multiplier is lambda.
double b_density(double v, int n, double growth)
{
    const double av = std::abs(v);
    const double arg = growth * std::pow(av, double(n) / (n - 1));
    return spow(v, 1.0 / (n - 1)) * zeta(n - 1, arg);
}

// Shared per-cell Gauss sweep over the objective weight r^{N-1-N beta}.
// emit(cell, node_weight_0, node_weight_1, value, point_weight) is called
// once per quadrature point.
template <class Emit>
void objective_sweep(const RadialFunction& u, const ModelParams& params,
                     Emit&& emit)
{
    const RadialGrid& g = *u.grid;
    const int n = params.dim;
    const double omg = 1.0 - g.grading;
    const double sx = (n - n * params.beta) / omg - 1.0;
    for (int i = 0; i < g.cells; ++i) {
        const double s0 = g.s[i], s1 = g.s[i + 1];
        const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
        for (int q = 0; q < 4; ++q) {
            const double s = mid + half * quad::gauss4_x[q];
            const double theta = (s - s0) / (s1 - s0);
            const double v = u.values[i] + theta * (u.values[i + 1] - u.values[i]);
            const double w = quad::gauss4_w[q] * half
                           * (sx == 0.0 ? 1.0 : std::pow(s, sx))
                           * sphere_area(n) / omg;
            emit(i, 1.0 - theta, theta, v, w);
        }
    }
}

// b_j = sphere * integral u^{1/(N-1)} zeta(N-1, g u^{N/(N-1)}) phi_j
//        r^{N-1-N beta} dr with the shared Gauss rule, so sum_j v_j b_j
// is exactly the multiplier integral evaluated by the same rule.
std::vector<double> assemble_b(const RadialFunction& u, const ModelParams& params)
{
    std::vector<double> b(u.values.size(), 0.0);
    const double growth = params.growth_coefficient();
    objective_sweep(u, params,
                    [&](int i, double w0, double w1, double v, double w) {
                        const double d = b_density(v, params.dim, growth) * w;
                        b[i] += d * w0;
                        b[i + 1] += d * w1;
                    });
    return b;
}

// a_j = a(u, phi_j): exact derivative of norm^N / N in the nodal values.
// Gradient part is closed form per cell; the tau-mass part reuses the
// same Gauss rule as sobolev_norm so the pairing stays an exact gradient.
std::vector<double> assemble_a(const RadialFunction& u, const ModelParams& params)
{
    const RadialGrid& g = *u.grid;
    const int n = params.dim;
    const double omg = 1.0 - g.grading;
    std::vector<double> a(u.values.size(), 0.0);
    const double dir_coeff = sphere_area(n) * std::pow(omg, n - 1) / n;
    for (int i = 0; i < g.cells; ++i) {
        const double ds = g.s[i + 1] - g.s[i];
        const double m = (u.values[i + 1] - u.values[i]) / ds;
        const double dS = std::pow(g.s[i + 1], n) - std::pow(g.s[i], n);
        const double p = dir_coeff * dS * spow(m, n - 1.0) / ds;
        a[i] -= p;
        a[i + 1] += p;
    }
    const double sx = double(n) / omg - 1.0;  // weight r^{N-1}
    for (int i = 0; i < g.cells; ++i) {
        const double s0 = g.s[i], s1 = g.s[i + 1];
        const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
        for (int q = 0; q < 4; ++q) {
            const double s = mid + half * quad::gauss4_x[q];
            const double theta = (s - s0) / (s1 - s0);
            const double v = u.values[i] + theta * (u.values[i + 1] - u.values[i]);
            const double w = quad::gauss4_w[q] * half * std::pow(s, sx)
                           * sphere_area(n) / omg;
            const double d = params.tau * spow(v, n - 1.0) * w;
            a[i] += d * (1.0 - theta);
            a[i + 1] += d * theta;
        }
    }
    return a;
}

// norm of the hat function at node j (for residual scaling).
double hat_norm(const RadialGrid& g, int j, const ModelParams& params)
{
    const int n = params.dim;
    const double omg = 1.0 - g.grading;
    double dir = 0.0, mass = 0.0;
    const double sx = double(n) / omg - 1.0;
    for (int i = std::max(j - 1, 0); i <= std::min(j, g.cells - 1); ++i) {
        const double ds = g.s[i + 1] - g.s[i];
        const double dS = std::pow(g.s[i + 1], n) - std::pow(g.s[i], n);
        dir += dS / std::pow(ds, n);
        const double s0 = g.s[i], s1 = g.s[i + 1];
        const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
        for (int q = 0; q < 4; ++q) {
            const double s = mid + half * quad::gauss4_x[q];
            const double theta = (s - s0) / (s1 - s0);
            const double phi = (i == j) ? 1.0 - theta : theta;
            mass += quad::gauss4_w[q] * half * std::pow(s, sx)
                  * std::pow(phi, n);
        }
    }
    const double total = sphere_area(n)
                       * (std::pow(omg, n - 1) * dir / n + params.tau * mass / omg);
    return std::pow(total, 1.0 / n);
}

// Feasibility projection: decreasing rearrangement, Dirichlet pin at the
// outer boundary, renormalization.  Returns an empty optional-like flag
// through the norm: callers skip trials whose norm vanishes or overflows.
bool project(const ModelParams& params, RadialFunction& u)
{
    u = rearrange_decreasing(u, params.dim);
    u.values.back() = 0.0;
    const double norm = sobolev_norm(u, params);
    if (!(norm > 0.0) || !std::isfinite(norm))
        return false;
    for (double& v : u.values)
        v /= norm;
    return true;
}

// Lagged-diffusivity SPD approximation of the norm's second variation:
// tridiagonal stiffness (N-1)|u'|^{N-2} plus tau (N-1)|u|^{N-2} mass,
// regularized by precond_floor times the largest diagonal entry.  For
// N = 2 this is the exact H^1_tau Riesz map on the mesh.
struct Tridiag {
    std::vector<double> diag, off;  // off[i] couples node i and i+1

    std::vector<double> solve(std::vector<double> rhs) const
    {
        const size_t m = diag.size();
        std::vector<double> c(m, 0.0);
        std::vector<double> d = std::move(rhs);
        double piv = diag[0];
        c[0] = off[0] / piv;
        d[0] /= piv;
        for (size_t i = 1; i < m; ++i) {
            piv = diag[i] - off[i - 1] * c[i - 1];
            if (i < m - 1)
                c[i] = off[i] / piv;
            d[i] = (d[i] - off[i - 1] * d[i - 1]) / piv;
        }
        for (size_t i = m - 1; i-- > 0;)
            d[i] -= c[i] * d[i + 1];
        return d;
    }
};

Tridiag assemble_preconditioner(const RadialFunction& u,
                                const ModelParams& params, double floor)
{
    const RadialGrid& g = *u.grid;
    const int n = params.dim;
    const double omg = 1.0 - g.grading;
    Tridiag t;
    t.diag.assign(u.values.size(), 0.0);
    t.off.assign(u.values.size() - 1, 0.0);
    const double dir_coeff = sphere_area(n) * std::pow(omg, n - 1) / n;
    for (int i = 0; i < g.cells; ++i) {
        const double ds = g.s[i + 1] - g.s[i];
        const double m = (u.values[i + 1] - u.values[i]) / ds;
        const double dS = std::pow(g.s[i + 1], n) - std::pow(g.s[i], n);
        const double k = dir_coeff * dS * (n - 1)
                       * std::pow(std::abs(m), n - 2.0) / (ds * ds);
        t.diag[i] += k;
        t.diag[i + 1] += k;
        t.off[i] -= k;
    }
    const double sx = double(n) / omg - 1.0;
    for (int i = 0; i < g.cells; ++i) {
        const double s0 = g.s[i], s1 = g.s[i + 1];
        const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
        for (int q = 0; q < 4; ++q) {
            const double s = mid + half * quad::gauss4_x[q];
            const double theta = (s - s0) / (s1 - s0);
            const double v = u.values[i] + theta * (u.values[i + 1] - u.values[i]);
            const double w = quad::gauss4_w[q] * half * std::pow(s, sx)
                           * sphere_area(n) / omg * params.tau * (n - 1)
                           * std::pow(std::abs(v), n - 2.0);
            t.diag[i] += w * (1.0 - theta) * (1.0 - theta);
            t.diag[i + 1] += w * theta * theta;
            t.off[i] += w * theta * (1.0 - theta);
        }
    }
    const double top = *std::max_element(t.diag.begin(), t.diag.end());
    for (double& d : t.diag)
        d += floor * top;
    // Dirichlet pin at the outer boundary node.
    t.diag.back() = 1.0;
    t.off.back() = 0.0;
    return t;
}

}  // namespace

double functional(const RadialFunction& u, const ModelParams& params)
{
    const double growth = params.growth_coefficient();
    const int n = params.dim;
    return weighted_integral(
        u, n - 1 - n * params.beta, n, [&](double, double v) {
            return zeta(n, growth * std::pow(std::abs(v), double(n) / (n - 1)));
        });
}

RadialFunction functional_gradient(const RadialFunction& u,
                                   const ModelParams& params)
{
    std::vector<double> b = assemble_b(u, params);
    const double scale = params.growth_coefficient() * params.dim
                       / (params.dim - 1.0);
    for (double& v : b)
        v *= scale;
    return RadialFunction(u.grid, std::move(b), false);
}

double el_multiplier(const RadialFunction& u, const ModelParams& params)
{
    const double growth = params.growth_coefficient();
    const int n = params.dim;
    return weighted_integral(
        u, n - 1 - n * params.beta, n, [&](double, double v) {
            const double pw = std::pow(std::abs(v), double(n) / (n - 1));
            return pw * zeta(n - 1, growth * pw);
        });
}

double el_residual(const RadialFunction& u, double lag,
                   const ModelParams& params)
{
    if (!(lag > 0.0))
        throw std::invalid_argument("el_residual: lag must be positive");
    const std::vector<double> a = assemble_a(u, params);
    const std::vector<double> b = assemble_b(u, params);
    double worst = 0.0;
    for (size_t j = 0; j + 1 < a.size(); ++j) {
        const double r = std::abs(a[j] - b[j] / lag)
                       / hat_norm(*u.grid, int(j), params);
        worst = std::max(worst, r);
    }
    return worst;
}

namespace {

// Contracted multiplier sum_j u_j b_j: identical to el_multiplier up to
// round-off (same quadrature rule), and the value that makes the discrete
// optimality system a_j = b_j / lambda exact at its fixed point.
double contracted_multiplier(const RadialFunction& u,
                             const std::vector<double>& b)
{
    double lambda = 0.0;
    for (size_t j = 0; j < b.size(); ++j)
        lambda += u.values[j] * b[j];
    return lambda;
}

// One Kacanov step: solve A(u) w = b(u) with the frozen-coefficient
// quasilinear operator of the norm (exactly the preconditioner without
// the (N-1) linearization factors), then project back to the feasible
// set. Near the maximizer this is a contraction whose fixed point solves
// the discrete Euler-Lagrange system exactly.
bool polish_step(const ModelParams& params, RadialFunction& u)
{
    const RadialGrid& g = *u.grid;
    const int n = params.dim;
    const double omg = 1.0 - g.grading;
    Tridiag op;
    op.diag.assign(u.values.size(), 0.0);
    op.off.assign(u.values.size() - 1, 0.0);
    const double dir_coeff = sphere_area(n) * std::pow(omg, n - 1) / n;
    for (int i = 0; i < g.cells; ++i) {
        const double ds = g.s[i + 1] - g.s[i];
        const double m = (u.values[i + 1] - u.values[i]) / ds;
        const double dS = std::pow(g.s[i + 1], n) - std::pow(g.s[i], n);
        const double k = dir_coeff * dS * std::pow(std::abs(m), n - 2.0)
                       / (ds * ds);
        op.diag[i] += k;
        op.diag[i + 1] += k;
        op.off[i] -= k;
    }
    const double sx = double(n) / omg - 1.0;
    for (int i = 0; i < g.cells; ++i) {
        const double s0 = g.s[i], s1 = g.s[i + 1];
        const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
        for (int q = 0; q < 4; ++q) {
            const double s = mid + half * quad::gauss4_x[q];
            const double theta = (s - s0) / (s1 - s0);
            const double v = u.values[i] + theta * (u.values[i + 1] - u.values[i]);
            const double w = quad::gauss4_w[q] * half * std::pow(s, sx)
                           * sphere_area(n) / omg * params.tau
                           * std::pow(std::abs(v), n - 2.0);
            op.diag[i] += w * (1.0 - theta) * (1.0 - theta);
            op.diag[i + 1] += w * theta * theta;
            op.off[i] += w * theta * (1.0 - theta);
        }
    }
    const double top = *std::max_element(op.diag.begin(), op.diag.end());
    for (double& d : op.diag)
        d += 1e-14 * top;
    op.diag.back() = 1.0;
    op.off.back() = 0.0;

    std::vector<double> rhs = assemble_b(u, params);
    rhs.back() = 0.0;
    RadialFunction next(u.grid, op.solve(std::move(rhs)), false);
    if (!project(params, next))
        return false;
    u = std::move(next);
    return true;
}

}  // namespace

static MaximizerResult run_ascent(const ModelParams& params, RadialFunction u,
                                  const MaximizeOptions& opt)
{
    if (u.grid->grading != params.beta)
        throw std::invalid_argument(
            "maximize_subcritical: grid grading must match params.beta");
    if (!(params.eps > 0.0))
        throw std::invalid_argument(
            "maximize_subcritical: eps must be positive (the supremum is "
            "attained only strictly below the critical exponent)");
    MaximizerResult res;
    if (!project(params, u)) {
        res.profile = u;
        res.saturated = true;
        return res;
    }
    double value = functional(u, params);
    if (!std::isfinite(value)) {
        res.profile = u;
        res.value = value;
        res.saturated = true;
        return res;
    }

    int stall = 0;
    int iter = 0;
    for (; iter < opt.max_iters; ++iter) {
        const RadialFunction grad = functional_gradient(u, params);
        Tridiag pre = assemble_preconditioner(u, params, opt.precond_floor);
        std::vector<double> rhs = grad.values;
        rhs.back() = 0.0;
        const std::vector<double> dir = pre.solve(std::move(rhs));

        double step = opt.step0;
        bool accepted = false;
        for (int h = 0; h <= opt.max_halvings; ++h, step *= opt.shrink) {
            RadialFunction trial = u;
            for (size_t j = 0; j < trial.values.size(); ++j)
                trial.values[j] += step * dir[j];
            trial.decreasing = false;
            if (!project(params, trial))
                continue;
            const double tv = functional(trial, params);
            if (std::isfinite(tv) && tv > value) {
                const double rel = (tv - value) / std::max(std::abs(tv), 1e-300);
                u = std::move(trial);
                value = tv;
                accepted = true;
                stall = rel < opt.rel_tol ? stall + 1 : 0;
                break;
            }
        }
        if (!accepted || stall >= opt.stall_iters) {
            res.converged = true;
            ++iter;
            break;
        }
    }

    // Ascent resolves the maximizer up to the precision of objective
    // differences; the fixed-point polish removes that last layer.
    auto residual_of = [&](const RadialFunction& w) {
        return el_residual(w, contracted_multiplier(w, assemble_b(w, params)),
                           params);
    };
    RadialFunction best = u;
    double best_res = residual_of(u);
    int setbacks = 0;
    for (int k = 0; k < opt.polish_iters && setbacks < 3; ++k) {
        if (!polish_step(params, u))
            break;
        const double r = residual_of(u);
        if (r < best_res) {
            best = u;
            best_res = r;
            setbacks = 0;
        } else {
            ++setbacks;
        }
    }
    // Accept the polished point unless it lost objective value beyond
    // stagnation precision (an objective dip below that is round-off).
    const double polished = functional(best, params);
    if (std::isfinite(polished)
        && polished >= value - 1e-9 * std::abs(value)) {
        u = std::move(best);
        value = polished;
    }

    res.profile = u;
    res.value = value;
    res.multiplier = el_multiplier(u, params);
    res.peak = u.values.front();
    res.el_residual = el_residual(u, res.multiplier, params);
    res.iterations = iter;
    return res;
}

MaximizerResult maximize_subcritical(const ModelParams& params,
                                     std::shared_ptr<const RadialGrid> grid,
                                     const MaximizeOptions& opt)
{
    std::vector<double> v(grid->r.size());
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = 1.0 - grid->s[i] / grid->s_max;
    if (opt.seed != 0) {
        std::mt19937 gen(opt.seed);
        std::uniform_real_distribution<double> jig(-0.25, 0.25);
        for (size_t i = 0; i + 1 < v.size(); ++i)
            v[i] *= 1.0 + jig(gen);
    }
    return run_ascent(params, RadialFunction(std::move(grid), std::move(v)), opt);
}

MaximizerResult maximize_subcritical(const ModelParams& params,
                                     const RadialFunction& start,
                                     const MaximizeOptions& opt)
{
    return run_ascent(params, start, opt);
}

BlowupDiagnostics blowup_diagnostics(const MaximizerResult& result,
                                     const ModelParams& params, double window,
                                     int window_cells)
{
    if (!result.converged || result.profile.values.empty())
        throw std::invalid_argument(
            "blowup_diagnostics: requires a converged maximizer");
    const int n = params.dim;
    const double growth = params.growth_coefficient();
    BlowupDiagnostics d;
    const double c = result.peak;
    const double cpow = std::pow(c, double(n) / (n - 1));
    d.r_eps = std::pow(result.multiplier, 1.0 / n)
            * std::pow(c, -1.0 / (n - 1.0)) * std::exp(-growth * cpow / n);
    d.ratio = result.multiplier / cpow;

    const double rho = std::pow(d.r_eps, 1.0 / (1.0 - params.beta));
    if (!(rho * window <= result.profile.grid->r_max))
        throw std::domain_error(
            "blowup_diagnostics: rescaled window exceeds the grid support");
    const BubbleProfile bubble(n, params.beta);
    const double lift = std::pow(c, 1.0 / (n - 1.0));
    auto wg = make_grid(window, window_cells, params.beta);
    std::vector<double> v(wg->r.size());
    double worst = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        const double x = wg->r[i];
        v[i] = lift * (result.profile(rho * x) - c);
        worst = std::max(worst, std::abs(v[i] - bubble.value(x)));
    }
    d.rescaled_profile = RadialFunction(std::move(wg), std::move(v), false);
    d.bubble_distance = worst;
    return d;
}

}  // namespace stm
