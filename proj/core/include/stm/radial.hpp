/// \file radial.hpp
/// Discrete radial profiles: a grid graded to absorb the |x|^{-N beta}
/// weight, piecewise-linear functions on it, weighted quadrature, the
/// Sobolev-type norm, decreasing rearrangement, the weight-removing change
/// of variables, and CSV round-tripping.
#pragma once

#include "stm/kernel.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

namespace stm {

/// Radial mesh on [0, r_max] with nodes uniform in the auxiliary
/// coordinate s = r^{1-grading}; node i of `cells` cells sits at
/// r_i = (i * s_max/cells)^{1/(1-grading)}, so r_0 = 0 exactly and the
/// mesh concentrates at the origin exactly strongly enough to turn the
/// weight r^{N-1-N beta} into the polynomial s^{N-1} when grading = beta.
/// grading = 0 gives a uniform mesh.
struct RadialGrid {
    double r_max;
    int cells;
    double grading;
    double s_max;           ///< r_max^{1-grading}
    std::vector<double> s;  ///< uniform, size cells+1, s[0] = 0
    std::vector<double> r;  ///< s[i]^{1/(1-grading)}

    int nodes() const { return int(r.size()); }
    /// Map a radius into the auxiliary coordinate.
    double to_s(double radius) const;
    /// Inverse map.
    double to_r(double coord) const;
};

/// Build a grid; requires r_max > 0, cells >= 16, 0 <= grading < 1.
std::shared_ptr<const RadialGrid> make_grid(double r_max, int cells,
                                            double grading);

/// Nodal values on a shared grid, interpolated linearly in s between
/// nodes and treated as 0 beyond r_max.  `decreasing` is a certificate
/// set by the operations that guarantee it, never inferred.
struct RadialFunction {
    std::shared_ptr<const RadialGrid> grid;
    std::vector<double> values;
    bool decreasing = false;

    RadialFunction() = default;
    RadialFunction(std::shared_ptr<const RadialGrid> g, std::vector<double> v,
                   bool dec = false);

    double operator()(double radius) const;
    int nodes() const { return int(values.size()); }
};

/// Sample an arbitrary callable onto a grid.
template <class F>
RadialFunction sample(std::shared_ptr<const RadialGrid> grid, F&& f,
                      bool decreasing = false)
{
    std::vector<double> v(grid->r.size());
    for (size_t i = 0; i < grid->r.size(); ++i)
        v[i] = f(grid->r[i]);
    return RadialFunction(std::move(grid), std::move(v), decreasing);
}

/// sphere_area(n) * integral_0^{r_max} f(r, u(r)) r^{weight_exponent} dr,
/// evaluated cell by cell with 4-point Gauss in the s coordinate (the
/// substitution makes the weight r^{n-1-n*grading} polynomial in s, so
/// the origin singularity never appears at a quadrature point).
/// Requires weight_exponent > -1.
double weighted_integral(const RadialFunction& u, double weight_exponent,
                         int n, double (*f)(double r, double value, void* ctx),
                         void* ctx);

/// Convenience overload for callables.
template <class F>
double weighted_integral(const RadialFunction& u, double weight_exponent,
                         int n, F&& f)
{
    using Fn = std::remove_reference_t<F>;
    struct Thunk {
        static double call(double r, double v, void* ctx)
        {
            return (*static_cast<Fn*>(ctx))(r, v);
        }
    };
    return weighted_integral(u, weight_exponent, n, &Thunk::call,
                             const_cast<void*>(static_cast<const void*>(&f)));
}

/// ( sphere * integral (|u'|^N + tau |u|^N) r^{N-1} dr )^{1/N}.
/// The gradient part is exact for the piecewise-linear representation
/// (closed form per cell); the mass part uses the shared Gauss rule.
double sobolev_norm(const RadialFunction& u, const ModelParams& params);

/// N-dimensional volume |{ |u| > level }| / (sphere/n), i.e. measured in
/// units of r^n.  Exact for the piecewise-linear representation.
double distribution_volume(const RadialFunction& u, int n, double level);

/// Decreasing rearrangement with respect to N-dimensional volume:
/// equimeasurable with |u|, nonincreasing, same grid.  Nodal values solve
/// distribution_volume(u, n, t) = r_j^n exactly (up to bisection), so an
/// already-decreasing nonnegative input is reproduced to round-off.
/// Cost scales with nodes x monotone runs; radially organized profiles
/// (few runs) rearrange in linear-ish time, while a profile that
/// oscillates in every cell pays the quadratic worst case.
RadialFunction rearrange_decreasing(const RadialFunction& u, int n);

/// Weight-removing change of variables: given w on [0, r_max] vanishing
/// at r_max, returns v(x) = (1-beta)^{(N-1)/N} w(|x|^{1/(1-beta)}) on
/// [0, r_max^{1-beta}] over a uniform grid with the same cell count.
/// Preserves the Dirichlet N-energy exactly (also at the discrete level)
/// and turns the beta-weighted growth functional of w into (1-beta)^{-1}
/// times the unweighted one of v.  Requires w.grid->grading == params.beta
/// and |w(r_max)| <= support_tol * max|w|.
RadialFunction desingularize(const RadialFunction& w, const ModelParams& params,
                             double support_tol = 1e-9);

/// Two-column CSV `r,value` preceded by one `# key=value ...` header line
/// carrying N, beta, tau, eps, grading, r_max and the cell count.  Values
/// are written in shortest round-trip form, so save -> load -> save is
/// byte-identical.
void save_csv(std::ostream& os, const RadialFunction& u,
              const ModelParams& params);
void save_csv(const std::string& path, const RadialFunction& u,
              const ModelParams& params);

struct LoadedProfile {
    RadialFunction profile;
    ModelParams params;
};
LoadedProfile load_csv(std::istream& is);
LoadedProfile load_csv(const std::string& path);

}  // namespace stm
