#include "stm/green.hpp"
#include "stm/quadrature.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace stm {

namespace {

struct State {
    double g;  // G
    double q;  // r^{N-1} |G'|^{N-2} G'
};

double spow(double v, int m)  // sign-preserving integer power
{
    return v < 0 ? -std::pow(-v, m) : std::pow(v, m);
}

struct Ode {
    int n;
    double tau;

    // In x = log r the system loses its explicit singularity:
    //   dG/dx = sign(q) |q|^{1/(N-1)},   dq/dx = tau e^{Nx} G^{N-1}.
    State rhs(double x, const State& y) const
    {
        State d;
        d.g = y.q < 0 ? -std::pow(-y.q, 1.0 / (n - 1))
                      : std::pow(y.q, 1.0 / (n - 1));
        d.q = tau * std::exp(n * x) * spow(y.g, n - 1);
        return d;
    }
};

// One Cash-Karp 4(5) step; err receives the embedded error estimate.
State ck45(const Ode& ode, double x, const State& y, double h, double* err)
{
    static constexpr double c2 = 1. / 5, c3 = 3. / 10, c4 = 3. / 5, c5 = 1.0,
                            c6 = 7. / 8;
    const State k1 = ode.rhs(x, y);
    auto at = [&](double a1, double a2, double a3, double a4, double a5,
                  const State& k2, const State& k3, const State& k4,
                  const State& k5) {
        return State{y.g + h * (a1 * k1.g + a2 * k2.g + a3 * k3.g + a4 * k4.g + a5 * k5.g),
                     y.q + h * (a1 * k1.q + a2 * k2.q + a3 * k3.q + a4 * k4.q + a5 * k5.q)};
    };
    const State z{0, 0};
    const State k2 = ode.rhs(x + c2 * h, at(1. / 5, 0, 0, 0, 0, z, z, z, z));
    const State k3 = ode.rhs(x + c3 * h, at(3. / 40, 9. / 40, 0, 0, 0, k2, z, z, z));
    const State k4 = ode.rhs(x + c4 * h, at(3. / 10, -9. / 10, 6. / 5, 0, 0, k2, k3, z, z));
    const State k5 = ode.rhs(x + c5 * h, at(-11. / 54, 5. / 2, -70. / 27, 35. / 27, 0, k2, k3, k4, z));
    const State k6 = ode.rhs(x + c6 * h,
                             at(1631. / 55296, 175. / 512, 575. / 13824,
                                44275. / 110592, 253. / 4096, k2, k3, k4, k5));
    auto comb = [&](double b1, double b3, double b4, double b5, double b6) {
        return State{y.g + h * (b1 * k1.g + b3 * k3.g + b4 * k4.g + b5 * k5.g + b6 * k6.g),
                     y.q + h * (b1 * k1.q + b3 * k3.q + b4 * k4.q + b5 * k5.q + b6 * k6.q)};
    };
    const State hi = comb(37. / 378, 250. / 621, 125. / 594, 0, 512. / 1771);
    const State lo = comb(2825. / 27648, 18575. / 48384, 13525. / 55296,
                          277. / 14336, 1. / 4);
    *err = std::max(std::abs(hi.g - lo.g), std::abs(hi.q - lo.q));
    return hi;
}

// Advance one sample interval [x, x+dx]; split in halves if the embedded
// estimate ever exceeds the tolerance (it never does at these step sizes,
// but the guard keeps the integrator honest for unusual parameters).
State advance(const Ode& ode, double x, State y, double dx, double rel_tol,
              double abs_tol)
{
    int pieces = 1;
    for (int attempt = 0; attempt < 20; ++attempt) {
        State z = y;
        double err_max = 0.0, scale = std::abs(y.g) + std::abs(y.q) + 1e-3;
        const double h = dx / pieces;
        for (int i = 0; i < pieces; ++i) {
            double err;
            z = ck45(ode, x + i * h, z, h, &err);
            err_max = std::max(err_max, err);
            scale = std::max(scale, std::abs(z.g) + std::abs(z.q));
        }
        if (err_max <= abs_tol + rel_tol * scale)
            return z;
        pieces *= 2;
    }
    throw std::runtime_error(
        "solve_green: integrator failed to reach tolerance near r = "
        + std::to_string(std::exp(x)));
}

enum class Shot { Crossed, Turned, Reached };

struct Shooter {
    Ode ode;
    double x0, dx;
    long steps;
    double g_slope;  // N/alpha: coefficient of -log r
    double rel_tol, abs_tol;

    State initial(double a) const
    {
        // Seeding with the pure logarithm makes the point-mass flux exact:
        // q = -(N/alpha)^{N-1} r^{N-1} / r^{N-1} = -1/sphere.
        State y;
        y.g = -g_slope * x0 + a;
        y.q = -std::pow(g_slope, ode.n - 1);
        return y;
    }

    Shot classify(double a) const
    {
        State y = initial(a);
        if (y.g <= 0.0)
            return Shot::Crossed;
        for (long k = 0; k < steps; ++k) {
            y = advance(ode, x0 + k * dx, y, dx, rel_tol, abs_tol);
            if (y.g <= 0.0)
                return Shot::Crossed;
            if (y.q >= 0.0)
                return Shot::Turned;
        }
        return Shot::Reached;
    }
};

double alpha_const(int n)
{
    return n * std::pow(sphere_area(n), 1.0 / (n - 1));
}

void append_num(std::string& out, double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

}  // namespace

GreenProfile solve_green(const ModelParams& params, const GreenOptions& opt)
{
    if (!(opt.r_min > 0.0) || !(opt.r_min <= 1e-3))
        throw std::invalid_argument("solve_green: r_min must lie in (0, 1e-3]");
    if (!(opt.r_max >= 10.0))
        throw std::invalid_argument("solve_green: r_max must be at least 10");

    Shooter sh;
    sh.ode = Ode{params.dim, params.tau};
    sh.x0 = std::log(opt.r_min);
    const double x1 = std::log(opt.r_max);
    sh.steps = long(std::ceil((x1 - sh.x0) / opt.sample_dx));
    sh.dx = (x1 - sh.x0) / sh.steps;
    sh.g_slope = params.dim / alpha_const(params.dim);
    sh.rel_tol = opt.rel_tol;
    sh.abs_tol = opt.abs_tol;

    // Bracket the shooting constant: too low crosses zero, too high turns
    // around and blows up.
    double lo = -opt.bracket, hi = opt.bracket;
    for (int k = 0; sh.classify(lo) != Shot::Crossed; ++k) {
        if (k >= opt.max_bracket_growth)
            throw std::runtime_error("solve_green: cannot bracket from below");
        lo *= 2.0;
    }
    for (int k = 0; sh.classify(hi) == Shot::Crossed; ++k) {
        if (k >= opt.max_bracket_growth)
            throw std::runtime_error("solve_green: cannot bracket from above");
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (sh.classify(mid) == Shot::Crossed ? lo : hi) = mid;
    }

    // Store the non-crossing endpoint. Round-off in the bisected constant
    // is amplified by the growing mode, so for very large r_max the last
    // stretch of the trajectory can turn around; recording stops at that
    // event and the stored domain ends where the decaying branch is still
    // resolvable in double precision.
    GreenProfile prof;
    prof.dim = params.dim;
    prof.tau = params.tau;
    prof.r_min = opt.r_min;
    prof.additive_constant = hi;
    State y = sh.initial(hi);
    prof.r.push_back(opt.r_min);
    prof.value.push_back(y.g);
    prof.flux.push_back(y.q);
    for (long k = 0; k < sh.steps; ++k) {
        y = advance(sh.ode, sh.x0 + k * sh.dx, y, sh.dx, sh.rel_tol, sh.abs_tol);
        if (y.g <= 0.0 || y.q >= 0.0)
            break;
        prof.r.push_back(std::exp(sh.x0 + (k + 1) * sh.dx));
        prof.value.push_back(y.g);
        prof.flux.push_back(y.q);
    }
    if (prof.r.size() < 16)
        throw std::runtime_error("solve_green: trajectory lost before r_max");
    if (prof.r.size() == size_t(sh.steps) + 1)
        prof.r.back() = opt.r_max;
    prof.r_max = prof.r.back();
    return prof;
}

double GreenProfile::value_at(double radius) const
{
    if (!(radius >= r_min && radius <= r_max))
        throw std::domain_error("GreenProfile::value_at: radius out of range");
    const double x0 = std::log(r_min), x1 = std::log(r_max);
    const double dx = (x1 - x0) / (r.size() - 1);
    const double x = std::log(radius);
    size_t i = std::min(size_t((x - x0) / dx), r.size() - 2);
    const double t = (x - (x0 + i * dx)) / dx;
    // Hermite basis with dG/dx = sign(q)|q|^{1/(N-1)} known at both ends.
    auto slope = [&](size_t k) {
        const double q = flux[k];
        return q < 0 ? -std::pow(-q, 1.0 / (dim - 1))
                     : std::pow(q, 1.0 / (dim - 1));
    };
    const double g0 = value[i], g1 = value[i + 1];
    const double m0 = slope(i) * dx, m1 = slope(i + 1) * dx;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * g0 + (t3 - 2 * t2 + t) * m0
         + (-2 * t3 + 3 * t2) * g1 + (t3 - t2) * m1;
}

double GreenProfile::derivative_at(double radius) const
{
    if (!(radius >= r_min && radius <= r_max))
        throw std::domain_error("GreenProfile::derivative_at: radius out of range");
    const double x0 = std::log(r_min), x1 = std::log(r_max);
    const double dx = (x1 - x0) / (r.size() - 1);
    const double x = std::log(radius);
    size_t i = std::min(size_t((x - x0) / dx), r.size() - 2);
    const double t = (x - (x0 + i * dx)) / dx;
    const double q = flux[i] + t * (flux[i + 1] - flux[i]);
    const double mag = std::pow(std::abs(q), 1.0 / (dim - 1)) / radius;
    return q < 0 ? -mag : mag;
}

double GreenProfile::flux_residual() const
{
    return std::abs(sphere_area(dim) * std::abs(flux.front()) - 1.0);
}

AdditiveConstantFit extract_A0(const GreenProfile& profile)
{
    const double slope = profile.dim / alpha_const(profile.dim);
    // Two-point extrapolation of g(r) = G(r) + (N/alpha) log r to r -> 0
    // with the remainder model m(r) = r^N |log r|^{N-1}, over a decreasing
    // radius sequence spanning the inner decade. Each consecutive pair
    // yields one estimate; the sequence's span is the error proxy.
    constexpr int points = 5;
    double g[points], m[points];
    for (int k = 0; k < points; ++k) {
        const double r = profile.r_min
                       * std::pow(10.0, double(points - 1 - k) / (points - 1));
        const double x = std::log(r);
        g[k] = profile.value_at(r) + slope * x;
        m[k] = std::exp(profile.dim * x) * std::pow(std::abs(x), profile.dim - 1);
    }
    AdditiveConstantFit out;
    double est[points - 1];
    for (int k = 0; k + 1 < points; ++k) {
        est[k] = (g[k] * m[k + 1] - g[k + 1] * m[k]) / (m[k + 1] - m[k]);
        out.remainder_coeff = (g[k] - g[k + 1]) / (m[k] - m[k + 1]);
    }
    out.value = est[points - 2];
    out.spread = *std::max_element(est, est + points - 1)
               - *std::min_element(est, est + points - 1);
    // The shot seeds G'(r_min) without the w'(r_min) term, which biases the
    // bisected constant by about N C r_min^N |log r_min|^N (one extra log
    // from the constant-extraction lever).  The extrapolant span cannot see
    // that bias, so add the modeled magnitude to the error proxy.
    const double lx = std::abs(std::log(profile.r_min));
    out.spread += profile.dim * std::abs(out.remainder_coeff)
                * std::pow(profile.r_min, profile.dim)
                * std::pow(lx, profile.dim);
    out.sequence_monotone = true;
    for (int k = 0; k + 2 < points - 1; ++k)
        if ((est[k + 1] - est[k]) * (est[k + 2] - est[k + 1]) < 0.0)
            out.sequence_monotone = false;
    return out;
}

TailFit fit_tail(const GreenProfile& profile)
{
    // Window away from both the midrange and the last few percent (where
    // shooting round-off, amplified by the growing mode, can intrude).
    const double lo = 0.55 * profile.r_max, hi = 0.90 * profile.r_max;
    double s11 = 0, s1r = 0, srr = 0, s1g = 0, srg = 0;
    for (size_t k = 0; k < profile.r.size(); ++k) {
        const double r = profile.r[k];
        if (r < lo || r > hi || profile.value[k] <= 0.0)
            continue;
        const double lg = std::log(profile.value[k]);
        s11 += 1;
        s1r += r;
        srr += r * r;
        s1g += lg;
        srg += r * lg;
    }
    const double det = s11 * srr - s1r * s1r;
    if (s11 < 8 || det == 0.0)
        throw std::runtime_error("fit_tail: no usable decay window");
    const double slope = (s11 * srg - s1r * s1g) / det;
    const double icept = (srr * s1g - s1r * srg) / det;
    if (!(slope < 0.0))
        throw std::runtime_error("fit_tail: profile does not decay");
    return TailFit{std::exp(icept), -slope};
}

namespace {

// integral_R^inf r^m e^{-a r} dr = e^{-aR} sum_{j<=m} (m!/j!) R^j a^{j-m-1}
double exp_moment_tail(int m, double a, double R)
{
    double sum = 0.0;
    for (int j = m; j >= 0; --j) {
        double mfac_over_jfac = 1.0;
        for (int k = j + 1; k <= m; ++k)
            mfac_over_jfac *= k;
        sum += mfac_over_jfac * std::pow(R, j) / std::pow(a, m - j + 1);
    }
    return std::exp(-a * R) * sum;
}

}  // namespace

GreenOuterData green_outer_data(const GreenProfile& profile, double a,
                                const ModelParams& params)
{
    if (!(a >= profile.r_min && a < profile.r_max))
        throw std::invalid_argument("green_outer_data: radius out of range");
    const int n = profile.dim;
    const double omega = sphere_area(n);
    const double x0 = std::log(profile.r_min);
    const double dx = (std::log(profile.r_max) - x0) / (profile.r.size() - 1);
    const double xa = std::log(a);

    // In x = log r:  |grad G|^N r^{N-1} dr = |q|^{N/(N-1)} dx.
    auto energy_d = [&](size_t k) {
        return omega * (std::pow(std::abs(profile.flux[k]), double(n) / (n - 1))
                        + profile.tau * std::exp(n * (x0 + k * dx))
                              * std::pow(std::abs(profile.value[k]), n));
    };
    auto power_d = [&](size_t k) {
        return omega * std::pow(std::abs(profile.value[k]), n)
             * std::exp((n - n * params.beta) * (x0 + k * dx));
    };

    // Composite Simpson over whole samples in [ka, end], then a short
    // Hermite-free correction strip [xa, x_ka].
    const size_t ka = std::min(size_t(std::ceil((xa - x0) / dx)),
                               profile.r.size() - 1);
    auto simpson = [&](auto&& f) {
        const size_t m = profile.r.size() - 1;
        if (ka >= m)
            return 0.0;
        double total = 0.0;
        size_t first = ka;
        if ((m - ka) % 2 == 1) {  // trapezoid on the leading odd interval
            total += 0.5 * dx * (f(ka) + f(ka + 1));
            first = ka + 1;
        }
        if (first < m) {
            double s = f(first) + f(m);
            for (size_t k = first + 1; k < m; ++k)
                s += f(k) * ((k - first) % 2 == 1 ? 4.0 : 2.0);
            total += s * dx / 3.0;
        }
        return total;
    };
    double energy = simpson(energy_d);
    double power = simpson(power_d);
    // Strip between a and the first whole sample.
    if (ka > 0 && xa < x0 + ka * dx) {
        const double width = x0 + ka * dx - xa;
        auto strip = [&](double x, bool is_energy) {
            const double r = std::exp(x);
            const double g = profile.value_at(r);
            const double dgdr = profile.derivative_at(r);
            if (is_energy)
                return omega * (std::pow(std::abs(dgdr), n) * std::pow(r, n)
                                + profile.tau * std::exp(n * x) * std::pow(std::abs(g), n));
            return omega * std::pow(std::abs(g), n)
                 * std::exp((n - n * params.beta) * x);
        };
        const double xm = xa + 0.5 * width;
        energy += width * strip(xm, true);
        power += width * strip(xm, false);
    }

    // Fitted exponential closure beyond r_max.
    const TailFit tail = fit_tail(profile);
    const double kN = std::pow(tail.coeff, n);
    const double decay = n * tail.rate;
    const double tail_energy =
        omega * (std::pow(tail.rate, n) + profile.tau) * kN
        * exp_moment_tail(n - 1, decay, profile.r_max);
    const double tail_power =
        omega * kN * std::exp(-decay * profile.r_max)
        * quad::adaptive(
              [&](double r) {
                  return std::pow(r, n - 1.0 - n * params.beta)
                       * std::exp(-decay * (r - profile.r_max));
              },
              profile.r_max, profile.r_max + 45.0 / decay, 1e-12, 0.0)
              .value;

    GreenOuterData out;
    out.boundary_value = profile.value_at(a);
    {
        const double x = xa;
        const size_t i = std::min(size_t((x - x0) / dx), profile.r.size() - 2);
        const double t = (x - (x0 + i * dx)) / dx;
        out.boundary_flux = profile.flux[i] + t * (profile.flux[i + 1] - profile.flux[i]);
    }
    out.energy = energy + tail_energy;
    out.weighted_power = power + tail_power;
    const double frac_e = out.energy > 0 ? tail_energy / out.energy : 0.0;
    const double frac_p = out.weighted_power > 0 ? tail_power / out.weighted_power : 0.0;
    out.tail_fraction = std::max(frac_e, frac_p);
    out.tail_flagged = out.tail_fraction > 0.05;
    return out;
}

void save_green_csv(const std::string& path, const GreenProfile& profile)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("save_green_csv: cannot open " + path);
    std::string out;
    out.reserve(profile.r.size() * 48 + 128);
    out += "# N=";
    out += std::to_string(profile.dim);
    out += " tau=";
    append_num(out, profile.tau);
    out += " r_min=";
    append_num(out, profile.r_min);
    out += " r_max=";
    append_num(out, profile.r_max);
    out += " additive_constant=";
    append_num(out, profile.additive_constant);
    out += '\n';
    for (size_t k = 0; k < profile.r.size(); ++k) {
        append_num(out, profile.r[k]);
        out += ',';
        append_num(out, profile.value[k]);
        out += ',';
        append_num(out, profile.flux[k]);
        out += '\n';
    }
    os << out;
}

}  // namespace stm
