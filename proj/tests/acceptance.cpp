// Acceptance battery: ten numbered criteria, one [PASS]/[FAIL] line each
// with the measured quantities and their stated tolerances, exit code =
// number of failed criteria.
#include "helpers.hpp"
#include "stm/green.hpp"
#include "stm/kernel.hpp"
#include "stm/maximize.hpp"
#include "stm/radial.hpp"
#include "stm/testfn.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace stm;

namespace {

int failures = 0;

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 =
        std::chrono::steady_clock::now();
    double seconds() const
    {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void line(int k, bool pass, const char* fmt, ...)
{
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", k, buf);
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

RadialFunction random_bumps(std::shared_ptr<const RadialGrid> grid,
                            std::mt19937& gen)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double a1 = 0.5 + unif(gen), a2 = 0.5 + unif(gen);
    const double m1 = 0.5 + 1.5 * unif(gen), m2 = 2.0 + 2.0 * unif(gen);
    const double w1 = 10 + 30 * unif(gen), w2 = 10 + 30 * unif(gen);
    return sample(grid, [=](double r) {
        return a1 * std::exp(-w1 * (r - m1) * (r - m1))
             + a2 * std::exp(-w2 * (r - m2) * (r - m2));
    });
}

// 1. Bubble normalization over the (dim, beta) grid.
void criterion_1()
{
    Stopwatch total;
    double worst = 0.0, slowest = 0.0;
    for (int n : {2, 3, 4}) {
        for (double beta : {0.25, 0.5, 0.75}) {
            Stopwatch sw;
            const BubbleMass m = bubble_mass(ModelParams(n, beta, 1.0, 0.0),
                                             100.0);
            slowest = std::max(slowest, sw.seconds());
            worst = std::max(worst, std::abs(m.total - 1.0));
        }
    }
    line(1, worst <= 1e-6 && slowest < 1.0,
         "bubble mass over 9 (dim,beta) cases: max |total-1| = %.2e "
         "(tol 1e-6), slowest case %.3fs (limit 1s), total %.2fs",
         worst, slowest, total.seconds());
}

// 2. Radial integral identity against its closed form.
void criterion_2()
{
    Stopwatch sw;
    const double pi = std::acos(-1.0);
    double worst = 0.0;
    for (int n = 2; n <= 6; ++n) {
        for (double c : {0.5, 1.0, pi}) {
            const IntegralCheck chk = i_integral_check(n, c);
            worst = std::max(worst,
                             std::abs(chk.quadrature - chk.closed_form)
                                 / std::abs(chk.closed_form));
        }
    }
    line(2, worst <= 1e-10 && sw.seconds() < 1.0,
         "integral identity, 5 dims x 3 coefficients: max rel err = %.2e "
         "(tol 1e-10), %.2fs (limit 1s)",
         worst, sw.seconds());
}

// 3. Two-dimensional additive constant against the Bessel oracle.
void criterion_3()
{
    Stopwatch sw;
    const double pi = std::acos(-1.0);
    const double gamma = 0.5772156649015329;
    const double ref1 = (std::log(2.0) - gamma) / (2 * pi);
    const double ref4 = -0.0918659;

    double a0[3];  // tau = 0.25, 1, 4
    const double taus[3] = {0.25, 1.0, 4.0};
    for (int i = 0; i < 3; ++i) {
        const GreenProfile prof =
            solve_green(ModelParams(2, 0.5, taus[i], 0.0));
        a0[i] = extract_A0(prof).value;
    }
    const double err1 = std::abs(a0[1] - ref1);
    const double err4 = std::abs(a0[2] - ref4);
    double scaling = 0.0;
    for (int i : {0, 2})
        scaling = std::max(scaling,
                           std::abs((a0[i] - a0[1])
                                    + std::log(std::sqrt(taus[i]))
                                          / (2 * pi)));
    line(3,
         err1 <= 1e-4 && err4 <= 1e-4 && scaling <= 2e-4
             && sw.seconds() < 10.0,
         "2D additive constant: |A0(1)-%.7f| = %.2e, |A0(4)-(%.7f)| = %.2e "
         "(tol 1e-4), scaling-law dev %.2e (tol 2e-4), %.1fs (limit 10s)",
         ref1, err1, ref4, err4, scaling, sw.seconds());
}

// 4. Three-dimensional profile self-consistency (no closed form).
void criterion_4()
{
    Stopwatch sw;
    const ModelParams params(3, 0.5, 1.0, 0.0);
    const GreenProfile base = solve_green(params);
    const double ode = testutil::green_ode_residual(base, params);
    const double flux = base.flux_residual();
    const double a0 = extract_A0(base).value;

    GreenOptions half;
    half.r_min = 5e-4;
    const double a0_half = extract_A0(solve_green(params, half)).value;
    GreenOptions wide;
    wide.r_max = 24.0;
    const double a0_wide = extract_A0(solve_green(params, wide)).value;
    const double drift =
        std::max(std::abs(a0_half - a0), std::abs(a0_wide - a0));

    line(4,
         ode <= 1e-6 && flux <= 1e-4 && drift <= 1e-4 && sw.seconds() < 30.0,
         "3D profile: ODE residual %.2e (tol 1e-6), flux residual %.2e "
         "(tol 1e-4), A0 drift under r_min/2 and r_max*2 %.2e (tol 1e-4), "
         "%.1fs (limit 30s)",
         ode, flux, drift, sw.seconds());
}

// 5. Weight-removing change of variables on analytic caps.
void criterion_5()
{
    Stopwatch sw;
    const double pi = std::acos(-1.0);
    double worst_energy = 0.0, worst_functional = 0.0;
    for (int n : {2, 3}) {
        const double beta = 0.5;
        const ModelParams params(n, beta, 1.0, 0.0);
        const ModelParams dirichlet(n, beta, 1e-30, 0.0);
        auto grid = make_grid(1.0, 512, beta);
        const double alpha = params.sharp_exponent();
        const double np = double(n) / (n - 1);
        for (int which = 0; which < 3; ++which) {
            RadialFunction w = sample(
                grid,
                [which, pi](double r) {
                    const double q = 1.0 - r * r;
                    if (which == 0)
                        return std::max(0.0, q);
                    if (which == 1)
                        return std::max(0.0, q * q);
                    const double c = std::cos(0.5 * pi * std::min(r, 1.0));
                    return c * c;
                },
                true);
            RadialFunction v = desingularize(w, params);

            const double dir_w =
                std::pow(sobolev_norm(w, dirichlet), double(n));
            const double dir_v =
                std::pow(sobolev_norm(v, dirichlet), double(n));
            worst_energy = std::max(worst_energy,
                                    std::abs(dir_v - dir_w) / dir_w);

            auto f_w = [&](double, double val) {
                return zeta(n,
                            alpha * (1 - beta) * std::pow(std::abs(val), np));
            };
            auto f_v = [&](double, double val) {
                return zeta(n, alpha * std::pow(std::abs(val), np));
            };
            const double singular =
                weighted_integral(w, n - 1 - n * beta, n, f_w);
            const double regular = weighted_integral(v, n - 1.0, n, f_v);
            worst_functional =
                std::max(worst_functional,
                         std::abs(singular - regular / (1 - beta))
                             / singular);
        }
    }
    line(5,
         worst_energy <= 1e-6 && worst_functional <= 1e-6
             && sw.seconds() < 5.0,
         "desingularization on 6 cap profiles: energy rel dev %.2e, "
         "functional-identity rel dev %.2e (tol 1e-6), %.2fs (limit 5s)",
         worst_energy, worst_functional, sw.seconds());
}

// 6. Randomized inequality and rearrangement property suite.
void criterion_6()
{
    Stopwatch sw;
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> dims(2, 6);

    int bad_lp = 0, bad_ep = 0, bad_chain = 0;
    const int scalar_cases = 400;
    for (int trial = 0; trial < scalar_cases; ++trial) {
        const int n = dims(gen);
        const double t = 1e-6 + 25.0 * unif(gen);
        const double p = 1.0 + 3.0 * unif(gen);
        if (std::pow(zeta(n, t), p) > zeta(n, p * t) * (1 + 1e-12))
            ++bad_lp;
        const double a = 1e-6 + 25.0 * unif(gen);
        if (std::pow(std::expm1(a), p) > std::expm1(p * a) * (1 + 1e-12))
            ++bad_ep;
        const int m = std::max(3, n);
        if (t * zeta(m - 1, t) < zeta(m, t) * (1 - 1e-12))
            ++bad_chain;
    }

    int bad_hl = 0, bad_ps = 0;
    const int field_cases = 200;
    auto grid = make_grid(6.0, 256, 0.0);
    const ModelParams params(2, 0.5, 1.0, 0.1);
    const ModelParams dirichlet(2, 0.5, 1e-30, 0.0);
    const double g = params.growth_coefficient();
    auto f = [g](double, double v) {
        return zeta(2, g * std::pow(std::abs(v), 2.0));
    };
    for (int trial = 0; trial < field_cases; ++trial) {
        RadialFunction u = random_bumps(grid, gen);
        RadialFunction ru = rearrange_decreasing(u, 2);
        const double before = weighted_integral(u, 0.0, 2, f);
        const double after = weighted_integral(ru, 0.0, 2, f);
        if (after < before * (1.0 - 1e-9))
            ++bad_hl;
        const double e_before = std::pow(sobolev_norm(u, dirichlet), 2.0);
        const double e_after = std::pow(sobolev_norm(ru, dirichlet), 2.0);
        if (e_after > e_before * (1.0 + 1e-8))
            ++bad_ps;
    }

    const int bad = bad_lp + bad_ep + bad_chain + bad_hl + bad_ps;
    line(6, bad == 0 && sw.seconds() < 30.0,
         "property suite (%d scalar + 2x%d rearrangement cases, seed 42): "
         "violations Lp=%d ep=%d chain=%d HL=%d PS=%d, %.1fs (limit 30s)",
         3 * scalar_cases, field_cases, bad_lp, bad_ep, bad_chain, bad_hl,
         bad_ps, sw.seconds());
}

struct SweepData {
    std::vector<double> lambdas, dists;
    double ratio_last = 0.0, lambda_last = 0.0;
    bool ok = false;
};

// 7. Subcritical solver battery on the canonical margin sweep.
SweepData criterion_7()
{
    Stopwatch sw;
    SweepData data;
    auto grid = make_grid(12.0, 1024, 0.5);
    double worst_resid = 0.0;
    bool monotone = true, multiplier_bound = true, converged = true;

    const std::vector<double> eps_list = {0.4, 0.3, 0.2, 0.1};
    for (double eps : eps_list) {
        const ModelParams params(2, 0.5, 1.0, eps);
        const MaximizerResult r = maximize_subcritical(params, grid);
        converged = converged && r.converged && !r.saturated;
        if (!r.converged)
            continue;
        if (!data.lambdas.empty())
            monotone = monotone
                    && r.value >= data.lambdas.back() * (1 - 1e-12);
        data.lambdas.push_back(r.value);
        worst_resid = std::max(worst_resid, r.el_residual);
        multiplier_bound =
            multiplier_bound
            && r.multiplier * params.growth_coefficient()
                   >= r.value * (1 - 1e-12);
        const BlowupDiagnostics d = blowup_diagnostics(r, params);
        data.dists.push_back(d.bubble_distance);
        data.ratio_last = d.ratio;
        data.lambda_last = r.value;
    }

    // multi-start agreement at the smallest margin
    const ModelParams tail_params(2, 0.5, 1.0, 0.1);
    double lo = data.lambda_last, hi = data.lambda_last;
    for (unsigned seed : {1u, 2u}) {
        MaximizeOptions opt;
        opt.seed = seed;
        const MaximizerResult r =
            maximize_subcritical(tail_params, grid, opt);
        converged = converged && r.converged;
        lo = std::min(lo, r.value);
        hi = std::max(hi, r.value);
    }
    const double spread = (hi - lo) / hi;

    // discrete gradient against central differences
    const ModelParams fd_params(2, 0.5, 1.0, 0.1);
    RadialFunction u = sample(grid, [](double r) {
        return std::max(0.0, 1.0 - r / 4.0);
    });
    const double s = sobolev_norm(u, fd_params);
    for (double& v : u.values)
        v /= s;
    const RadialFunction grad = functional_gradient(u, fd_params);
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> dir_unif(-1.0, 1.0);
    double fd_err = 0.0;
    const double h = 1e-5;
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<double> dir(u.values.size());
        for (double& d : dir)
            d = dir_unif(gen);
        double pairing = 0.0;
        for (size_t j = 0; j < dir.size(); ++j)
            pairing += grad.values[j] * dir[j];
        RadialFunction up = u, dn = u;
        for (size_t j = 0; j < dir.size(); ++j) {
            up.values[j] += h * dir[j];
            dn.values[j] -= h * dir[j];
        }
        const double fd =
            (functional(up, fd_params) - functional(dn, fd_params)) / (2 * h);
        fd_err = std::max(fd_err, std::abs(fd - pairing)
                                      / std::max(1.0, std::abs(pairing)));
    }

    data.ok = converged && monotone && worst_resid <= 1e-5
           && multiplier_bound && spread <= 1e-4 && fd_err <= 1e-6
           && sw.seconds() < 300.0;
    line(7, data.ok,
         "subcritical sweep eps={0.4,0.3,0.2,0.1}: Lambda nondecreasing %s "
         "(last %.4f), max EL residual %.2e (tol 1e-5), multiplier bound %s, "
         "multi-start spread %.2e (tol 1e-4), gradient-FD err %.2e "
         "(tol 1e-6), %.1fs (limit 300s)",
         monotone ? "yes" : "NO", data.lambda_last, worst_resid,
         multiplier_bound ? "holds" : "VIOLATED", spread, fd_err,
         sw.seconds());
    return data;
}

// 8. Critical-exponent gap of the glued test-function family.
void criterion_8()
{
    Stopwatch sw;
    const ModelParams params(2, 0.5, 1.0, 0.0);
    const GreenProfile green = solve_green(params);
    const GapSweep sweep =
        verify_critical_gap({1e-2, 1e-3, 1e-4}, params, green);

    double norm_dev = 0.0, min_gap = 1e300;
    for (const TestFunctionReport& t : sweep.points) {
        norm_dev = std::max(norm_dev, std::abs(t.norm - 1.0));
        min_gap = std::min(min_gap, t.gap);
    }
    const auto in_band = [&](double rate) {
        return rate >= 0.5 * sweep.expected_rate
            && rate <= 2.0 * sweep.expected_rate;
    };
    const bool rates_ok = in_band(sweep.shift_rate)
                       && in_band(sweep.peak_rate);
    line(8,
         norm_dev <= 1e-8 && min_gap > 0.0 && rates_ok
             && sw.seconds() < 120.0,
         "critical gap, cutoffs {1e-2,1e-3,1e-4}: max |norm-1| = %.1e "
         "(tol 1e-8), min gap %.3f (> 0), fitted defect rates "
         "shift %.4f / peak %.4f vs expected %.1f (band [0.5, 2.0]), "
         "%.1fs (limit 120s)",
         norm_dev, min_gap, sweep.shift_rate, sweep.peak_rate,
         sweep.expected_rate, sw.seconds());
}

// 9. Concentration trend of the criterion-7 maximizers.
void criterion_9(const SweepData& data)
{
    bool trend = data.dists.size() == 4;
    double worst_step = 0.0;
    for (size_t k = 1; k < data.dists.size(); ++k) {
        worst_step = std::max(worst_step,
                              data.dists[k] / data.dists[k - 1] - 1.0);
        trend = trend && data.dists[k] <= 1.10 * data.dists[k - 1];
    }
    const double rel_dev =
        std::abs(data.ratio_last - data.lambda_last) / data.lambda_last;
    line(9, trend && rel_dev <= 0.25,
         "blow-up trend: bubble distances {%.4f, %.4f, %.4f, %.4f}, worst "
         "step %+.1f%% (slack 10%%), peak-ratio rel dev at eps=0.1 %.4f "
         "(tol 0.25)",
         data.dists.size() > 0 ? data.dists[0] : -1.0,
         data.dists.size() > 1 ? data.dists[1] : -1.0,
         data.dists.size() > 2 ? data.dists[2] : -1.0,
         data.dists.size() > 3 ? data.dists[3] : -1.0,
         100.0 * worst_step, rel_dev);
}

// 10. Byte-level determinism of the verification chain.
void criterion_10()
{
    Stopwatch sw;
    namespace fs = std::filesystem;
    const std::string out1 = (fs::temp_directory_path()
                              / "stm_acceptance_verify1.json")
                                 .string();
    const std::string out2 = (fs::temp_directory_path()
                              / "stm_acceptance_verify2.json")
                                 .string();
    const std::string base = std::string(STM_CLI_PATH)
                           + " verify --dim 2 --beta 0.5 --tau 1 --seed 11"
                             " --out ";
    testutil::run_command(base + out1 + " >/dev/null 2>&1");
    testutil::run_command(base + out2 + " >/dev/null 2>&1");

    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
    };
    const std::string b1 = slurp(out1);
    const std::string b2 = slurp(out2);
    std::remove(out1.c_str());
    std::remove(out2.c_str());
    line(10, !b1.empty() && b1 == b2,
         "verify determinism: two identical runs, %zu-byte reports, "
         "byte-identical %s, %.1fs",
         b1.size(), b1 == b2 && !b1.empty() ? "yes" : "NO", sw.seconds());
}

}  // namespace

int main()
{
    Stopwatch total;
    std::printf("acceptance battery: 10 criteria\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    const SweepData sweep = criterion_7();
    criterion_8();
    criterion_9(sweep);
    criterion_10();
    std::printf("%d of 10 criteria passed in %.1fs\n", 10 - failures,
                total.seconds());
    return failures;
}
