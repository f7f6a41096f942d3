#include "stm/radial.hpp"
#include "stm/quadrature.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace stm {

namespace {

// Shortest round-trip decimal form; the reason CSV files reload bit-exactly.
void append_double(std::string& out, double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

double parse_double(std::string_view sv, const char* what)
{
    double v = 0.0;
    auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (res.ec != std::errc() || res.ptr != sv.data() + sv.size())
        throw std::invalid_argument(std::string("load_csv: bad ") + what);
    return v;
}

}  // namespace

double RadialGrid::to_s(double radius) const
{
    if (grading == 0.0)
        return radius;
    return std::pow(radius, 1.0 - grading);
}

double RadialGrid::to_r(double coord) const
{
    if (grading == 0.0)
        return coord;
    return std::pow(coord, 1.0 / (1.0 - grading));
}

std::shared_ptr<const RadialGrid> make_grid(double r_max, int cells,
                                            double grading)
{
    if (!(r_max > 0.0))
        throw std::invalid_argument("make_grid: r_max must be > 0");
    if (cells < 16)
        throw std::invalid_argument("make_grid: need at least 16 cells");
    if (!(grading >= 0.0 && grading < 1.0))
        throw std::invalid_argument("make_grid: grading must lie in [0,1)");
    auto g = std::make_shared<RadialGrid>();
    g->r_max = r_max;
    g->cells = cells;
    g->grading = grading;
    g->s_max = g->to_s(r_max);
    g->s.resize(cells + 1);
    g->r.resize(cells + 1);
    for (int i = 0; i <= cells; ++i) {
        g->s[i] = g->s_max * i / cells;
        g->r[i] = g->to_r(g->s[i]);
    }
    g->s[0] = 0.0;
    g->r[0] = 0.0;
    return g;
}

RadialFunction::RadialFunction(std::shared_ptr<const RadialGrid> g,
                               std::vector<double> v, bool dec)
    : grid(std::move(g)), values(std::move(v)), decreasing(dec)
{
    if (!grid)
        throw std::invalid_argument("RadialFunction: null grid");
    if (int(values.size()) != grid->nodes())
        throw std::invalid_argument("RadialFunction: value count != node count");
}

double RadialFunction::operator()(double radius) const
{
    if (radius < 0.0)
        throw std::domain_error("RadialFunction: negative radius");
    if (radius >= grid->r_max)
        return radius == grid->r_max ? values.back() : 0.0;
    const double s = grid->to_s(radius);
    const double ds = grid->s_max / grid->cells;
    int i = std::min(int(s / ds), grid->cells - 1);
    // Guard against round-off pushing s just outside cell i.
    if (s < grid->s[i] && i > 0)
        --i;
    else if (s > grid->s[i + 1])
        ++i;
    const double theta = (s - grid->s[i]) / (grid->s[i + 1] - grid->s[i]);
    return values[i] + theta * (values[i + 1] - values[i]);
}

double weighted_integral(const RadialFunction& u, double weight_exponent,
                         int n, double (*f)(double, double, void*), void* ctx)
{
    if (!(weight_exponent > -1.0))
        throw std::invalid_argument(
            "weighted_integral: weight exponent must exceed -1");
    const RadialGrid& g = *u.grid;
    const double omg = 1.0 - g.grading;
    // r^w dr = (1/(1-grading)) s^{(w+1)/(1-grading) - 1} ds.
    const double sx = (weight_exponent + 1.0) / omg - 1.0;
    double total = 0.0;
    for (int i = 0; i < g.cells; ++i) {
        const double s0 = g.s[i], s1 = g.s[i + 1];
        const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
        double cell = 0.0;
        for (int q = 0; q < 4; ++q) {
            const double s = mid + half * quad::gauss4_x[q];
            const double r = g.to_r(s);
            const double theta = (s - s0) / (s1 - s0);
            const double v = u.values[i] + theta * (u.values[i + 1] - u.values[i]);
            cell += quad::gauss4_w[q] * f(r, v, ctx)
                  * (sx == 0.0 ? 1.0 : std::pow(s, sx));
        }
        total += cell * half;
    }
    return sphere_area(n) * total / omg;
}

double sobolev_norm(const RadialFunction& u, const ModelParams& params)
{
    const RadialGrid& g = *u.grid;
    const int n = params.dim;
    const double omg = 1.0 - g.grading;
    // Gradient term: |u'(r)|^N r^{N-1} dr integrates in closed form per
    // cell because the slope in s is constant there.
    double dirichlet = 0.0;
    for (int i = 0; i < g.cells; ++i) {
        const double slope =
            (u.values[i + 1] - u.values[i]) / (g.s[i + 1] - g.s[i]);
        const double span = std::pow(g.s[i + 1], n) - std::pow(g.s[i], n);
        dirichlet += std::pow(std::abs(slope), n) * span;
    }
    dirichlet *= std::pow(omg, n - 1) / n * sphere_area(n);
    const double mass = weighted_integral(
        u, n - 1.0, n,
        [n](double, double v) { return std::pow(std::abs(v), n); });
    return std::pow(dirichlet + params.tau * mass, 1.0 / n);
}

namespace {

// Maximal monotone segments of the nodal sequence; the level-set volume
// of a piecewise-linear profile is a sum of exact per-run contributions,
// each found by one binary search.
struct MonotoneRuns {
    const RadialGrid* grid;
    std::vector<double> a;               // |values|
    struct Run { int lo, hi; bool up; };
    std::vector<Run> runs;
    int n;

    MonotoneRuns(const RadialFunction& u, int dim)
        : grid(u.grid.get()), n(dim)
    {
        a.resize(u.values.size());
        for (size_t i = 0; i < a.size(); ++i)
            a[i] = std::abs(u.values[i]);
        int lo = 0;
        int dir = 0;  // unknown
        for (int i = 1; i < int(a.size()); ++i) {
            const int d = a[i] > a[i - 1] ? +1 : (a[i] < a[i - 1] ? -1 : 0);
            if (d == 0 || dir == 0 || d == dir) {
                if (dir == 0)
                    dir = d;
                continue;
            }
            runs.push_back({lo, i - 1, dir > 0});
            lo = i - 1;
            dir = d;
        }
        runs.push_back({lo, int(a.size()) - 1, dir > 0});
    }

    double vol(double r) const { return std::pow(r, n); }

    double crossing(int i, double t) const
    {
        // Linear in s between nodes i and i+1; caller guarantees the
        // bracket, so the denominator is nonzero.
        const double th = (t - a[i]) / (a[i + 1] - a[i]);
        return grid->s[i] + th * (grid->s[i + 1] - grid->s[i]);
    }

    // Volume (in r^n units) of {|u| > t}.
    double measure(double t) const
    {
        double total = 0.0;
        for (const Run& run : runs) {
            const double alo = a[run.lo], ahi = a[run.hi];
            const double lo_val = run.up ? alo : ahi;   // min over run
            const double hi_val = run.up ? ahi : alo;   // max over run
            if (t >= hi_val)
                continue;
            if (t < lo_val) {
                total += vol(grid->r[run.hi]) - vol(grid->r[run.lo]);
                continue;
            }
            if (run.up) {
                // First index with a > t.
                int lo = run.lo, hi = run.hi;
                while (hi - lo > 1) {
                    const int mid = (lo + hi) / 2;
                    (a[mid] > t ? hi : lo) = mid;
                }
                const double sc = crossing(lo, t);
                total += vol(grid->r[run.hi]) - vol(grid->to_r(sc));
            } else {
                // First index with a <= t.
                int lo = run.lo, hi = run.hi;
                while (hi - lo > 1) {
                    const int mid = (lo + hi) / 2;
                    (a[mid] > t ? lo : hi) = mid;
                }
                const double sc = crossing(lo, t);
                total += vol(grid->to_r(sc)) - vol(grid->r[run.lo]);
            }
        }
        return total;
    }
};

}  // namespace

double distribution_volume(const RadialFunction& u, int n, double level)
{
    if (n < 1)
        throw std::invalid_argument("distribution_volume: n must be >= 1");
    if (level < 0.0)
        throw std::domain_error("distribution_volume: level must be >= 0");
    return MonotoneRuns(u, n).measure(level);
}

RadialFunction rearrange_decreasing(const RadialFunction& u, int n)
{
    if (n < 1)
        throw std::invalid_argument("rearrange_decreasing: n must be >= 1");
    const RadialGrid& g = *u.grid;

    // Fast path: nonnegative and already nonincreasing profiles are fixed
    // points; return them bit-exactly so idempotence is exact.
    bool monotone = true;
    for (size_t i = 0; monotone && i < u.values.size(); ++i) {
        if (u.values[i] < 0.0 ||
            (i + 1 < u.values.size() && u.values[i + 1] > u.values[i]))
            monotone = false;
    }
    if (monotone) {
        RadialFunction out = u;
        out.decreasing = true;
        return out;
    }

    MonotoneRuns runs(u, n);
    const double top = *std::max_element(runs.a.begin(), runs.a.end());
    std::vector<double> v(u.values.size());
    for (int j = 0; j < int(v.size()); ++j) {
        // Nudge the target volume down so a node that lands exactly on a
        // plateau boundary resolves to the value above it.
        const double target = runs.vol(g.r[j]) * (1.0 - 3e-14);
        if (runs.measure(0.0) <= target) {
            v[j] = 0.0;
            continue;
        }
        double lo = 0.0, hi = top;
        for (int it = 0; it < 64; ++it) {
            const double mid = 0.5 * (lo + hi);
            (runs.measure(mid) > target ? lo : hi) = mid;
        }
        v[j] = lo;
    }
    for (size_t j = 1; j < v.size(); ++j)  // remove bisection round-off wiggle
        v[j] = std::min(v[j], v[j - 1]);
    return RadialFunction(u.grid, std::move(v), true);
}

RadialFunction desingularize(const RadialFunction& w, const ModelParams& params,
                             double support_tol)
{
    const RadialGrid& g = *w.grid;
    if (g.grading != params.beta)
        throw std::invalid_argument(
            "desingularize: grid grading must equal params.beta");
    double top = 0.0;
    for (double v : w.values)
        top = std::max(top, std::abs(v));
    if (std::abs(w.values.back()) > support_tol * (top > 0 ? top : 1.0))
        throw std::invalid_argument(
            "desingularize: w must vanish at the outer radius");
    // v(rho) = (1-beta)^{(N-1)/N} w(rho^{1/(1-beta)}): piecewise linear in
    // rho on the image of the s nodes, which is exactly a uniform grid.
    auto out_grid = make_grid(g.s_max, g.cells, 0.0);
    const double scale =
        std::pow(1.0 - params.beta, double(params.dim - 1) / params.dim);
    std::vector<double> v(w.values.size());
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = scale * w.values[i];
    return RadialFunction(std::move(out_grid), std::move(v), w.decreasing);
}

void save_csv(std::ostream& os, const RadialFunction& u,
              const ModelParams& params)
{
    std::string out;
    out.reserve(u.values.size() * 32 + 128);
    out += "# N=";
    out += std::to_string(params.dim);
    out += " beta=";
    append_double(out, params.beta);
    out += " tau=";
    append_double(out, params.tau);
    out += " eps=";
    append_double(out, params.eps);
    out += " grading=";
    append_double(out, u.grid->grading);
    out += " r_max=";
    append_double(out, u.grid->r_max);
    out += " cells=";
    out += std::to_string(u.grid->cells);
    out += " decreasing=";
    out += u.decreasing ? '1' : '0';
    out += '\n';
    for (size_t i = 0; i < u.values.size(); ++i) {
        append_double(out, u.grid->r[i]);
        out += ',';
        append_double(out, u.values[i]);
        out += '\n';
    }
    os << out;
}

void save_csv(const std::string& path, const RadialFunction& u,
              const ModelParams& params)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("save_csv: cannot open " + path);
    save_csv(os, u, params);
}

LoadedProfile load_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.empty() || line[0] != '#')
        throw std::invalid_argument("load_csv: missing '#' header line");
    int dim = 0, cells = 0, decreasing = 0;
    double beta = -1, tau = -1, eps = -1, grading = -1, r_max = -1;
    std::istringstream hs(line.substr(1));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("load_csv: malformed header token " + tok);
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "N")
            dim = int(parse_double(val, "N"));
        else if (key == "beta")
            beta = parse_double(val, "beta");
        else if (key == "tau")
            tau = parse_double(val, "tau");
        else if (key == "eps")
            eps = parse_double(val, "eps");
        else if (key == "grading")
            grading = parse_double(val, "grading");
        else if (key == "r_max")
            r_max = parse_double(val, "r_max");
        else if (key == "cells")
            cells = int(parse_double(val, "cells"));
        else if (key == "decreasing")
            decreasing = int(parse_double(val, "decreasing"));
        else
            throw std::invalid_argument("load_csv: unknown header key " + key);
    }
    ModelParams params(dim, beta, tau, eps);  // validates ranges
    auto grid = make_grid(r_max, cells, grading);
    std::vector<double> values;
    values.reserve(cells + 1);
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("load_csv: malformed row " + line);
        const double r = parse_double(
            std::string_view(line).substr(0, comma), "radius");
        const double v = parse_double(
            std::string_view(line).substr(comma + 1), "value");
        const size_t i = values.size();
        if (i >= grid->r.size())
            throw std::invalid_argument("load_csv: more rows than grid nodes");
        const double ref = grid->r[i];
        if (std::abs(r - ref) > 1e-12 * (1.0 + std::abs(ref)))
            throw std::invalid_argument("load_csv: radius column does not "
                                        "match the declared grid");
        values.push_back(v);
    }
    if (int(values.size()) != grid->nodes())
        throw std::invalid_argument("load_csv: fewer rows than grid nodes");
    return LoadedProfile{RadialFunction(grid, std::move(values),
                                        decreasing != 0),
                         params};
}

LoadedProfile load_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("load_csv: cannot open " + path);
    return load_csv(is);
}

}  // namespace stm
