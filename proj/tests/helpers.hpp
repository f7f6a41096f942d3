/// Shared helpers for the test binaries: an independent finite-difference
/// residual for the singular-profile equation and a tiny process runner
/// for exercising the command-line tool.
#pragma once

#include "stm/green.hpp"
#include "stm/kernel.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace testutil {

/// Scaled residual of (r^{N-1}|G'|^{N-2}G')' = tau r^{N-1} G^{N-1} over the
/// stored samples, independent of the solver: centered differences of the
/// flux column against the right side at the pair midpoint.  Scaling by
/// (1 + |rhs|) keeps the far tail (where both sides vanish) from hiding a
/// near-field defect and keeps the near field (where the flux is order one)
/// comparable.
inline double green_ode_residual(const stm::GreenProfile& g,
                                 const stm::ModelParams& params)
{
    double worst = 0.0;
    for (size_t i = 1; i + 1 < g.r.size(); ++i) {
        const double dr = g.r[i + 1] - g.r[i - 1];
        const double lhs = (g.flux[i + 1] - g.flux[i - 1]) / dr;
        const double rm = 0.5 * (g.r[i + 1] + g.r[i - 1]);
        const double gv = g.value_at(rm);
        const double rhs = params.tau * std::pow(rm, params.dim - 1)
                         * std::pow(std::abs(gv), params.dim - 1)
                         * (gv < 0 ? -1.0 : 1.0);
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }
    return worst;
}

struct CommandResult {
    std::string out;
    int status = -1;
};

/// Run a shell command, capture stdout, and report the exit status.
/// stderr is left attached to the test's own stderr.
inline CommandResult run_command(const std::string& cmd)
{
    CommandResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return res;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0)
        res.out.append(buf, got);
    const int rc = pclose(pipe);
    if (rc >= 0 && WIFEXITED(rc))
        res.status = WEXITSTATUS(rc);
    return res;
}

}  // namespace testutil
