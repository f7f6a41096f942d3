/// \file testfn.hpp
/// Concentration test functions for the critical growth functional: a
/// truncated bubble glued to the singular profile of green.hpp, with the
/// gluing shift and the peak height solved so the function is continuous
/// and has exactly unit norm. Their functional value exceeds the
/// concentration threshold by a correction that decays at a known rate in
/// the matching window, which is what verify_critical_gap measures.
#pragma once

#include "stm/green.hpp"
#include "stm/kernel.hpp"

#include <vector>

namespace stm {

/// Mass split of the bubble density
///   sphere * integral e^{(N / log_coefficient) phi} r^{N-1-N beta} dr,
/// which integrates to exactly 1 over [0, infinity): `truncated` is the
/// quadrature value over [0, radius], `tail` the closed form beyond.
struct BubbleMass {
    double truncated = 0.0;
    double tail = 0.0;
    double total = 0.0;
};
BubbleMass bubble_mass(const ModelParams& params, double radius);

/// One glued test function, parametrized by the concentration cutoff
/// (the bubble lives at scale `cutoff`, matched to the singular profile
/// at radius window * cutoff with window = (-log cutoff)^{1/(1-beta)}).
struct TestFunctionReport {
    double cutoff = 0.0;
    double window = 0.0;            ///< R = (-log cutoff)^{1/(1-beta)}
    double matching_radius = 0.0;   ///< R * cutoff
    double shift = 0.0;             ///< gluing shift b
    double peak = 0.0;              ///< peak height c
    double peak_pow = 0.0;          ///< c^{N/(N-1)}
    double norm = 0.0;              ///< recomputed norm (1 up to solve tol)
    double norm_quadrature = 0.0;   ///< same norm, all-quadrature cross-check
    double value = 0.0;             ///< critical functional at the function
    double threshold = 0.0;         ///< concentration threshold
    double gap = 0.0;               ///< value - threshold
    double asymptote_shift = 0.0;   ///< limit of b as cutoff -> 0
    double asymptote_peak_pow = 0.0;///< leading-order peak_pow
    double predicted_correction = 0.0; ///< first-order gap model
    bool saturated = false;
};

/// Build the test function for one cutoff. Requires params.eps == 0 (the
/// construction targets the critical exponent) and a matching radius
/// inside [green.r_min, green.r_max / 2].
TestFunctionReport build_test_function(double cutoff, const ModelParams& params,
                                       const GreenProfile& green);

/// Sweep of cutoffs with log-log regression of the shift and peak
/// corrections against the window size; `expected_rate` is the model
/// exponent N (1-beta) / (N-1).
struct GapSweep {
    std::vector<TestFunctionReport> points;
    double shift_rate = 0.0;
    double peak_rate = 0.0;
    double expected_rate = 0.0;
    bool gaps_positive = false;
};
GapSweep verify_critical_gap(const std::vector<double>& cutoffs,
                             const ModelParams& params,
                             const GreenProfile& green);

}  // namespace stm
