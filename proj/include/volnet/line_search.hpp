#pragma once

#include <functional>

namespace volnet::train {

struct LineSearchParams {
    double c1 = 1e-4;       ///< sufficient decrease
    double c2 = 0.5;        ///< curvature (strong Wolfe)
    int max_evaluations = 25;
    double alpha_max = 1e10;
};

struct LinePoint {
    double value;
    double slope;  ///< d/dalpha of the restricted function
};

struct LineSearchResult {
    bool converged = false;
    double alpha = 0.0;
    double value = 0.0;
    double slope = 0.0;
    int evaluations = 0;
};

/// Bracket-and-zoom search for a step satisfying the strong Wolfe conditions, using
/// safeguarded cubic interpolation inside the bracket. `phi(alpha)` returns the
/// restricted function value and slope. Throws InvalidArgument unless slope0 < 0.
/// A failed search (budget exhausted, bracket collapsed) reports converged = false and
/// never returns an unverified step.
LineSearchResult strong_wolfe_search(const std::function<LinePoint(double)>& phi, double value0,
                                     double slope0, double alpha_init, const LineSearchParams& params = {});

}  // namespace volnet::train
