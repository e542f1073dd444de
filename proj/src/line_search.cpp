#include "volnet/line_search.hpp"

#include "volnet/error.hpp"

#include <algorithm>
#include <cmath>

namespace volnet::train {

namespace {

/// Minimizer of the cubic matching value and slope at a and b; NaN if it does not exist.
double cubic_minimizer(double a, double fa, double ga, double b, double fb, double gb)
{
    const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - ga * gb;
    if (!(disc >= 0.0)) return std::nan("");
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = gb - ga + 2.0 * d2;
    if (denom == 0.0) return std::nan("");
    return b - (b - a) * (gb + d2 - d1) / denom;
}

struct Sample {
    double alpha;
    double value;
    double slope;
};

}  // namespace

LineSearchResult strong_wolfe_search(const std::function<LinePoint(double)>& phi, double value0,
                                     double slope0, double alpha_init, const LineSearchParams& params)
{
    if (!(slope0 < 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "line search needs a descent direction (slope < 0)");
    }
    if (!(alpha_init > 0.0)) alpha_init = 1.0;

    LineSearchResult result;
    auto eval = [&](double alpha) {
        ++result.evaluations;
        const auto p = phi(alpha);
        return Sample{alpha, p.value, p.slope};
    };
    auto armijo_ok = [&](const Sample& s) {
        return std::isfinite(s.value) && s.value <= value0 + params.c1 * s.alpha * slope0;
    };
    auto curvature_ok = [&](const Sample& s) { return std::abs(s.slope) <= -params.c2 * slope0; };
    auto accept = [&](const Sample& s) {
        result.converged = true;
        result.alpha = s.alpha;
        result.value = s.value;
        result.slope = s.slope;
        return result;
    };

    // lo always satisfies Armijo and has the lowest value seen inside the bracket.
    auto zoom = [&](Sample lo, Sample hi) -> LineSearchResult {
        while (result.evaluations < params.max_evaluations) {
            const double left = std::min(lo.alpha, hi.alpha);
            const double right = std::max(lo.alpha, hi.alpha);
            const double width = right - left;
            if (width <= 1e-16 * std::max(1.0, right)) break;

            double trial = std::nan("");
            if (std::isfinite(hi.value) && std::isfinite(hi.slope)) {
                trial = cubic_minimizer(lo.alpha, lo.value, lo.slope, hi.alpha, hi.value, hi.slope);
            }
            const double margin = 0.1 * width;
            if (!std::isfinite(trial) || trial < left + margin || trial > right - margin) {
                trial = 0.5 * (left + right);
            }

            const Sample s = eval(trial);
            if (!armijo_ok(s) || s.value >= lo.value) {
                hi = s;
            } else {
                if (curvature_ok(s)) return accept(s);
                if (s.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = s;
            }
        }
        return result;
    };

    Sample prev{0.0, value0, slope0};
    double alpha = std::min(alpha_init, params.alpha_max);
    bool first = true;
    while (result.evaluations < params.max_evaluations) {
        const Sample s = eval(alpha);
        if (!armijo_ok(s) || (!first && s.value >= prev.value)) return zoom(prev, s);
        if (curvature_ok(s)) return accept(s);
        if (s.slope >= 0.0) return zoom(s, prev);
        if (alpha >= params.alpha_max) break;

        // Extrapolate: cubic step clamped to [2, 10] times the current step.
        double next = cubic_minimizer(prev.alpha, prev.value, prev.slope, s.alpha, s.value, s.slope);
        const double lo_bound = s.alpha + 2.0 * (s.alpha - prev.alpha);
        const double hi_bound = s.alpha + 10.0 * (s.alpha - prev.alpha);
        if (!std::isfinite(next) || next < lo_bound || next > hi_bound) next = lo_bound;
        prev = s;
        alpha = std::min(next, params.alpha_max);
        first = false;
    }
    return result;
}

}  // namespace volnet::train
