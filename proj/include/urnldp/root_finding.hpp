#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

namespace urnldp {

struct MonotoneRoot {
    double x{0.0};
    double residual{0.0};  // |f(x) - target|
    int iterations{0};
    // false when the target lies beyond f(-max_bound) or f(max_bound); x is then the clamped bound
    bool bracketed{true};
};

// Solves f(x) = target for a strictly increasing f. `eval(x)` returns the
// pair {f(x), f'(x)}. The bracket [-B, B] grows geometrically from
// `initial_bound` until it contains the target, then Newton steps are taken
// with a bisection fallback whenever Newton leaves the bracket.
template <class Eval>
MonotoneRoot solve_increasing(Eval&& eval, double target, double tol = 1e-12,
                              double initial_bound = 1.0, double max_bound = 2048.0) {
    MonotoneRoot out;
    double lo = -initial_bound, hi = initial_bound;
    auto f_lo = eval(lo).first;
    while (f_lo > target) {
        if (lo <= -max_bound) {
            out.x = lo;
            out.residual = std::abs(f_lo - target);
            out.bracketed = false;
            return out;
        }
        hi = lo;
        lo *= 2.0;
        f_lo = eval(lo).first;
    }
    auto f_hi = eval(hi).first;
    while (f_hi < target) {
        if (hi >= max_bound) {
            out.x = hi;
            out.residual = std::abs(f_hi - target);
            out.bracketed = false;
            return out;
        }
        lo = hi;
        hi *= 2.0;
        f_hi = eval(hi).first;
    }

    double x = std::clamp(0.0, lo, hi);
    for (int it = 0; it < 400; ++it) {
        out.iterations = it + 1;
        const auto [fx, dfx] = eval(x);
        const double r = fx - target;
        if (r == 0.0) {
            lo = hi = x;
            break;
        }
        if (r < 0.0) lo = x;
        else hi = x;

        double next = x - r / dfx;
        if (!(dfx > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step <= tol || hi - lo <= tol) break;
    }
    out.x = x;
    out.residual = std::abs(eval(x).first - target);
    return out;
}

}  // namespace urnldp
