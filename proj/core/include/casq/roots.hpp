#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace casq {

// Raised when an iterative routine cannot bracket or refine a solution.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RootOptions {
    double xtol = 1e-12;  // absolute bracket-width target
    double ftol = 0.0;    // residual target; 0 disables the residual stop
    int max_iter = 2048;
};

// Root of f on [lo, hi].  f(lo) and f(hi) must not share a strict sign.
// Plain bisection with a secant candidate each step: the bracket guarantees
// progress, the secant step gives superlinear convergence on simple roots.
template <class F>
double find_root(F&& f, double lo, double hi, RootOptions opt = {}) {
    if (!(lo <= hi))
        throw numerical_error("find_root: empty bracket");
    double a = lo, b = hi;
    double fa = f(a);
    if (fa == 0.0) return a;
    double fb = f(b);
    if (fb == 0.0) return b;
    if (std::isnan(fa) || std::isnan(fb) || (fa > 0.0) == (fb > 0.0))
        throw numerical_error("find_root: endpoints do not bracket a root");

    double best = 0.5 * (a + b);
    for (int i = 0; i < opt.max_iter; ++i) {
        const double width = b - a;
        double x = a + 0.5 * width;
        const double denom = fb - fa;
        if (denom != 0.0) {
            // secant candidate, accepted only well inside the bracket
            const double s = b - fb * width / denom;
            if (s > a + 0.01 * width && s < b - 0.01 * width) x = s;
        }
        const double fx = f(x);
        if (std::isnan(fx))
            throw numerical_error("find_root: function returned NaN inside the bracket");
        best = x;
        if (fx == 0.0 || (opt.ftol > 0.0 && std::abs(fx) <= opt.ftol)) return x;
        if ((fx > 0.0) == (fb > 0.0)) {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        const double scale = std::max({1.0, std::abs(a), std::abs(b)});
        if (b - a <= std::max(opt.xtol, 4.0 * std::numeric_limits<double>::epsilon() * scale))
            return 0.5 * (a + b);
    }
    return best;
}

}  // namespace casq
