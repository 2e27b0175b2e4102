#pragma once

#include <cmath>
#include <span>

namespace llrelax {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction; `tol` is absolute.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 40) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Trapezoidal rule on a uniform grid of spacing h.
inline double trapezoid(std::span<const double> y, double h) {
    if (y.size() < 2) return 0.0;
    double sum = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) sum += y[i];
    return sum * h;
}

}  // namespace llrelax
