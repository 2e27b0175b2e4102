#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace llrelax {

/// P_n(x) by the upward three-term recurrence
///   (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1},
/// stable on |x| <= 1.
inline double legendre_p(int n, double x) {
    if (n < 0) throw std::domain_error("legendre degree must be non-negative");
    if (n == 0) return 1.0;
    double prev = 1.0, cur = x;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Normalized mode function sqrt(j + 1/2) P_j(x) on x in [-1, 1].
inline double legendre_f(int j, double x) {
    if (std::abs(x) > 1.0) throw std::domain_error("legendre_f needs |x| <= 1");
    // exact endpoint values
    if (x == 1.0) return std::sqrt(j + 0.5);
    if (x == -1.0) return (j % 2 == 0 ? 1.0 : -1.0) * std::sqrt(j + 0.5);
    return std::sqrt(j + 0.5) * legendre_p(j, x);
}

/// f_1(x) .. f_jmax(x) in one recurrence pass; out[j-1] = f_j(x).
inline void legendre_f_all(int j_max, double x, std::vector<double>& out) {
    if (std::abs(x) > 1.0) throw std::domain_error("legendre_f needs |x| <= 1");
    out.resize(static_cast<std::size_t>(j_max));
    if (j_max < 1) return;
    double prev = 1.0, cur = x;
    for (int j = 1; j <= j_max; ++j) {
        double pj = cur;
        if (x == 1.0) pj = 1.0;
        else if (x == -1.0) pj = (j % 2 == 0) ? 1.0 : -1.0;
        out[static_cast<std::size_t>(j - 1)] = std::sqrt(j + 0.5) * pj;
        const double next = ((2.0 * j + 1.0) * x * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
}

}  // namespace llrelax
