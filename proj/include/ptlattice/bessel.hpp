#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ptlattice/errors.hpp"

namespace ptlattice {

namespace detail {

// Ascending series sum_k (-1)^k (x/2)^{2k+n} / (k! (n+k)!).
// Worst cancellation on |x| <= 12 costs about four digits.
inline double bessel_j_series(int n, double x) {
    const double half = 0.5 * x;
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= half / k;
    double sum = term;
    const double h2 = half * half;
    for (int k = 0; k < 500; ++k) {
        term *= -h2 / ((k + 1.0) * (k + n + 1.0));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum) && k > half) break;
    }
    return sum;
}

// Miller's downward recurrence normalized by J_0 + 2 sum_k J_{2k} = 1. Requires x > 0.
inline double bessel_j_miller(int n, double x) {
    const int top = std::max(n, static_cast<int>(x));
    int m = top + 20 + static_cast<int>(std::sqrt(40.0 * top));
    m += m % 2;
    constexpr double big = 1e250;
    double jp1 = 0.0, j = 1e-300, result = 0.0, norm = 0.0;
    for (int k = m; k > 0; --k) {
        const double jm1 = 2.0 * k / x * j - jp1;
        jp1 = j;
        j = jm1; // now J_{k-1}
        if (std::abs(j) > big) {
            j /= big;
            jp1 /= big;
            result /= big;
            norm /= big;
        }
        if (k - 1 == n) result = j;
        if (k - 1 > 0 && (k - 1) % 2 == 0) norm += 2.0 * j;
    }
    norm += j; // J_0
    return result / norm;
}

} // namespace detail

/// Bessel function of the first kind J_n(x) for integer n >= 0 and |x| <= 50,
/// absolute error below 1e-12.
inline double bessel_j(int n, double x) {
    if (n < 0) throw RangeError("bessel_j: order must be >= 0, got " + std::to_string(n));
    if (!std::isfinite(x) || std::abs(x) > 50.0)
        throw RangeError("bessel_j: |x| must be <= 50, got " + std::to_string(x));
    const double sign = (x < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
    const double ax = std::abs(x);
    if (ax == 0.0) return n == 0 ? 1.0 : 0.0;
    const double v = ax <= 12.0 ? detail::bessel_j_series(n, ax) : detail::bessel_j_miller(n, ax);
    return sign * v;
}

} // namespace ptlattice
