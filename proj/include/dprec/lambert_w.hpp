#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dprec {

namespace detail {

/// p = √(2(1 + e·x)) with e split in two doubles so the cancellation near
/// x = −1/e keeps full relative accuracy.
inline double branch_distance(double x) {
    constexpr double kEHi = 2.718281828459045;
    constexpr double kELo = 1.4456468917292502e-16;
    const double q = std::fma(kEHi, x, 1.0) + kELo * x;
    return std::sqrt(2.0 * std::max(q, 0.0));
}

/// W₀ from its series in p about the branch point.
inline double lambert_w0_branch_series(double p) {
    constexpr double c[] = {-1.0, 1.0, -1.0 / 3.0, 11.0 / 72.0, -43.0 / 540.0, 769.0 / 17280.0, -221.0 / 8505.0};
    double w = c[6];
    for (int k = 5; k >= 0; --k) w = w * p + c[k];
    return w;
}

inline double lambert_w0_initial_guess(double x) {
    constexpr double kE = std::numbers::e;
    if (x < -0.25) {
        // Branch-point series in p = sqrt(2(ex + 1)).
        const double p = std::sqrt(2.0 * (kE * x + 1.0));
        return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0));
    }
    if (x < 0.5) return x * (1.0 + x * (-1.0 + x * 1.5));
    if (x < 3.0) return 0.5 * std::log1p(x) + 0.25 * x / (1.0 + x);
    const double l = std::log(x);
    const double ll = std::log(l);
    return l - ll + ll / l;
}

}  // namespace detail

/**
 * Principal branch W₀(x) of the Lambert function, w·e^w = x, for x ≥ −1/e.
 * Halley iteration from a series/log initial guess.
 */
inline double lambert_w0(double x) {
    constexpr double kBranch = -1.0 / std::numbers::e;
    if (std::isnan(x)) return x;
    if (x < kBranch) {
        // Allow the branch point itself to be hit through rounding of -1/e.
        if (x > kBranch - 4.0 * std::numeric_limits<double>::epsilon()) return -1.0;
        throw std::domain_error("lambert_w0: argument below -1/e");
    }
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;

    if (x < -0.3) {
        // Halley loses accuracy where w + 1 → 0.
        const double p = detail::branch_distance(x);
        if (p < 1e-2) return detail::lambert_w0_branch_series(p);
    }
    double w = detail::lambert_w0_initial_guess(x);
    for (int i = 0; i < 64; ++i) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0) break;
        const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

}  // namespace dprec
