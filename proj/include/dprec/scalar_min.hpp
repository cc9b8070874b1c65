#pragma once

/**
 * @file scalar_min.hpp
 * @brief Derivative-free scalar minimization: Brent's parabolic/golden
 *        method on a bracket, and geometric bracket expansion.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>

namespace dprec {

struct ScalarMinimum {
    double x;
    double fx;
    std::size_t evaluations;
};

/// Minimizes f on [a, b] to absolute tolerance ~xtol (Brent 1973, localmin).
template <typename F>
ScalarMinimum brent_minimize(F&& f, double a, double b, double xtol, int max_iter = 200) {
    constexpr double kGold = 0.3819660112501051;  // (3 − √5)/2
    constexpr double kEps = 1.5e-8;               // √machine-eps
    if (a > b) std::swap(a, b);
    double x = a + kGold * (b - a);
    double w = x, v = x;
    double fx = f(x);
    double fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    std::size_t evals = 1;

    for (int iter = 0; iter < max_iter; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol = kEps * std::abs(x) + xtol / 3.0;
        const double t2 = 2.0 * tol;
        if (std::abs(x - m) <= t2 - 0.5 * (b - a)) break;

        bool golden = true;
        if (std::abs(e) > tol) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            r = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < t2 || b - u < t2) d = (x < m) ? tol : -tol;
                golden = false;
            }
        }
        if (golden) {
            e = (x < m) ? b - x : a - x;
            d = kGold * e;
        }
        const double u = (std::abs(d) >= tol) ? x + d : x + (d > 0.0 ? tol : -tol);
        const double fu = f(u);
        ++evals;
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx, evals};
}

struct Bracket {
    double lo, mid, hi;
    double f_mid;
};

/**
 * Walks outward from `seed` in steps that grow by `factor` until f rises on
 * both sides, staying inside [lower, upper]. Returns nothing when the minimum
 * sits on the boundary or f is flat (infinite) everywhere visited.
 */
template <typename F>
std::optional<Bracket> expand_bracket(F&& f, double seed, double step, double lower, double upper,
                                      double factor = 1.6, int max_steps = 200) {
    double mid = std::clamp(seed, lower, upper);
    double fm = f(mid);
    double lo = std::max(lower, mid - step), hi = std::min(upper, mid + step);
    double flo = f(lo), fhi = f(hi);
    for (int i = 0; i < max_steps; ++i) {
        if (flo > fm && fhi > fm) return Bracket{lo, mid, hi, fm};
        if (flo <= fm && (flo < fhi || fhi > fm)) {
            if (lo <= lower) return std::nullopt;
            hi = mid; fhi = fm;
            mid = lo; fm = flo;
            step *= factor;
            lo = std::max(lower, mid - step);
            flo = f(lo);
        } else {
            if (hi >= upper) return std::nullopt;
            lo = mid; flo = fm;
            mid = hi; fm = fhi;
            step *= factor;
            hi = std::min(upper, mid + step);
            fhi = f(hi);
        }
    }
    return std::nullopt;
}

}  // namespace dprec
