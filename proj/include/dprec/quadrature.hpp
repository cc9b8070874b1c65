#pragma once

/**
 * @file quadrature.hpp
 * @brief Globally adaptive Gauss–Kronrod (7/15) integration with an
 *        evaluation budget.
 *
 * The interval is first split into caller-supplied panels, then the panel
 * with the largest error estimate is bisected until the summed error drops
 * below max(abs_tol, rel_tol·|I|). Exhausting the budget throws
 * QuadratureError carrying the diagnostics.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace dprec {

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    std::size_t intervals = 0;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, QuadratureResult partial)
        : NumericalError(what), partial_(partial) {}
    [[nodiscard]] const QuadratureResult& partial() const noexcept { return partial_; }

private:
    QuadratureResult partial_;
};

struct QuadratureOptions {
    double rel_tol = 1e-9;
    double abs_tol = 0.0;
    std::size_t max_evaluations = 1'000'000;
};

namespace detail {

// Kronrod 15-point nodes (non-negative half) and weights; the odd-indexed
// nodes are the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const noexcept { return error < o.error; }
};

template <typename F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    return {a, b, resk * h, std::abs((resk - resg) * h)};
}

}  // namespace detail

/// Integrates f over consecutive panels [edges[i], edges[i+1]].
template <typename F>
QuadratureResult integrate_panels(F&& f, const std::vector<double>& edges, const QuadratureOptions& opt = {}) {
    if (edges.size() < 2) throw std::invalid_argument("integration needs at least one panel");
    constexpr std::size_t kPerPanel = 15;
    QuadratureResult r;
    std::priority_queue<detail::Panel> heap;
    double total = 0.0, err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i + 1] > edges[i])) throw std::invalid_argument("panel edges must increase");
        auto p = detail::gk15(f, edges[i], edges[i + 1]);
        r.evaluations += kPerPanel;
        total += p.value;
        err += p.error;
        heap.push(p);
    }
    auto converged = [&] { return err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
    while (!converged()) {
        if (r.evaluations + 2 * kPerPanel > opt.max_evaluations) {
            r.value = total;
            r.error = err;
            r.intervals = heap.size();
            throw QuadratureError("adaptive quadrature did not converge within " +
                                      std::to_string(opt.max_evaluations) + " evaluations (value " +
                                      std::to_string(total) + ", error estimate " + std::to_string(err) + ")",
                                  r);
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval collapsed to machine resolution; accept its estimate.
            err -= worst.error;
            heap.push({worst.a, worst.b, worst.value, 0.0});
            continue;
        }
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        r.evaluations += 2 * kPerPanel;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum in panel order for a result independent of heap arithmetic drift.
    std::vector<detail::Panel> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    double sum = 0.0, esum = 0.0;
    for (const auto& p : panels) {
        sum += p.value;
        esum += p.error;
    }
    r.value = sum;
    r.error = esum;
    r.intervals = panels.size();
    return r;
}

template <typename F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    return integrate_panels(std::forward<F>(f), std::vector<double>{a, b}, opt);
}

}  // namespace dprec
