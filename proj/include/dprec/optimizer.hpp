#pragma once

/**
 * @file optimizer.hpp
 * @brief Optimal diffusion time, admissible gradient window and precision
 *        maps over (t, G) and (d, G).
 */

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dprec/fisher.hpp"
#include "dprec/parallel.hpp"
#include "dprec/scalar_min.hpp"
#include "dprec/units.hpp"

namespace dprec {

class NoOptimumError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct GradientWindow {
    double G_low = 0.0;
    double G_high = 0.0;

    [[nodiscard]] bool empty() const noexcept { return !(G_low < G_high); }
};

inline constexpr double kDefaultWindowMargin = 3.0;

/// margin·√(2D0/T2)/(γℓ_c²) < G < 2D0/(margin·γℓ_c³); G_low = 0 without relaxation.
inline GradientWindow gradient_window(const TissueModel& tissue, double gamma, double margin = kDefaultWindowMargin) {
    if (!(margin >= 1.0)) throw std::invalid_argument("window margin must be >= 1");
    const double ell = tissue.ell_c();
    const double D0 = tissue.D0();
    GradientWindow w;
    w.G_low = tissue.has_relaxation() ? margin * std::sqrt(2.0 * D0 / tissue.T2()) / (gamma * ell * ell) : 0.0;
    w.G_high = 2.0 * D0 / (margin * gamma * ell * ell * ell);
    return w;
}

struct OptimizationOutcome {
    double G = 0.0;
    double t_opt = 0.0;
    double epsilon_at_opt = 0.0;  ///< selected error (with T2 when requested)
    double N_equiv_at_opt = 0.0;
    double closed_form_t_opt = 0.0;  ///< (−ln M₀)/(γ²G²D0τ_c²)
    double validity = 0.0;           ///< γ²G²D0τ_c³
    bool at_boundary = false;        ///< optimum pinned to the search interval edge
    PrecisionResult precision;
};

/// Closed-form optimal time for the restricted Hahn regime.
inline double closed_form_optimal_time(const TissueModel& tissue, double G, double gamma) {
    const double tau = tissue.tau_c();
    return ultimate_bound().minus_ln_M / (gamma * gamma * G * G * tissue.D0() * tau * tau);
}

/// Search interval [10⁻³τ_c, min(10³τ_c·max(1, 1/validity), 20·T2)].
inline std::pair<double, double> optimal_time_interval(const SignalModel& model, double G, bool include_T2) {
    const auto& tissue = model.tissue();
    const double tau = tissue.tau_c();
    const double v = efficiency_parameter(tissue, G, model.gamma());
    const double lo = 1e-3 * tau;
    double hi = 1e3 * tau * std::max(1.0, 1.0 / v);
    if (include_T2 && tissue.has_relaxation()) hi = std::min(hi, 20.0 * tissue.T2());
    return {lo, std::max(hi, 10.0 * lo)};
}

/**
 * Maximizes the QFI (minimizes ε) over t on a log scale. The search starts
 * from the closed-form time when the efficiency parameter is below one and
 * from the e⁻¹ decay point otherwise, expands a three-point bracket, and
 * finishes with Brent to a relative tolerance of 1e-5 in t.
 */
inline OptimizationOutcome optimal_time(const SignalModel& model, double G, bool include_T2) {
    if (!(G > 0.0)) throw std::invalid_argument("gradient amplitude must be positive");
    const auto& tissue = model.tissue();
    const auto [lo, hi] = optimal_time_interval(model, G, include_T2);
    const double ulo = std::log(lo), uhi = std::log(hi);

    auto objective = [&](double u) {
        const auto p = qfi(model, G, std::exp(u), include_T2);
        return p.infinite ? std::numeric_limits<double>::infinity() : std::log(p.selected_epsilon());
    };

    OptimizationOutcome out;
    out.G = G;
    out.validity = efficiency_parameter(tissue, G, model.gamma());
    out.closed_form_t_opt = closed_form_optimal_time(tissue, G, model.gamma());

    double seed;
    if (out.validity < 1.0) {
        seed = out.closed_form_t_opt;
    } else {
        // β(t) = 1 crossing by bisection in log t.
        double a = ulo, b = uhi;
        if (model.evaluate(G, hi).beta < 1.0) {
            seed = hi;
        } else {
            for (int i = 0; i < 100 && b - a > 1e-6; ++i) {
                const double m = 0.5 * (a + b);
                (model.evaluate(G, std::exp(m)).beta < 1.0 ? a : b) = m;
            }
            seed = std::exp(0.5 * (a + b));
        }
    }
    const double useed = std::clamp(std::log(seed), ulo, uhi);

    constexpr double kLogTol = 1e-5;
    double ubest;
    if (auto br = expand_bracket(objective, useed, 0.25, ulo, uhi)) {
        ubest = brent_minimize(objective, br->lo, br->hi, kLogTol).x;
    } else {
        // Boundary optimum or irregular objective: dense scan, then refine.
        constexpr int kScan = 240;
        int best = -1;
        double fbest = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= kScan; ++i) {
            const double u = ulo + (uhi - ulo) * i / kScan;
            const double f = objective(u);
            if (f < fbest) {
                fbest = f;
                best = i;
            }
        }
        if (best < 0) throw NoOptimumError("no diffusion time gives usable contrast (flat objective)");
        const double h = (uhi - ulo) / kScan;
        const double a = std::max(ulo, ulo + (best - 1) * h), b = std::min(uhi, ulo + (best + 1) * h);
        ubest = brent_minimize(objective, a, b, kLogTol).x;
        if (objective(ubest) > fbest) ubest = ulo + best * h;
    }
    out.t_opt = std::exp(ubest);
    out.at_boundary = (ubest - ulo) < 1e-3 || (uhi - ubest) < 1e-3;
    out.precision = qfi(model, G, out.t_opt, include_T2);
    if (out.precision.infinite) throw NoOptimumError("no diffusion time gives usable contrast");
    out.epsilon_at_opt = out.precision.selected_epsilon();
    out.N_equiv_at_opt = out.precision.N_equiv;
    return out;
}

/// Joint optimum over G in [G_min, G_max] (log scan + Brent) and t.
inline OptimizationOutcome optimal_protocol(const SignalModel& model, double G_min, double G_max, bool include_T2) {
    if (!(G_min > 0.0) || !(G_max > G_min)) throw std::invalid_argument("need 0 < G_min < G_max");
    auto objective = [&](double v) {
        try {
            return std::log(optimal_time(model, std::exp(v), include_T2).epsilon_at_opt);
        } catch (const NoOptimumError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const double a = std::log(G_min), b = std::log(G_max);
    constexpr int kScan = 48;
    int best = -1;
    double fbest = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
        const double f = objective(a + (b - a) * i / kScan);
        if (f < fbest) {
            fbest = f;
            best = i;
        }
    }
    if (best < 0) throw NoOptimumError("no gradient in range gives usable contrast");
    const double h = (b - a) / kScan;
    const double lo = std::max(a, a + (best - 1) * h), hi = std::min(b, a + (best + 1) * h);
    double v = brent_minimize(objective, lo, hi, 1e-4).x;
    if (objective(v) > fbest) v = a + best * h;
    return optimal_time(model, std::exp(v), include_T2);
}

// ---------------------------------------------------------------------------
// Measurement count
// ---------------------------------------------------------------------------

struct MeasurementCount {
    double ratio;       ///< (ε/ε₀)²
    std::uint64_t N;    ///< ⌈ratio⌉
};

inline MeasurementCount measurements_needed(double epsilon) {
    const double e0 = epsilon_0();
    if (epsilon < e0 * (1.0 - 1e-9)) {
        throw std::logic_error("relative error below the ultimate bound: internal inconsistency");
    }
    const double ratio = std::max(1.0, (epsilon / e0) * (epsilon / e0));
    if (!std::isfinite(ratio)) return {ratio, std::numeric_limits<std::uint64_t>::max()};
    return {ratio, static_cast<std::uint64_t>(std::ceil(ratio * (1.0 - 1e-12)))};
}

// ---------------------------------------------------------------------------
// Maps
// ---------------------------------------------------------------------------

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (n == 0) throw std::invalid_argument("grid needs at least one point");
    if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log grid needs 0 < lo <= hi");
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

struct PrecisionMap {
    std::string axis1_name;
    std::string axis2_name;
    std::string value_name;
    std::vector<double> axis1;
    std::vector<double> axis2;
    std::vector<double> values;    ///< row-major: index i1·|axis2| + i2
    std::vector<char> infinite;    ///< flagged cells (no usable contrast)

    [[nodiscard]] double at(std::size_t i1, std::size_t i2) const { return values[i1 * axis2.size() + i2]; }
    [[nodiscard]] bool is_infinite(std::size_t i1, std::size_t i2) const {
        return infinite[i1 * axis2.size() + i2] != 0;
    }
    /// Values along axis2 at fixed axis1 index.
    [[nodiscard]] std::vector<double> row(std::size_t i1) const {
        return {values.begin() + static_cast<std::ptrdiff_t>(i1 * axis2.size()),
                values.begin() + static_cast<std::ptrdiff_t>((i1 + 1) * axis2.size())};
    }
};

namespace detail {

inline void check_grid(const std::vector<double>& g, const char* name) {
    if (g.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0)) throw std::invalid_argument(std::string(name) + " grid must be positive");
        if (i > 0 && !(g[i] > g[i - 1])) throw std::invalid_argument(std::string(name) + " grid must increase");
    }
}

}  // namespace detail

/// ε₀/ε including relaxation over t (axis 1) × G (axis 2).
inline PrecisionMap precision_map_tG(const SignalModel& model, const std::vector<double>& G_grid,
                                     const std::vector<double>& t_grid, unsigned threads = 0) {
    detail::check_grid(G_grid, "G");
    detail::check_grid(t_grid, "t");
    PrecisionMap map{"t_s", "G_T_per_m", "eps0_over_eps", t_grid, G_grid, {}, {}};
    const std::size_t n2 = G_grid.size();
    map.values.assign(t_grid.size() * n2, 0.0);
    map.infinite.assign(t_grid.size() * n2, 0);
    const double e0 = epsilon_0();
    parallel_for(map.values.size(), threads, [&](std::size_t k) {
        const auto p = qfi(model, G_grid[k % n2], t_grid[k / n2], true);
        map.infinite[k] = p.infinite ? 1 : 0;
        map.values[k] = p.infinite ? 0.0 : e0 / p.epsilon_T2;
    });
    return map;
}

/// (ε/ε₀)² at the per-cell optimal time (with relaxation) over d (axis 1) × G (axis 2).
/// `tissue_for_size` builds the tissue for a given size, e.g. a cylinder of diameter d.
template <typename TissueFactory>
PrecisionMap precision_map_dG(const SignalModel& model_template, TissueFactory&& tissue_for_size,
                              const std::vector<double>& d_grid, const std::vector<double>& G_grid,
                              unsigned threads = 0) {
    detail::check_grid(d_grid, "d");
    detail::check_grid(G_grid, "G");
    PrecisionMap map{"d_m", "G_T_per_m", "eps_over_eps0_squared", d_grid, G_grid, {}, {}};
    const std::size_t n2 = G_grid.size();
    map.values.assign(d_grid.size() * n2, 0.0);
    map.infinite.assign(d_grid.size() * n2, 0);
    parallel_for(map.values.size(), threads, [&](std::size_t k) {
        const auto model = model_template.with_tissue(tissue_for_size(d_grid[k / n2]));
        try {
            const auto o = optimal_time(model, G_grid[k % n2], true);
            map.values[k] = o.N_equiv_at_opt;
        } catch (const NoOptimumError&) {
            map.infinite[k] = 1;
            map.values[k] = std::numeric_limits<double>::infinity();
        }
    }, 1);
    return map;
}

inline PrecisionMap precision_map_dG(const SignalModel& model_template, const std::vector<double>& d_grid,
                                     const std::vector<double>& G_grid, unsigned threads = 0) {
    const auto& base = model_template.tissue();
    return precision_map_dG(
        model_template, [&](double d) { return TissueModel::make(base.geometry(), d, base.D0(), base.T2()); },
        d_grid, G_grid, threads);
}

/// Header `# axis1=<name> axis2=<name> value=<name>` then long-form rows.
inline void write_map_csv(std::ostream& os, const PrecisionMap& map) {
    os << "# axis1=" << map.axis1_name << " axis2=" << map.axis2_name << " value=" << map.value_name << '\n';
    char buf[128];
    for (std::size_t i = 0; i < map.axis1.size(); ++i) {
        for (std::size_t j = 0; j < map.axis2.size(); ++j) {
            const double v = map.at(i, j);
            if (std::isinf(v)) {
                std::snprintf(buf, sizeof buf, "%.12g,%.12g,inf\n", map.axis1[i], map.axis2[j]);
            } else {
                std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", map.axis1[i], map.axis2[j], v);
            }
            os << buf;
        }
    }
}

}  // namespace dprec
