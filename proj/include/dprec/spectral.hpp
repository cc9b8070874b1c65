#pragma once

/**
 * @file spectral.hpp
 * @brief Displacement power spectra S(ω) as sums of Lorentzians.
 *
 *   S(ω) = Σ_k D0·b_k·τ_k² / (π·(1 + ω²τ_k²))
 *
 * The single exponential correlation D0·τ_c·e^{-|τ|/τ_c} is the one-term
 * case b_1 = 1, τ_1 = τ_c. Bounded compartments (slab, cylinder, sphere)
 * come from the Neumann eigen-expansion of the diffusion propagator; the
 * eigenvalues are located numerically from the Bessel derivative zeros.
 */

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dprec/units.hpp"

namespace dprec {

struct LorentzianTerm {
    double weight;  ///< b_k, dimensionless
    double tau;     ///< τ_k [s]
};

class SpectralDensity {
public:
    SpectralDensity(std::vector<LorentzianTerm> terms, double D0) : terms_(std::move(terms)), D0_(D0) {
        if (terms_.empty()) throw std::invalid_argument("spectral density needs at least one term");
        if (!(D0_ > 0.0)) throw std::invalid_argument("D0 must be positive");
        for (const auto& t : terms_) {
            if (!(t.weight > 0.0) || !(t.tau > 0.0) || !std::isfinite(t.weight) || !std::isfinite(t.tau)) {
                throw std::invalid_argument("Lorentzian weights and correlation times must be positive");
            }
        }
    }

    [[nodiscard]] const std::vector<LorentzianTerm>& terms() const noexcept { return terms_; }
    [[nodiscard]] double D0() const noexcept { return D0_; }
    [[nodiscard]] bool is_single_lorentzian() const noexcept { return terms_.size() == 1; }

    [[nodiscard]] double operator()(double omega) const noexcept {
        double s = 0.0;
        for (const auto& t : terms_) {
            const double wt = omega * t.tau;
            s += t.weight * t.tau * t.tau / (1.0 + wt * wt);
        }
        return D0_ * s / std::numbers::pi;
    }

    /// ∂S/∂(ln ℓ_c) at fixed D0 and weights; every τ_k scales as ℓ_c².
    [[nodiscard]] double log_length_derivative(double omega) const noexcept {
        double s = 0.0;
        for (const auto& t : terms_) {
            const double wt = omega * t.tau;
            const double den = 1.0 + wt * wt;
            s += t.weight * t.tau * t.tau / (den * den);
        }
        return 4.0 * D0_ * s / std::numbers::pi;
    }

    /// ∫S dω = D0·Σ b_k·τ_k, the equilibrium displacement variance.
    [[nodiscard]] double variance() const noexcept {
        double s = 0.0;
        for (const auto& t : terms_) s += t.weight * t.tau;
        return D0_ * s;
    }

    /// lim ω²·S(ω) for ω → ∞.
    [[nodiscard]] double high_frequency_coefficient() const noexcept {
        double s = 0.0;
        for (const auto& t : terms_) s += t.weight;
        return D0_ * s / std::numbers::pi;
    }

    [[nodiscard]] double longest_time() const noexcept {
        double m = 0.0;
        for (const auto& t : terms_) m = std::max(m, t.tau);
        return m;
    }

    [[nodiscard]] double shortest_time() const noexcept {
        double m = kInfinity;
        for (const auto& t : terms_) m = std::min(m, t.tau);
        return m;
    }

    /// Every τ_k multiplied by `factor` (a length rescale by √factor).
    [[nodiscard]] SpectralDensity with_scaled_times(double factor) const {
        auto terms = terms_;
        for (auto& t : terms) t.tau *= factor;
        return SpectralDensity(std::move(terms), D0_);
    }

    /// Relative shortfall of the truncated variance versus the analytic one (0 when exact).
    [[nodiscard]] double variance_deficit() const noexcept { return variance_deficit_; }
    [[nodiscard]] bool truncation_warning() const noexcept { return variance_deficit_ > 0.01; }
    void set_variance_deficit(double d) noexcept { variance_deficit_ = d; }

private:
    std::vector<LorentzianTerm> terms_;
    double D0_;
    double variance_deficit_ = 0.0;
};

/// Single-pole spectrum with τ_c taken from the tissue restriction length.
inline SpectralDensity lorentzian_spectrum(const TissueModel& tissue) {
    return SpectralDensity({{1.0, tissue.tau_c()}}, tissue.D0());
}

/// Root-mean-square restriction length ℓ_c² = 2·D0·sqrt(Σ b_k·τ_k²).
inline double restriction_length_of(const SpectralDensity& spectrum) {
    double s = 0.0;
    for (const auto& t : spectrum.terms()) s += t.weight * t.tau * t.tau;
    return std::sqrt(2.0 * spectrum.D0() * std::sqrt(s));
}

// ---------------------------------------------------------------------------
// Neumann eigenvalues
// ---------------------------------------------------------------------------

namespace detail {

/// First `count` positive zeros of f beyond `start`, bracketed on a grid of
/// width `step` and bisected to `tol` absolute.
template <typename F>
std::vector<double> bracketed_zeros(F&& f, std::size_t count, double start, double step, double tol = 1e-12) {
    std::vector<double> roots;
    roots.reserve(count);
    double a = start;
    double fa = f(a);
    while (roots.size() < count) {
        const double b = a + step;
        const double fb = f(b);
        if (fa == 0.0) {
            roots.push_back(a);
        } else if (std::signbit(fa) != std::signbit(fb)) {
            double lo = a, hi = b, flo = fa;
            while (hi - lo > tol) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (std::signbit(fm) == std::signbit(flo)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    return roots;
}

}  // namespace detail

/// Zeros of J1'(x), x > 0.
inline std::vector<double> bessel_j1_derivative_zeros(std::size_t count) {
    auto f = [](double x) { return 0.5 * (std::cyl_bessel_j(0.0, x) - std::cyl_bessel_j(2.0, x)); };
    return detail::bracketed_zeros(f, count, 0.5, 0.05);
}

/// Zeros of j1'(x) (spherical Bessel), x > 0.
inline std::vector<double> spherical_j1_derivative_zeros(std::size_t count) {
    auto f = [](double x) { return std::sph_bessel(0, x) - 2.0 * std::sph_bessel(1, x) / x; };
    return detail::bracketed_zeros(f, count, 0.5, 0.05);
}

// ---------------------------------------------------------------------------
// Geometry expansions
// ---------------------------------------------------------------------------

inline constexpr int kDefaultTruncation = 50;

struct GeometryExpansion {
    Geometry geometry = Geometry::planar;
    double size = 0.0;  ///< slab width or diameter [m]
    int truncation = kDefaultTruncation;
};

/// Analytic equilibrium variance of the coordinate along the gradient.
inline double geometry_variance(Geometry g, double size) {
    switch (g) {
        case Geometry::planar: return size * size / 12.0;
        case Geometry::cylinder_perpendicular: return size * size / 16.0;  // R²/4
        case Geometry::sphere: return size * size / 20.0;                  // R²/5
        case Geometry::generic_lorentzian: break;
    }
    throw std::invalid_argument("geometry has no analytic variance");
}

/**
 * @brief K-term spectrum of a bounded compartment.
 *
 * Position autocorrelation along the gradient, C(τ) = Σ_k B_k·e^{-|τ|/τ_k}:
 *  - slab width a:  τ_k = a²/(D0·(kπ)²), B_k = 8a²/(kπ)⁴, odd k only;
 *  - cylinder radius R: τ_k = R²/(D0·α_k²), B_k = 2R²/(α_k²(α_k²−1)), J1'(α_k) = 0;
 *  - sphere radius R:   τ_k = R²/(D0·α_k²), B_k = 2R²/(α_k²(α_k²−2)), j1'(α_k) = 0.
 * With C(τ) = Σ D0·b_k·τ_k·e^{-|τ|/τ_k}, b_k = B_k/(D0·τ_k). K counts the
 * retained (non-vanishing) modes.
 */
inline SpectralDensity geometry_spectrum(const GeometryExpansion& expansion, double D0) {
    if (expansion.truncation < 1) throw std::invalid_argument("truncation order must be >= 1");
    if (!(expansion.size > 0.0)) throw std::invalid_argument("compartment size must be positive");
    if (!(D0 > 0.0)) throw std::invalid_argument("D0 must be positive");
    const auto K = static_cast<std::size_t>(expansion.truncation);
    const double L = expansion.size;
    std::vector<LorentzianTerm> terms;
    terms.reserve(K);

    switch (expansion.geometry) {
        case Geometry::planar: {
            for (std::size_t j = 0; j < K; ++j) {
                const double kpi = static_cast<double>(2 * j + 1) * std::numbers::pi;
                const double tau = L * L / (D0 * kpi * kpi);
                terms.push_back({8.0 / (kpi * kpi), tau});
            }
            break;
        }
        case Geometry::cylinder_perpendicular:
        case Geometry::sphere: {
            const bool cyl = expansion.geometry == Geometry::cylinder_perpendicular;
            const double R = 0.5 * L;
            const auto alphas = cyl ? bessel_j1_derivative_zeros(K) : spherical_j1_derivative_zeros(K);
            const double shift = cyl ? 1.0 : 2.0;
            for (double a : alphas) {
                const double a2 = a * a;
                const double tau = R * R / (D0 * a2);
                terms.push_back({2.0 / (a2 - shift), tau});
            }
            break;
        }
        case Geometry::generic_lorentzian:
            throw std::invalid_argument("geometry_spectrum needs a bounded geometry");
    }

    SpectralDensity s(std::move(terms), D0);
    const double exact = geometry_variance(expansion.geometry, L);
    s.set_variance_deficit((exact - s.variance()) / exact);
    return s;
}

/// Spectrum matching the tissue: single Lorentzian for the generic model, else
/// either the geometry expansion or (single_pole) a Lorentzian with ℓ_c.
inline SpectralDensity tissue_spectrum(const TissueModel& tissue, bool single_pole,
                                       int truncation = kDefaultTruncation) {
    if (single_pole || tissue.geometry() == Geometry::generic_lorentzian) return lorentzian_spectrum(tissue);
    return geometry_spectrum({tissue.geometry(), tissue.size(), truncation}, tissue.D0());
}

/// Two-column CSV dump (omega_rad_per_s, S).
inline void write_spectrum_csv(std::ostream& os, const SpectralDensity& s, const std::vector<double>& omegas) {
    os << "omega_rad_per_s,S\n";
    char buf[96];
    for (double w : omegas) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", w, s(w));
        os << buf;
    }
}

}  // namespace dprec
