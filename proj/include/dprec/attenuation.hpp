#pragma once

/**
 * @file attenuation.hpp
 * @brief Signal attenuation β = ½⟨φ²⟩ under the Gaussian-phase model.
 *
 * Three routes:
 *  - frequency quadrature   β = ½·γ²·2π·∫F_t(ω)·S(ω)dω  (any spectrum)
 *  - exact time domain      β = ½·γ²·ΣᵢΣⱼ GᵢGⱼ·∫∫ C(t₁−t₂)  (single Lorentzian)
 *  - Hahn closed form       β = γ²G²D0τ_c²·t·[1 − (τ_c/t)(3 + e^{−t/τ_c} − 4e^{−t/2τ_c})]
 *
 * The 2π in the frequency route comes from the 1/2π carried by both F_t and
 * S(ω) = (1/2π)∫C(τ)e^{−iωτ}dτ; it makes the three routes agree.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string_view>
#include <vector>

#include "dprec/quadrature.hpp"
#include "dprec/spectral.hpp"
#include "dprec/units.hpp"
#include "dprec/waveform.hpp"

namespace dprec {

enum class AttenuationMethod { freq_quadrature, time_domain_exact, hahn_closed_form };

inline std::string_view to_string(AttenuationMethod m) {
    switch (m) {
        case AttenuationMethod::freq_quadrature: return "freq-quadrature";
        case AttenuationMethod::time_domain_exact: return "time-domain-exact";
        case AttenuationMethod::hahn_closed_form: return "hahn-closed-form";
    }
    return "unknown";
}

struct AttenuationResult {
    double beta = 0.0;
    double M_norm = 1.0;
    double M_norm_T2 = 1.0;
    double t = 0.0;
    AttenuationMethod method = AttenuationMethod::time_domain_exact;
    std::size_t evaluations = 0;  ///< integrand evaluations (quadrature route only)
};

class UnsupportedModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline AttenuationResult make_result(double beta, double t, AttenuationMethod m) {
    AttenuationResult r;
    r.beta = beta;
    r.M_norm = std::exp(-beta);
    r.M_norm_T2 = r.M_norm;
    r.t = t;
    r.method = m;
    return r;
}

/// y − 1 + e^{−y} without cancellation.
inline double phi2(double y) noexcept {
    if (y < 0.1) {
        // y²/2 − y³/6 + y⁴/24 − …
        double term = y * y / 2.0, sum = 0.0;
        for (int n = 2; n < 20 && std::abs(term) > 1e-18 * std::abs(sum); ++n) {
            sum += term;
            term *= -y / (n + 1);
        }
        return sum;
    }
    return y + std::expm1(-y);
}

/// Hahn shape functions of x = t/τ_c:
///   g(x) = x − 3 − e^{−x} + 4e^{−x/2} = Σ_{n≥3} (−1)ⁿ(4·2⁻ⁿ − 1)xⁿ/n!
///   B(x) = g(x)/x                 (β = γ²G²D0τ_c²·t·B)
///   H(x) = 3g(x)/x − g'(x)        (∂β/∂lnτ_c = γ²G²D0τ_c²·t·H)
struct HahnShape {
    double B;
    double H;
};

inline HahnShape hahn_shape(double x) noexcept {
    if (x < 1.0) {
        double B = 0.0, H = 0.0;
        double pow_over_fact = x / 2.0;  // x^{n−1}/n! at n = 2
        double two_pow = 0.25;               // 2^{−n}
        for (int n = 3; n < 40; ++n) {
            pow_over_fact *= x / n;
            two_pow *= 0.5;
            const double c = ((n % 2 == 0) ? 1.0 : -1.0) * (4.0 * two_pow - 1.0) * pow_over_fact;
            B += c;
            H += (3.0 - n) * c;
            if (std::abs(c) < 1e-18 * std::abs(B)) break;
        }
        return {B, H};
    }
    const double m = -std::expm1(-0.5 * x);
    const double g = x - 2.0 * m - m * m;
    return {g / x, 3.0 * g / x - m * m};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Frequency quadrature
// ---------------------------------------------------------------------------

namespace detail {

/// Panels for ∫₀^Ω F(ω)·g(ω) dω, with Ω where the envelope (1/2π)(2A/ω)²·g(ω)
/// drops below 1e-14 of the integrand peak.
template <typename G>
std::vector<double> frequency_panels(const GradientWaveform& w, const SpectralDensity& s, G&& weight) {
    const double t = w.duration();
    const double period = 2.0 * std::numbers::pi / t;
    double A = 0.0;
    for (const auto& seg : w.segments()) A += std::abs(seg.amplitude);

    double peak = 0.0;
    for (int i = 1; i <= 1600; ++i) {
        const double om = period * i / 16.0;
        peak = std::max(peak, filter_value(w, om) * weight(om));
    }
    for (const auto& term : s.terms()) {
        for (double f : {0.1, 0.3, 1.0, 3.0, 10.0}) {
            const double om = f / term.tau;
            peak = std::max(peak, filter_value(w, om) * weight(om));
        }
    }
    std::vector<double> edges{0.0};
    if (peak == 0.0) {
        edges.push_back(period);
        return edges;
    }
    auto envelope = [&](double om) { return (2.0 * A / om) * (2.0 * A / om) * weight(om) / (2.0 * std::numbers::pi); };
    double cutoff = period;
    while (envelope(cutoff) > 1e-14 * peak) cutoff *= 1.25;

    // Resolve slow Lorentzian knees below the first oscillation period.
    const double knee = 1.0 / s.longest_time();
    if (knee < period) {
        for (double om = 0.01 * knee; om < period; om *= 4.0) edges.push_back(om);
    }
    constexpr double kMaxPanels = 20000.0;
    const double width = std::max(period, cutoff / kMaxPanels);
    for (double om = width; om < cutoff + 0.5 * width; om += width) {
        if (om > edges.back()) edges.push_back(om);
    }
    return edges;
}

template <typename G>
QuadratureResult frequency_integral(const GradientWaveform& w, const SpectralDensity& s, G&& weight,
                                    const QuadratureOptions& opt) {
    auto edges = frequency_panels(w, s, weight);
    auto integrand = [&](double om) { return filter_value(w, om) * weight(om); };
    return integrate_panels(integrand, edges, opt);
}

}  // namespace detail

/// β = ½·γ²·2π·2∫₀^∞ F·S dω (evenness used).
inline AttenuationResult attenuation_freq(const GradientWaveform& w, const SpectralDensity& s, double gamma,
                                          const QuadratureOptions& opt = {}) {
    if (w.max_amplitude() == 0.0) return detail::make_result(0.0, w.duration(), AttenuationMethod::freq_quadrature);
    auto q = detail::frequency_integral(w, s, [&](double om) { return s(om); }, opt);
    const double beta = 0.5 * gamma * gamma * 2.0 * std::numbers::pi * 2.0 * q.value;
    auto r = detail::make_result(beta, w.duration(), AttenuationMethod::freq_quadrature);
    r.evaluations = q.evaluations;
    return r;
}

/// ∂β/∂(ln ℓ_c) through ∂S/∂(ln ℓ_c) = Σ 4·S_k/(1+ω²τ_k²).
inline double attenuation_freq_log_sensitivity(const GradientWaveform& w, const SpectralDensity& s, double gamma,
                                               const QuadratureOptions& opt = {}) {
    if (w.max_amplitude() == 0.0) return 0.0;
    auto q = detail::frequency_integral(w, s, [&](double om) { return s.log_length_derivative(om); }, opt);
    return 0.5 * gamma * gamma * 2.0 * std::numbers::pi * 2.0 * q.value;
}

// ---------------------------------------------------------------------------
// Exact time domain (exponential correlation)
// ---------------------------------------------------------------------------

/// β for C(τ) = D0·τ_c·e^{−|τ|/τ_c} from closed-form rectangle integrals.
inline double time_domain_beta(const GradientWaveform& w, double tau, double D0, double gamma) {
    const auto& segs = w.segments();
    const std::size_t n = segs.size();
    std::vector<double> start(n), m(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        start[i] = (i == 0) ? 0.0 : start[i - 1] + segs[i - 1].duration;
        m[i] = -std::expm1(-segs[i].duration / tau);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double Gi = segs[i].amplitude;
        if (Gi == 0.0) continue;
        // ∫∫ over the diagonal block: 2τ²·(y − 1 + e^{−y})
        acc += Gi * Gi * 2.0 * tau * tau * detail::phi2(segs[i].duration / tau);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double Gj = segs[j].amplitude;
            if (Gj == 0.0) continue;
            const double gap = start[j] - (start[i] + segs[i].duration);
            acc += 2.0 * Gi * Gj * tau * tau * std::exp(-gap / tau) * m[i] * m[j];
        }
    }
    return 0.5 * gamma * gamma * D0 * tau * acc;
}

inline AttenuationResult attenuation_time_exact(const GradientWaveform& w, const SpectralDensity& s, double gamma) {
    if (!s.is_single_lorentzian()) {
        throw UnsupportedModelError("exact time-domain attenuation needs a single-Lorentzian spectrum");
    }
    // C(τ) = D0·b·τ₁·e^{−|τ|/τ₁}: the weight is an overall factor.
    const auto& term = s.terms().front();
    return detail::make_result(term.weight * time_domain_beta(w, term.tau, s.D0(), gamma), w.duration(),
                               AttenuationMethod::time_domain_exact);
}

inline AttenuationResult attenuation_time_exact(const GradientWaveform& w, const TissueModel& tissue, double gamma) {
    return attenuation_time_exact(w, lorentzian_spectrum(tissue), gamma);
}

struct SensitivityEstimate {
    double value;        ///< Richardson-extrapolated derivative
    double discrepancy;  ///< |Richardson − plain central difference| / |Richardson|
};

/// ∂β/∂(ln ℓ_c) by central differences in ℓ_c (step 1e-4·ℓ_c) with one
/// Richardson extrapolation. `beta_of` maps a log-length offset to β.
template <typename F>
SensitivityEstimate richardson_log_derivative(F&& beta_of, double h = 1e-4) {
    const double d1 = (beta_of(h) - beta_of(-h)) / (2.0 * h);
    const double d2 = (beta_of(0.5 * h) - beta_of(-0.5 * h)) / h;
    const double r = (4.0 * d2 - d1) / 3.0;
    const double disc = (r == 0.0) ? std::abs(d2) : std::abs(r - d2) / std::abs(r);
    return {r, disc};
}

inline SensitivityEstimate time_domain_log_sensitivity(const GradientWaveform& w, double tau, double D0,
                                                       double gamma) {
    // τ ∝ ℓ², so a log-length offset h multiplies τ by e^{2h}.
    return richardson_log_derivative(
        [&](double h) { return time_domain_beta(w, tau * std::exp(2.0 * h), D0, gamma); });
}

// ---------------------------------------------------------------------------
// Hahn closed form
// ---------------------------------------------------------------------------

inline AttenuationResult hahn_closed_form(const TissueModel& tissue, double G, double t, double gamma) {
    if (!(t > 0.0)) throw std::invalid_argument("diffusion time must be positive");
    const double tau = tissue.tau_c();
    const auto shape = detail::hahn_shape(t / tau);
    const double beta = gamma * gamma * G * G * tissue.D0() * tau * tau * t * shape.B;
    return detail::make_result(beta, t, AttenuationMethod::hahn_closed_form);
}

/// Analytic ∂β/∂(ln ℓ_c) = 2·∂β/∂(ln τ_c) for the Hahn echo.
inline double hahn_log_sensitivity(const TissueModel& tissue, double G, double t, double gamma) {
    const double tau = tissue.tau_c();
    const auto shape = detail::hahn_shape(t / tau);
    return 2.0 * gamma * gamma * G * G * tissue.D0() * tau * tau * t * shape.H;
}

// ---------------------------------------------------------------------------
// Relaxation
// ---------------------------------------------------------------------------

inline AttenuationResult apply_T2(AttenuationResult r, double T2, double t) {
    if (!(T2 > 0.0)) throw std::invalid_argument("T2 must be positive (or infinite)");
    r.M_norm_T2 = std::isfinite(T2) ? std::exp(-t / T2) * r.M_norm : r.M_norm;
    return r;
}

}  // namespace dprec
