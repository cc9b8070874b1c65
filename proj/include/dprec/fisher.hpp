#pragma once

/**
 * @file fisher.hpp
 * @brief Quantum Fisher information for the restriction length and the
 *        Cramér–Rao relative error per measurement.
 *
 * For a normalized signal M̃ = e^{−β} the QFI about ℓ_c is
 *
 *   F_Q = M̃²/(1 − M̃²) · (∂ln M̃/∂ℓ_c)²,      ε = 1/(ℓ_c·√F_Q).
 *
 * Writing s = ∂β/∂(ln ℓ_c) gives ε = √(1 − M̃²)/(M̃·|s|), which is evaluated
 * in log space so that strongly attenuated points stay finite as long as
 * they are representable. With relaxation the amplitude factor uses
 * e^{−t/T2}·M̃ while s is unchanged (T2 carries no ℓ_c information).
 */

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dprec/attenuation.hpp"
#include "dprec/lambert_w.hpp"
#include "dprec/spectral.hpp"
#include "dprec/units.hpp"
#include "dprec/waveform.hpp"

namespace dprec {

// ---------------------------------------------------------------------------
// Ultimate bound
// ---------------------------------------------------------------------------

struct UltimateBound {
    double M_opt;        ///< optimal contrast M₀
    double minus_ln_M;   ///< −ln M₀ = 1 + W₀(−2e⁻²)/2
    double epsilon_0;    ///< √(1 − M₀²)/(4·(−ln M₀)·M₀)
    double lambert_arg;  ///< −2e⁻²
    double lambert_value;
};

inline UltimateBound ultimate_bound() {
    const double z = -2.0 * std::exp(-2.0);
    const double w = lambert_w0(z);
    const double b = 1.0 + 0.5 * w;
    const double M = std::exp(-b);
    const double eps = std::sqrt(-std::expm1(-2.0 * b)) / (4.0 * b * M);
    return {M, b, eps, z, w};
}

/// ε₀, computed once.
inline double epsilon_0() {
    static const double value = ultimate_bound().epsilon_0;
    return value;
}

/// √(1 − M²)/(4·(−ln M)·M); +∞ outside the open interval (0, 1).
inline double error_lower_envelope(double M_norm) {
    if (!(M_norm > 0.0) || !(M_norm < 1.0)) return std::numeric_limits<double>::infinity();
    const double b = -std::log(M_norm);
    return std::sqrt(-std::expm1(-2.0 * b)) / (4.0 * b * M_norm);
}

/// Bound with relaxation, e^{t/T2}·ε₀.
inline double t2_bound(double t, double T2) {
    if (!(t >= 0.0)) throw std::invalid_argument("t must be non-negative");
    if (!(T2 > 0.0)) throw std::invalid_argument("T2 must be positive");
    return std::exp(t / T2) * epsilon_0();
}

// ---------------------------------------------------------------------------
// Signal model
// ---------------------------------------------------------------------------

enum class SequenceKind { hahn, pgse };

/// PGSE family parameterized by total time t: δ = fraction·t, Δ = t − δ.
struct SequenceFamily {
    SequenceKind kind = SequenceKind::hahn;
    double delta_fraction = 0.5;

    static SequenceFamily hahn() { return {SequenceKind::hahn, 0.5}; }
    static SequenceFamily pgse(double delta_fraction) {
        if (!(delta_fraction > 0.0) || delta_fraction > 0.5) {
            throw std::invalid_argument("PGSE delta fraction must lie in (0, 0.5]");
        }
        return {SequenceKind::pgse, delta_fraction};
    }

    [[nodiscard]] bool is_hahn() const noexcept {
        return kind == SequenceKind::hahn || delta_fraction == 0.5;
    }

    [[nodiscard]] GradientWaveform waveform(double G, double t) const {
        const double delta = is_hahn() ? 0.5 * t : delta_fraction * t;
        return pgse_waveform({delta, t - delta, G});
    }
};

enum class Engine { automatic, closed_form, time_domain, frequency };

inline Engine engine_from_string(std::string_view s) {
    if (s == "auto") return Engine::automatic;
    if (s == "hahn" || s == "closed-form") return Engine::closed_form;
    if (s == "time") return Engine::time_domain;
    if (s == "freq") return Engine::frequency;
    throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected auto|hahn|time|freq)");
}

struct SignalPoint {
    double beta;
    double log_sensitivity;  ///< ∂β/∂(ln ℓ_c)
    AttenuationMethod method;
};

/**
 * @brief Tissue + sequence family + evaluation route.
 *
 * The default spectrum is the single Lorentzian with the tissue ℓ_c; set
 * single_pole = false to use the geometry eigen-expansion instead.
 */
class SignalModel {
public:
    explicit SignalModel(TissueModel tissue, SequenceFamily family = SequenceFamily::hahn(),
                         Engine engine = Engine::automatic, double gamma = kProtonGamma, bool single_pole = true,
                         int truncation = kDefaultTruncation)
        : tissue_(tissue),
          family_(family),
          gamma_(PhysicalConstants(gamma).gamma),
          single_pole_(single_pole),
          truncation_(truncation),
          spectrum_(tissue_spectrum(tissue, single_pole, truncation)) {
        engine_ = resolve(engine);
    }

    [[nodiscard]] const TissueModel& tissue() const noexcept { return tissue_; }
    [[nodiscard]] const SequenceFamily& family() const noexcept { return family_; }
    [[nodiscard]] const SpectralDensity& spectrum() const noexcept { return spectrum_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] Engine engine() const noexcept { return engine_; }

    [[nodiscard]] SignalModel with_tissue(const TissueModel& t) const {
        return SignalModel(t, family_, engine_, gamma_, single_pole_, truncation_);
    }

    [[nodiscard]] SignalPoint evaluate(double G, double t) const {
        if (!(t > 0.0)) throw std::invalid_argument("diffusion time must be positive");
        if (G == 0.0) return {0.0, 0.0, method()};
        switch (engine_) {
            case Engine::closed_form:
                return {hahn_closed_form(tissue_, G, t, gamma_).beta, hahn_log_sensitivity(tissue_, G, t, gamma_),
                        AttenuationMethod::hahn_closed_form};
            case Engine::time_domain: {
                const auto w = family_.waveform(G, t);
                const auto& term = spectrum_.terms().front();
                const double beta = term.weight * time_domain_beta(w, term.tau, spectrum_.D0(), gamma_);
                const auto sens = time_domain_log_sensitivity(w, term.tau, spectrum_.D0(), gamma_);
                if (sens.discrepancy > 1e-6) {
                    throw NumericalError("finite-difference sensitivity failed the Richardson check");
                }
                return {beta, term.weight * sens.value, AttenuationMethod::time_domain_exact};
            }
            case Engine::frequency:
            case Engine::automatic: {
                const auto w = family_.waveform(G, t);
                return {attenuation_freq(w, spectrum_, gamma_).beta,
                        attenuation_freq_log_sensitivity(w, spectrum_, gamma_), AttenuationMethod::freq_quadrature};
            }
        }
        return {0.0, 0.0, method()};
    }

    [[nodiscard]] AttenuationMethod method() const noexcept {
        switch (engine_) {
            case Engine::closed_form: return AttenuationMethod::hahn_closed_form;
            case Engine::time_domain: return AttenuationMethod::time_domain_exact;
            default: return AttenuationMethod::freq_quadrature;
        }
    }

private:
    Engine resolve(Engine requested) const {
        const bool single = spectrum_.is_single_lorentzian();
        switch (requested) {
            case Engine::automatic:
                if (!single) return Engine::frequency;
                return family_.is_hahn() ? Engine::closed_form : Engine::time_domain;
            case Engine::closed_form:
                if (!single || !family_.is_hahn()) {
                    throw UnsupportedModelError("closed form needs a Hahn echo and a single Lorentzian");
                }
                return requested;
            case Engine::time_domain:
                if (!single) throw UnsupportedModelError("time-domain route needs a single Lorentzian");
                return requested;
            case Engine::frequency: return requested;
        }
        return requested;
    }

    TissueModel tissue_;
    SequenceFamily family_;
    double gamma_;
    bool single_pole_;
    int truncation_;
    SpectralDensity spectrum_;
    Engine engine_ = Engine::automatic;
};

// ---------------------------------------------------------------------------
// Precision
// ---------------------------------------------------------------------------

struct PrecisionResult {
    double qfi = 0.0;         ///< [m⁻²], of the signal selected by include_T2
    double epsilon = 0.0;     ///< relaxation-free relative error per measurement
    double epsilon_T2 = 0.0;  ///< with e^{−t/T2} amplitude (== epsilon when T2 = ∞)
    double N_equiv = 0.0;     ///< (ε_selected/ε₀)²
    double t = 0.0;
    double G = 0.0;
    double beta = 0.0;
    double M_norm = 1.0;
    double M_norm_T2 = 1.0;
    double log_sensitivity = 0.0;
    bool include_T2 = false;
    bool infinite = false;  ///< no usable contrast (M̃ numerically 0 or 1)

    [[nodiscard]] double selected_epsilon() const noexcept { return include_T2 ? epsilon_T2 : epsilon; }
};

namespace detail {

/// ε for total decay exponent λ (β, or β + t/T2) and sensitivity s.
inline double relative_error(double lambda, double s) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (!(lambda > 0.0) || s == 0.0 || !std::isfinite(lambda) || !std::isfinite(s)) return kInf;
    if (std::exp(-lambda) == 0.0) return kInf;
    const double log_eps = 0.5 * std::log(-std::expm1(-2.0 * lambda)) + lambda - std::log(std::abs(s));
    return std::exp(log_eps);
}

}  // namespace detail

/// Builds the precision record from an evaluated signal point.
inline PrecisionResult precision_from_point(const SignalPoint& p, const TissueModel& tissue, double G, double t,
                                            bool include_T2) {
    PrecisionResult r;
    r.t = t;
    r.G = G;
    r.beta = p.beta;
    r.log_sensitivity = p.log_sensitivity;
    r.include_T2 = include_T2;
    const double relax = tissue.has_relaxation() ? t / tissue.T2() : 0.0;
    r.M_norm = std::exp(-p.beta);
    r.M_norm_T2 = std::exp(-p.beta - relax);
    r.epsilon = detail::relative_error(p.beta, p.log_sensitivity);
    // With relaxation the decay exponent is β + t/T2 but the sensitivity is still s.
    r.epsilon_T2 = (relax > 0.0 && p.beta > 0.0) ? detail::relative_error(p.beta + relax, p.log_sensitivity)
                                                 : r.epsilon;
    const double eps = r.selected_epsilon();
    r.infinite = !std::isfinite(eps);
    const double ell = tissue.ell_c();
    r.qfi = r.infinite ? 0.0 : 1.0 / (ell * ell * eps * eps);
    const double e0 = epsilon_0();
    r.N_equiv = r.infinite ? std::numeric_limits<double>::infinity() : (eps / e0) * (eps / e0);
    return r;
}

inline PrecisionResult qfi(const SignalModel& model, double G, double t, bool include_T2) {
    return precision_from_point(model.evaluate(G, t), model.tissue(), G, t, include_T2);
}

/// Fisher information about any length L proportional to ℓ_c (e.g. the
/// diameter): F_L = M²/(1−M²)·(∂β/∂L)² with ∂β/∂L = s/L.
inline double fisher_information_for_length(const PrecisionResult& r, double length) {
    if (r.infinite) return 0.0;
    const double M = r.include_T2 ? r.M_norm_T2 : r.M_norm;
    const double dbeta = r.log_sensitivity / length;
    return M * M / (-std::expm1(2.0 * std::log(M))) * dbeta * dbeta;
}

}  // namespace dprec
