#pragma once

/**
 * @file units.hpp
 * @brief Physical constants, tissue description and characteristic length scales.
 *
 * Everything inside the library is strict SI: metres, seconds, tesla,
 * rad·s⁻¹·T⁻¹. Convenience units (μm, ms, mT/m, G/cm, cm²/s) only appear
 * at the command-line boundary through convert_units().
 */

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dprec {

/// Proton gyromagnetic ratio [rad·s⁻¹·T⁻¹].
inline constexpr double kProtonGamma = 2.6752218744e8;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Ratio ℓ_c/d used for cylinders perpendicular to the gradient.
inline constexpr double kCylinderRestrictionRatio = 0.37;

struct PhysicalConstants {
    double gamma = kProtonGamma;

    explicit PhysicalConstants(double gamma_ = kProtonGamma) : gamma(gamma_) {
        if (!(gamma > 0.0) || !std::isfinite(gamma)) {
            throw std::invalid_argument("gyromagnetic ratio must be positive and finite");
        }
    }
};

enum class Geometry { generic_lorentzian, planar, cylinder_perpendicular, sphere };

inline std::string_view to_string(Geometry g) {
    switch (g) {
        case Geometry::generic_lorentzian: return "lorentzian";
        case Geometry::planar: return "planar";
        case Geometry::cylinder_perpendicular: return "cylinder";
        case Geometry::sphere: return "sphere";
    }
    return "unknown";
}

inline Geometry geometry_from_string(std::string_view s) {
    if (s == "lorentzian" || s == "generic" || s == "generic-lorentzian") return Geometry::generic_lorentzian;
    if (s == "planar" || s == "slab") return Geometry::planar;
    if (s == "cylinder" || s == "cylinder-perpendicular") return Geometry::cylinder_perpendicular;
    if (s == "sphere") return Geometry::sphere;
    throw std::invalid_argument("unknown geometry '" + std::string(s) + "'");
}

namespace detail {

// Long-time constants ∫₀^∞⟨Δx(0)Δx(τ)⟩dτ · D0 / L⁴ of the classical
// restricted-diffusion solutions (L = slab width, or radius). They fix the
// rms correlation time, hence ℓ_c² = 2·sqrt(D0·∫C dτ).
inline constexpr double kPlanarLongTime = 1.0 / 120.0;
inline constexpr double kSphereLongTime = 8.0 / 175.0;

}  // namespace detail

/**
 * @brief Compartment description: restriction length, free diffusivity, T2.
 *
 * The restriction length ℓ_c fixes the correlation time τ_c = ℓ_c²/(2·D0).
 * For a cylinder perpendicular to the gradient ℓ_c = 0.37·d. Slabs and
 * spheres use the rms correlation time of their exact eigen-expansions,
 * ℓ_c = a·(2/√120)^{1/2} and ℓ_c = (d/2)·(2·√(8/175))^{1/2}.
 *
 * T2 may be +infinity (no relaxation).
 */
class TissueModel {
public:
    static TissueModel lorentzian(double ell_c, double D0, double T2 = kInfinity) {
        return TissueModel(Geometry::generic_lorentzian, ell_c, ell_c, D0, T2);
    }

    static TissueModel planar(double width, double D0, double T2 = kInfinity) {
        check_size(width);
        const double ell = width * std::sqrt(2.0 * std::sqrt(detail::kPlanarLongTime));
        return TissueModel(Geometry::planar, width, ell, D0, T2);
    }

    static TissueModel cylinder(double diameter, double D0, double T2 = kInfinity) {
        check_size(diameter);
        return TissueModel(Geometry::cylinder_perpendicular, diameter,
                           kCylinderRestrictionRatio * diameter, D0, T2);
    }

    static TissueModel sphere(double diameter, double D0, double T2 = kInfinity) {
        check_size(diameter);
        const double ell = 0.5 * diameter * std::sqrt(2.0 * std::sqrt(detail::kSphereLongTime));
        return TissueModel(Geometry::sphere, diameter, ell, D0, T2);
    }

    static TissueModel make(Geometry g, double size, double D0, double T2 = kInfinity) {
        switch (g) {
            case Geometry::planar: return planar(size, D0, T2);
            case Geometry::cylinder_perpendicular: return cylinder(size, D0, T2);
            case Geometry::sphere: return sphere(size, D0, T2);
            case Geometry::generic_lorentzian: break;
        }
        return lorentzian(size, D0, T2);
    }

    /// Same geometry and diffusivity with the compartment size multiplied by `factor`.
    [[nodiscard]] TissueModel scaled(double factor) const {
        return make(geometry_, size_ * factor, D0_, T2_);
    }

    [[nodiscard]] TissueModel with_T2(double T2) const { return make(geometry_, size_, D0_, T2); }

    [[nodiscard]] Geometry geometry() const noexcept { return geometry_; }
    /// Characteristic size: ℓ_c for the generic model, width for slabs, diameter otherwise.
    [[nodiscard]] double size() const noexcept { return size_; }
    [[nodiscard]] double ell_c() const noexcept { return ell_c_; }
    [[nodiscard]] double D0() const noexcept { return D0_; }
    [[nodiscard]] double T2() const noexcept { return T2_; }
    [[nodiscard]] bool has_relaxation() const noexcept { return std::isfinite(T2_); }
    [[nodiscard]] double tau_c() const noexcept { return ell_c_ * ell_c_ / (2.0 * D0_); }

private:
    TissueModel(Geometry g, double size, double ell_c, double D0, double T2)
        : geometry_(g), size_(size), ell_c_(ell_c), D0_(D0), T2_(T2) {
        if (!(ell_c > 0.0) || !std::isfinite(ell_c)) throw std::invalid_argument("ell_c must be positive");
        if (!(D0 > 0.0) || !std::isfinite(D0)) throw std::invalid_argument("D0 must be positive");
        if (!(T2 > 0.0)) throw std::invalid_argument("T2 must be positive (or infinite)");
    }

    static void check_size(double s) {
        if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("compartment size must be positive");
    }

    Geometry geometry_;
    double size_;
    double ell_c_;
    double D0_;
    double T2_;
};

/// ℓ_c from a correlation time through the Einstein relation ℓ_c² = 2·D0·τ_c.
inline double restriction_length_from_tau(double tau_c, double D0) { return std::sqrt(2.0 * D0 * tau_c); }

struct LengthScales {
    double ell_G;   ///< dephasing length (2·D0/(γ·G))^{1/3}
    double ell_c;   ///< restriction length
    double ell_D;   ///< diffusion length (2·D0·t)^{1/2}
    double ell_T2;  ///< relaxation length (2·D0·T2)^{1/2}, infinite without relaxation
};

inline LengthScales length_scales(const PhysicalConstants& constants, const TissueModel& tissue, double G,
                                  double t) {
    if (!(G > 0.0)) throw std::domain_error("gradient amplitude must be positive (ell_G diverges at G = 0)");
    if (!(t > 0.0)) throw std::domain_error("diffusion time must be positive");
    const double D0 = tissue.D0();
    return LengthScales{
        std::cbrt(2.0 * D0 / (constants.gamma * G)),
        tissue.ell_c(),
        std::sqrt(2.0 * D0 * t),
        std::sqrt(2.0 * D0 * tissue.T2()),
    };
}

/// Dimensionless efficiency parameter γ²G²D0τ_c³ = ½·(ℓ_c/ℓ_G)⁶.
inline double efficiency_parameter(const TissueModel& tissue, double G, double gamma) {
    const double tau = tissue.tau_c();
    return gamma * gamma * G * G * tissue.D0() * tau * tau * tau;
}

/// Gradient that makes ℓ_c²/ℓ_G² equal to `ratio`.
inline double gradient_for_scale_ratio(const TissueModel& tissue, double ratio, double gamma) {
    const double ell_G = tissue.ell_c() / std::sqrt(ratio);
    return 2.0 * tissue.D0() / (gamma * ell_G * ell_G * ell_G);
}

// ---------------------------------------------------------------------------
// Unit conversion
// ---------------------------------------------------------------------------

enum class Dimension { length, time, gradient, diffusivity };

struct UnitInfo {
    std::string_view name;
    Dimension dimension;
    double to_si;
};

inline constexpr std::array<UnitInfo, 16> kUnits{{
    {"m", Dimension::length, 1.0},
    {"mm", Dimension::length, 1e-3},
    {"um", Dimension::length, 1e-6},
    {"μm", Dimension::length, 1e-6},
    {"s", Dimension::time, 1.0},
    {"ms", Dimension::time, 1e-3},
    {"us", Dimension::time, 1e-6},
    {"μs", Dimension::time, 1e-6},
    {"T/m", Dimension::gradient, 1.0},
    {"mT/m", Dimension::gradient, 1e-3},
    {"G/cm", Dimension::gradient, 1e-2},
    {"m2/s", Dimension::diffusivity, 1.0},
    {"m^2/s", Dimension::diffusivity, 1.0},
    {"cm2/s", Dimension::diffusivity, 1e-4},
    {"cm^2/s", Dimension::diffusivity, 1e-4},
    {"um2/ms", Dimension::diffusivity, 1e-9},
}};

inline const UnitInfo& unit_info(std::string_view name) {
    for (const auto& u : kUnits) {
        if (u.name == name) return u;
    }
    throw std::invalid_argument("unknown unit '" + std::string(name) + "'");
}

inline double convert_units(double value, std::string_view from, std::string_view to) {
    const auto& a = unit_info(from);
    const auto& b = unit_info(to);
    if (a.dimension != b.dimension) {
        throw std::invalid_argument("cannot convert '" + std::string(from) + "' to '" + std::string(to) + "'");
    }
    if (a.to_si == b.to_si) return value;
    return value * a.to_si / b.to_si;
}

}  // namespace dprec
