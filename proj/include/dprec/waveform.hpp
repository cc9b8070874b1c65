#pragma once

/**
 * @file waveform.hpp
 * @brief Piecewise-constant effective gradient waveforms and their filters.
 *
 * The effective waveform already contains the sign flip of the refocusing
 * pulse. The filter follows
 *
 *   F_t(ω) = (1/2π)·|∫₀ᵗ G(t')·e^{-iωt'} dt'|²,
 *
 * with the amplitude G inside the transform, so F carries units of
 * T²·m⁻²·s².
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dprec {

struct Segment {
    double duration;   ///< [s], > 0
    double amplitude;  ///< effective gradient [T/m], signed
};

class GradientWaveform {
public:
    explicit GradientWaveform(std::vector<Segment> segments) : segments_(std::move(segments)) {
        if (segments_.empty()) throw std::invalid_argument("waveform needs at least one segment");
        double moment = 0.0, scale = 0.0;
        duration_ = 0.0;
        for (const auto& s : segments_) {
            if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
                throw std::invalid_argument("segment durations must be positive");
            }
            if (!std::isfinite(s.amplitude)) throw std::invalid_argument("segment amplitude must be finite");
            duration_ += s.duration;
            moment += s.duration * s.amplitude;
            scale += s.duration * std::abs(s.amplitude);
        }
        if (std::abs(moment) > 1e-12 * scale) {
            throw std::invalid_argument("waveform violates the echo condition (nonzero zeroth moment)");
        }
    }

    [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }
    [[nodiscard]] double duration() const noexcept { return duration_; }

    [[nodiscard]] double zeroth_moment() const noexcept {
        double m = 0.0;
        for (const auto& s : segments_) m += s.duration * s.amplitude;
        return m;
    }

    [[nodiscard]] double max_amplitude() const noexcept {
        double m = 0.0;
        for (const auto& s : segments_) m = std::max(m, std::abs(s.amplitude));
        return m;
    }

    /// ∫ G dt over [t0, t1] ∩ [0, duration].
    [[nodiscard]] double area(double t0, double t1) const noexcept {
        double acc = 0.0, start = 0.0;
        for (const auto& s : segments_) {
            const double end = start + s.duration;
            const double lo = std::max(t0, start), hi = std::min(t1, end);
            if (hi > lo) acc += s.amplitude * (hi - lo);
            start = end;
        }
        return acc;
    }

    [[nodiscard]] GradientWaveform time_scaled(double factor) const {
        auto segs = segments_;
        for (auto& s : segs) s.duration *= factor;
        return GradientWaveform(std::move(segs));
    }

    [[nodiscard]] GradientWaveform amplitude_scaled(double factor) const {
        auto segs = segments_;
        for (auto& s : segs) s.amplitude *= factor;
        return GradientWaveform(std::move(segs));
    }

    [[nodiscard]] GradientWaveform reversed() const {
        return GradientWaveform(std::vector<Segment>(segments_.rbegin(), segments_.rend()));
    }

private:
    std::vector<Segment> segments_;
    double duration_ = 0.0;
};

struct PgseTiming {
    double delta;  ///< pulse duration δ [s]
    double Delta;  ///< delay Δ between pulse onsets [s]
    double G;      ///< amplitude [T/m]

    [[nodiscard]] double total() const noexcept { return delta + Delta; }
};

/// +G on [0, δ], 0 on [δ, Δ], −G on [Δ, Δ+δ].
inline GradientWaveform pgse_waveform(const PgseTiming& timing) {
    if (!(timing.delta > 0.0)) throw std::invalid_argument("PGSE pulse duration must be positive");
    if (timing.delta > timing.Delta) throw std::invalid_argument("PGSE requires delta <= Delta");
    std::vector<Segment> segs{{timing.delta, timing.G}};
    if (timing.Delta > timing.delta) segs.push_back({timing.Delta - timing.delta, 0.0});
    segs.push_back({timing.delta, -timing.G});
    return GradientWaveform(std::move(segs));
}

/// Constant-gradient (Hahn) echo of total duration t: δ = Δ = t/2.
inline GradientWaveform hahn_waveform(double G, double t) { return pgse_waveform({0.5 * t, 0.5 * t, G}); }

/// Oscillating train of n alternating rectangles, each of duration t/n.
inline GradientWaveform oscillating_waveform(double G, double t, int lobes) {
    if (lobes < 2 || lobes % 2 != 0) throw std::invalid_argument("oscillating waveform needs an even lobe count");
    std::vector<Segment> segs;
    for (int i = 0; i < lobes; ++i) segs.push_back({t / lobes, (i % 2 == 0) ? G : -G});
    return GradientWaveform(std::move(segs));
}

namespace detail {

inline double sinc(double x) noexcept {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

}  // namespace detail

/// ∫₀ᵗ G(t')·e^{-iωt'} dt'. Each segment contributes G·L·sinc(ωL/2)·e^{-iω·mid},
/// which stays exact through ω → 0.
inline std::complex<double> waveform_transform(const GradientWaveform& w, double omega) {
    std::complex<double> acc{0.0, 0.0};
    double start = 0.0;
    for (const auto& s : w.segments()) {
        const double mid = start + 0.5 * s.duration;
        if (s.amplitude != 0.0) {
            const double mag = s.amplitude * s.duration * detail::sinc(0.5 * omega * s.duration);
            acc += mag * std::polar(1.0, -omega * mid);
        }
        start += s.duration;
    }
    return acc;
}

inline double filter_value(const GradientWaveform& w, double omega) {
    return std::norm(waveform_transform(w, omega)) / (2.0 * std::numbers::pi);
}

/// Closed-form PGSE filter (1/2π)·G²·(4·sin(ωδ/2)·sin(ωΔ/2)/ω)².
inline double pgse_filter(const PgseTiming& timing, double omega) {
    const double a = 0.5 * omega * timing.delta;
    const double b = 0.5 * omega * timing.Delta;
    // 4·sin(a)·sin(b)/ω = ω·δ·Δ·sinc(a)·sinc(b)
    const double amp = omega * timing.delta * timing.Delta * detail::sinc(a) * detail::sinc(b);
    return timing.G * timing.G * amp * amp / (2.0 * std::numbers::pi);
}

/// Argmax of F over (0, 40π/t] by a dense scan refined with golden section;
/// empty when the filter vanishes identically.
inline std::optional<double> filter_bandpass_center(const GradientWaveform& w) {
    const double t = w.duration();
    const double wmax = 40.0 * std::numbers::pi / t;
    constexpr int kScan = 8000;
    const double h = wmax / kScan;
    int best = -1;
    double fbest = 0.0;
    for (int i = 1; i <= kScan; ++i) {
        const double f = filter_value(w, i * h);
        if (f > fbest) {
            fbest = f;
            best = i;
        }
    }
    if (best < 0) return std::nullopt;
    double a = (best - 1) * h, b = std::min(best + 1, kScan) * h;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = filter_value(w, c), fd = filter_value(w, d);
    while (b - a > 1e-13 * b) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = filter_value(w, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = filter_value(w, d);
        }
    }
    return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Rows of (duration_s, amplitude_T_per_m) with a header line.
inline void write_waveform_csv(std::ostream& os, const GradientWaveform& w) {
    os << "duration_s,amplitude_T_per_m\n";
    char buf[96];
    for (const auto& s : w.segments()) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.duration, s.amplitude);
        os << buf;
    }
}

/// Reads the format written by write_waveform_csv; '#' lines and a
/// non-numeric header are skipped.
inline GradientWaveform read_waveform_csv(std::istream& is) {
    std::vector<Segment> segs;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("waveform CSV line " + std::to_string(lineno) + ": expected two columns");
        const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
        char* end = nullptr;
        const double dur = std::strtod(a.c_str(), &end);
        if (end == a.c_str()) {
            if (segs.empty() && lineno == 1) continue;  // header
            throw std::invalid_argument("waveform CSV line " + std::to_string(lineno) + ": bad duration");
        }
        const double amp = std::strtod(b.c_str(), &end);
        if (end == b.c_str()) throw std::invalid_argument("waveform CSV line " + std::to_string(lineno) + ": bad amplitude");
        segs.push_back({dur, amp});
    }
    return GradientWaveform(std::move(segs));
}

/// Filter dump (omega, F).
inline void write_filter_csv(std::ostream& os, const GradientWaveform& w, const std::vector<double>& omegas) {
    os << "omega_rad_per_s,F\n";
    char buf[96];
    for (double om : omegas) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", om, filter_value(w, om));
        os << buf;
    }
}

}  // namespace dprec
