#pragma once

/**
 * @file mc.hpp
 * @brief Random-walk simulation of spins in a bounded compartment with
 *        explicit phase accrual under a single-axis gradient waveform.
 *
 * Each walker draws its normals from a counter-based generator keyed by
 * (seed, walker, draw index), so results do not depend on how walkers are
 * scheduled across threads. Per-walker outputs are reduced with a
 * fixed-order pairwise sum.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "dprec/parallel.hpp"
#include "dprec/units.hpp"
#include "dprec/waveform.hpp"

namespace dprec {

class McConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Philox4x32-10
// ---------------------------------------------------------------------------

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    [[nodiscard]] Counter operator()(Counter c) const noexcept {
        Key k = key_;
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        }
        return c;
    }

private:
    Key key_;
};

/// Uniform in (0, 1), never exactly 0 or 1.
inline double uniform_open(std::uint32_t u) noexcept { return (static_cast<double>(u) + 0.5) * 0x1p-32; }

/// Four standard normals from one generator block (Box–Muller).
inline std::array<double, 4> normals_from_block(const Philox4x32::Counter& r) noexcept {
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    const double r0 = std::sqrt(-2.0 * std::log(uniform_open(r[0])));
    const double a0 = kTwoPi * uniform_open(r[1]);
    const double r1 = std::sqrt(-2.0 * std::log(uniform_open(r[2])));
    const double a1 = kTwoPi * uniform_open(r[3]);
    return {r0 * std::cos(a0), r0 * std::sin(a0), r1 * std::cos(a1), r1 * std::sin(a1)};
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class McGeometry { planar, disk, ball, unbounded };

inline McGeometry mc_geometry_from(Geometry g) {
    switch (g) {
        case Geometry::planar: return McGeometry::planar;
        case Geometry::cylinder_perpendicular: return McGeometry::disk;
        case Geometry::sphere: return McGeometry::ball;
        default: throw McConfigError("Monte-Carlo needs planar, cylinder or sphere geometry");
    }
}

inline int mc_dimensions(McGeometry g) noexcept {
    switch (g) {
        case McGeometry::planar: return 1;
        case McGeometry::disk: return 2;
        case McGeometry::ball: return 3;
        case McGeometry::unbounded: return 1;
    }
    return 1;
}

struct McConfig {
    McGeometry geometry = McGeometry::planar;
    double size = 10e-6;  ///< slab width or diameter [m]; reference length for unbounded
    double D0 = 1e-9;
    std::uint64_t n_walkers = 100000;
    double dt = 5e-6;
    std::uint64_t seed = 1;
    GradientWaveform waveform = hahn_waveform(0.0, 0.02);
    double gamma = kProtonGamma;
    unsigned threads = 0;
    bool keep_positions = false;

    /// Throws McConfigError when an invariant is violated.
    void validate() const {
        if (!(size > 0.0)) throw McConfigError("compartment size must be positive");
        if (!(D0 > 0.0)) throw McConfigError("D0 must be positive");
        if (!(dt > 0.0)) throw McConfigError("dt must be positive");
        if (n_walkers < 1000) throw McConfigError("n_walkers must be at least 1000");
        if (!(gamma > 0.0)) throw McConfigError("gamma must be positive");
        if (geometry != McGeometry::unbounded && std::sqrt(2.0 * D0 * dt) > size / 50.0) {
            throw McConfigError("dt too large: step length exceeds size/50");
        }
    }

    [[nodiscard]] std::uint64_t steps() const {
        return static_cast<std::uint64_t>(std::llround(std::ceil(waveform.duration() / dt - 1e-9)));
    }
};

struct McResult {
    double M_estimate = 1.0;
    double std_error = 0.0;
    double mean_phase = 0.0;
    double phase_variance = 0.0;  ///< ⟨φ²⟩
    double phase_std_error = 0.0;  ///< standard error of ⟨φ⟩
    double mean_square_displacement = 0.0;  ///< ⟨Δx²⟩ along the gradient axis
    double msd_std_error = 0.0;
    std::uint64_t n_walkers = 0;
    std::uint64_t steps = 0;
    double dt = 0.0;
    std::vector<double> phases;
    std::vector<double> final_x;  ///< filled when keep_positions is set
};

namespace detail {

constexpr int kMaxReflections = 10;

inline double reflect_interval(double x, double half) {
    for (int k = 0; k < kMaxReflections; ++k) {
        if (x > half) {
            x = 2.0 * half - x;
        } else if (x < -half) {
            x = -2.0 * half - x;
        } else {
            return x;
        }
    }
    if (x > half || x < -half) throw McConfigError("dt too large: reflection cap exceeded");
    return x;
}

/// Moves p by d inside the origin-centred ball of radius R, reflecting
/// specularly at the exact intersection points. Near-tangent paths can need
/// arbitrarily many short chords at any dt; after the reflection cap the
/// remaining displacement is dropped and the walker stays at the last wall
/// contact (the step-length bound is what guards against a coarse dt).
template <int N>
void reflect_ball(std::array<double, N>& p, std::array<double, N> d, double R) {
    const double R2 = R * R;
    for (int k = 0; k <= kMaxReflections; ++k) {
        std::array<double, N> q;
        double q2 = 0.0;
        for (int i = 0; i < N; ++i) {
            q[i] = p[i] + d[i];
            q2 += q[i] * q[i];
        }
        if (q2 <= R2) {
            p = q;
            return;
        }
        if (k == kMaxReflections) return;
        // |p + s·d| = R, s in (0, 1]
        double a = 0.0, b = 0.0, c = -R2;
        for (int i = 0; i < N; ++i) {
            a += d[i] * d[i];
            b += p[i] * d[i];
            c += p[i] * p[i];
        }
        const double disc = std::sqrt(std::max(0.0, b * b - a * c));
        double s = (-b + disc) / a;
        s = std::clamp(s, 0.0, 1.0);
        std::array<double, N> h;
        double hn = 0.0;
        for (int i = 0; i < N; ++i) {
            h[i] = p[i] + s * d[i];
            hn += h[i] * h[i];
        }
        hn = std::sqrt(hn);
        // remaining displacement reflected about the wall normal
        double dot = 0.0;
        for (int i = 0; i < N; ++i) {
            h[i] *= R / hn;
            d[i] *= (1.0 - s);
            dot += d[i] * h[i] / R;
        }
        for (int i = 0; i < N; ++i) d[i] -= 2.0 * dot * h[i] / R;
        // nudge inside to avoid re-hitting the same point from rounding
        for (int i = 0; i < N; ++i) p[i] = h[i] * (1.0 - 1e-15);
    }
}

struct WalkerStreams {
    Philox4x32 gen;
    std::uint64_t walker;

    [[nodiscard]] Philox4x32::Counter block(std::uint64_t index, std::uint32_t stream) const noexcept {
        return gen({static_cast<std::uint32_t>(walker), static_cast<std::uint32_t>(walker >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32) ^ (stream << 24)});
    }
};

constexpr std::uint32_t kStepStream = 0;
constexpr std::uint32_t kInitStream = 1;

template <int N>
std::array<double, N> initial_position(const WalkerStreams& rs, double R) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        const auto r = rs.block(attempt, kInitStream);
        std::array<double, N> p;
        double p2 = 0.0;
        for (int i = 0; i < N; ++i) {
            p[i] = R * (2.0 * uniform_open(r[i]) - 1.0);
            p2 += p[i] * p[i];
        }
        if (p2 <= R * R) return p;
    }
}

struct WalkerOutcome {
    double phase;
    double final_x;
    double dx;
};

template <int N>
WalkerOutcome run_walker(const McConfig& cfg, const std::vector<double>& areas, std::uint64_t walker) {
    const WalkerStreams rs{Philox4x32(cfg.seed), walker};
    const double sigma = std::sqrt(2.0 * cfg.D0 * cfg.dt);
    const double half = 0.5 * cfg.size;
    std::array<double, N> p{};
    if (cfg.geometry == McGeometry::planar || cfg.geometry == McGeometry::unbounded) {
        p[0] = half * (2.0 * uniform_open(rs.block(0, kInitStream)[0]) - 1.0);
    } else {
        p = initial_position<N>(rs, half);
    }
    const double x0 = p[0];
    double phase = 0.0;
    std::array<double, 4> buf{};
    std::uint64_t cached = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t draw = 0;
    auto next_normal = [&] {
        const std::uint64_t blk = draw / 4;
        if (blk != cached) {
            buf = normals_from_block(rs.block(blk, kStepStream));
            cached = blk;
        }
        return buf[draw++ % 4];
    };
    for (std::size_t s = 0; s < areas.size(); ++s) {
        const double x_start = p[0];
        std::array<double, N> d;
        for (int i = 0; i < N; ++i) d[i] = sigma * next_normal();
        switch (cfg.geometry) {
            case McGeometry::planar: p[0] = reflect_interval(p[0] + d[0], half); break;
            case McGeometry::unbounded: p[0] += d[0]; break;
            default: reflect_ball<N>(p, d, half); break;
        }
        phase += cfg.gamma * 0.5 * (x_start + p[0]) * areas[s];
    }
    return {phase, p[0], p[0] - x0};
}

}  // namespace detail

/// Runs the walk; per-walker phases are retained for histogramming.
inline McResult simulate(const McConfig& cfg) {
    cfg.validate();
    const std::uint64_t steps = cfg.steps();
    std::vector<double> areas(steps);
    const double T = cfg.waveform.duration();
    for (std::uint64_t s = 0; s < steps; ++s) {
        const double t0 = std::min(T, s * cfg.dt), t1 = std::min(T, (s + 1) * cfg.dt);
        areas[s] = cfg.waveform.area(t0, t1);
    }
    const std::size_t n = cfg.n_walkers;
    std::vector<double> phase(n), fx(n), dx(n);
    const int dims = mc_dimensions(cfg.geometry);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        detail::WalkerOutcome o;
        if (dims == 1) o = detail::run_walker<1>(cfg, areas, i);
        else if (dims == 2) o = detail::run_walker<2>(cfg, areas, i);
        else o = detail::run_walker<3>(cfg, areas, i);
        phase[i] = o.phase;
        fx[i] = o.final_x;
        dx[i] = o.dx;
    }, 256);

    std::vector<double> buf(n);
    const double dn = static_cast<double>(n);
    auto mean_of = [&](auto&& f) {
        for (std::size_t i = 0; i < n; ++i) buf[i] = f(i);
        return pairwise_sum(buf) / dn;
    };
    McResult r;
    r.n_walkers = n;
    r.steps = steps;
    r.dt = cfg.dt;
    r.M_estimate = mean_of([&](std::size_t i) { return std::cos(phase[i]); });
    const double m2 = mean_of([&](std::size_t i) { return std::cos(phase[i]) * std::cos(phase[i]); });
    r.std_error = std::sqrt(std::max(0.0, m2 - r.M_estimate * r.M_estimate) / (dn - 1.0));
    r.mean_phase = mean_of([&](std::size_t i) { return phase[i]; });
    r.phase_variance = mean_of([&](std::size_t i) { return phase[i] * phase[i]; });
    r.phase_std_error =
        std::sqrt(std::max(0.0, r.phase_variance - r.mean_phase * r.mean_phase) / (dn - 1.0));
    r.mean_square_displacement = mean_of([&](std::size_t i) { return dx[i] * dx[i]; });
    const double m4 = mean_of([&](std::size_t i) { return dx[i] * dx[i] * dx[i] * dx[i]; });
    r.msd_std_error =
        std::sqrt(std::max(0.0, m4 - r.mean_square_displacement * r.mean_square_displacement) / (dn - 1.0));
    r.phases = std::move(phase);
    if (cfg.keep_positions) r.final_x = std::move(fx);
    return r;
}

/// Standard error of ⟨φ²⟩/2, used for the Gaussian-phase comparison.
inline double half_phase_variance_std_error(const McResult& r) {
    const std::size_t n = r.phases.size();
    if (n < 2) return 0.0;
    std::vector<double> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::pow(r.phases[i], 4);
    const double m4 = pairwise_sum(buf) / n;
    return 0.5 * std::sqrt(std::max(0.0, m4 - r.phase_variance * r.phase_variance) / (n - 1.0));
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct PhaseHistogram {
    std::vector<double> edges;
    std::vector<double> density;  ///< normalized to unit area
    double excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
    double kurtosis_std_error = 0.0;
    bool gaussian = false;
};

inline PhaseHistogram phase_histogram(const std::vector<double>& phases, std::size_t bins = 64) {
    if (phases.empty()) throw std::invalid_argument("no phases to histogram");
    if (bins == 0) throw std::invalid_argument("need at least one bin");
    const std::size_t n = phases.size();
    const double dn = static_cast<double>(n);
    std::vector<double> buf(phases);
    const double mean = pairwise_sum(buf) / dn;
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::pow(phases[i] - mean, 2);
    const double m2 = pairwise_sum(buf) / dn;
    for (std::size_t i = 0; i < n; ++i) buf[i] = std::pow(phases[i] - mean, 4);
    const double m4 = pairwise_sum(buf) / dn;

    PhaseHistogram h;
    const double width = m2 > 0.0 ? 6.0 * std::sqrt(m2) : 1e-12;
    const double lo = mean - width, hi = mean + width;
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
    std::vector<std::uint64_t> counts(bins, 0);
    for (double p : phases) {
        auto b = static_cast<std::ptrdiff_t>(std::floor((p - lo) / (hi - lo) * bins));
        b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    const double bw = (hi - lo) / bins;
    h.density.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) h.density[b] = counts[b] / (dn * bw);
    if (m2 > 0.0) {
        h.excess_kurtosis = m4 / (m2 * m2) - 3.0;
        h.kurtosis_std_error = std::sqrt(24.0 / dn);
        h.gaussian = std::abs(h.excess_kurtosis) < 0.1;
    }
    return h;
}

inline PhaseHistogram phase_histogram(const McConfig& cfg, std::size_t bins = 64) {
    return phase_histogram(simulate(cfg).phases, bins);
}

struct UniformityTest {
    double chi_square;
    int dof;
    double p_value;
};

/// Chi-square test of final x positions against the equilibrium marginal of
/// the compartment (uniform for the slab, semicircle for the disk,
/// parabolic for the ball).
inline UniformityTest equilibrium_uniformity(const std::vector<double>& x, McGeometry g, double size,
                                             int bins = 20) {
    if (x.empty()) throw std::invalid_argument("no positions");
    if (g == McGeometry::unbounded) throw std::invalid_argument("no equilibrium for an unbounded walk");
    const double half = 0.5 * size;
    auto cdf = [&](double u) {  // u = x/half in [-1, 1]
        u = std::clamp(u, -1.0, 1.0);
        switch (g) {
            case McGeometry::planar: return 0.5 * (u + 1.0);
            case McGeometry::disk:
                return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / std::numbers::pi;
            default: return 0.5 + 0.75 * (u - u * u * u / 3.0);
        }
    };
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double xi : x) {
        auto b = static_cast<int>(std::floor((xi / half + 1.0) * 0.5 * bins));
        ++counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))];
    }
    const double n = static_cast<double>(x.size());
    double chi2 = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double u0 = -1.0 + 2.0 * b / bins, u1 = -1.0 + 2.0 * (b + 1) / bins;
        const double expected = n * (cdf(u1) - cdf(u0));
        const double diff = counts[static_cast<std::size_t>(b)] - expected;
        chi2 += diff * diff / expected;
    }
    const int dof = bins - 1;
    return {chi2, dof, boost::math::gamma_q(0.5 * dof, 0.5 * chi2)};
}

inline void write_mc_csv(std::ostream& os, const McResult& r) {
    char buf[512];
    os << "M_estimate,std_error,mean_phase,phase_variance,n_walkers,steps,dt_s\n";
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%llu,%llu,%.12g\n", r.M_estimate, r.std_error,
                  r.mean_phase, r.phase_variance, static_cast<unsigned long long>(r.n_walkers),
                  static_cast<unsigned long long>(r.steps), r.dt);
    os << buf;
}

inline void write_histogram_csv(std::ostream& os, const PhaseHistogram& h) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# excess_kurtosis=%.12g gaussian=%d\n", h.excess_kurtosis, h.gaussian ? 1 : 0);
    os << buf << "phase_lo,phase_hi,density\n";
    for (std::size_t b = 0; b < h.density.size(); ++b) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", h.edges[b], h.edges[b + 1], h.density[b]);
        os << buf;
    }
}

}  // namespace dprec
