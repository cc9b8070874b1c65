#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dprec/waveform.hpp"

using namespace dprec;

namespace {

GradientWaveform random_waveform(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> dur(1e-3, 1e-2), amp(-0.1, 0.1);
    std::vector<Segment> segs;
    double moment = 0.0;
    for (int i = 0; i < n - 1; ++i) {
        segs.push_back({dur(rng), amp(rng)});
        moment += segs.back().duration * segs.back().amplitude;
    }
    const double last = dur(rng);
    segs.push_back({last, -moment / last});
    return GradientWaveform(segs);
}

}  // namespace

TEST(Waveform, EchoConditionEnforced) {
    EXPECT_THROW(GradientWaveform({{1e-3, 0.1}, {1e-3, -0.05}}), std::invalid_argument);
    EXPECT_THROW(GradientWaveform({{0.0, 0.1}}), std::invalid_argument);
    EXPECT_THROW(GradientWaveform({}), std::invalid_argument);
    EXPECT_THROW(pgse_waveform({0.02, 0.01, 0.1}), std::invalid_argument);
    EXPECT_NO_THROW(hahn_waveform(0.1, 0.04));
    EXPECT_EQ(hahn_waveform(0.1, 0.04).segments().size(), 2u);
}

TEST(Waveform, Area) {
    const auto w = pgse_waveform({0.01, 0.03, 0.2});
    EXPECT_NEAR(w.area(0.0, 0.01), 0.002, 1e-15);
    EXPECT_NEAR(w.area(0.005, 0.035), 0.001 - 0.001, 1e-15);
    EXPECT_NEAR(w.area(0.0, w.duration()), 0.0, 1e-15);
    EXPECT_NEAR(w.duration(), 0.04, 1e-15);
}

TEST(Waveform, PgseFilterClosedForm) {
    const PgseTiming p{0.007, 0.025, 0.08};
    const auto w = pgse_waveform(p);
    for (double om : {1.0, 37.0, 250.0, 1e3, 7e3}) {
        const double ref = p.G * p.G / (2 * std::numbers::pi) *
                           std::pow(4 * std::sin(om * p.delta / 2) * std::sin(om * p.Delta / 2) / om, 2);
        EXPECT_NEAR(filter_value(w, om) / ref, 1.0, 1e-10) << om;
        EXPECT_NEAR(pgse_filter(p, om) / ref, 1.0, 1e-10) << om;
    }
}

TEST(Waveform, ParsevalIdentity) {
    std::mt19937_64 rng(11);
    const auto w = random_waveform(rng, 5);
    double energy = 0.0;
    for (const auto& s : w.segments()) energy += s.amplitude * s.amplitude * s.duration;
    // ∫F dω over the real line equals ∫G² dt; tails decay as 1/ω²
    const double cut = 2e5;
    double acc = 0.0;
    const double step = 200.0;
    for (double a = 0.0; a < cut; a += step) {
        acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double om) { return filter_value(w, om); }, a, a + step, 0, 1e-12);
    }
    // analytic tail: |Ĝ|² ~ (sum of jump terms)²/ω², averaged ≈ Σ(ΔG)²/ω²
    double jumps = 0.0;
    double prev = 0.0;
    for (const auto& s : w.segments()) {
        jumps += (s.amplitude - prev) * (s.amplitude - prev);
        prev = s.amplitude;
    }
    jumps += prev * prev;
    const double tail = jumps / (2 * std::numbers::pi) / cut;
    EXPECT_NEAR(2 * (acc + tail) / energy, 1.0, 2e-3);
}

TEST(Waveform, ReversalAndSignInvariance) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
        const auto w = random_waveform(rng, 2 + k % 6);
        const auto r = w.reversed();
        const auto neg = w.amplitude_scaled(-1.0);
        for (double om : {3.0, 100.0, 1234.5, 9e4}) {
            const double f = filter_value(w, om);
            EXPECT_NEAR(filter_value(r, om), f, 1e-12 * f + 1e-30);
            EXPECT_NEAR(filter_value(neg, om), f, 1e-12 * f + 1e-30);
        }
    }
}

TEST(Waveform, TimeScaling) {
    const auto w = pgse_waveform({0.004, 0.02, 0.05});
    const auto w2 = w.time_scaled(2.0);
    for (double om : {10.0, 300.0, 2000.0}) {
        // Ĝ₂(ω) = 2·Ĝ(2ω)
        EXPECT_NEAR(filter_value(w2, om) / (4 * filter_value(w, 2 * om)), 1.0, 1e-10);
    }
}

TEST(Waveform, HahnBandpassCenter) {
    // argmax of sin⁴(ωt/4)/ω²: ωt = 4x with tan x = 2x, x in (1, 1.5)
    double lo = 1.0, hi = 1.5;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        (std::tan(m) - 2 * m > 0 ? hi : lo) = m;
    }
    const double t = 0.05;
    const auto c = filter_bandpass_center(hahn_waveform(0.1, t));
    ASSERT_TRUE(c.has_value());
    EXPECT_NEAR(*c * t, 4 * lo, 1e-6 * 4 * lo);
    EXPECT_NEAR(*c * t, 4.66224, 1e-4);
}

TEST(Waveform, OscillatingCenterScalesWithLobes) {
    const double t = 0.04;
    const auto c2 = filter_bandpass_center(oscillating_waveform(0.1, t, 2));
    const auto c8 = filter_bandpass_center(oscillating_waveform(0.1, t, 8));
    ASSERT_TRUE(c2 && c8);
    EXPECT_GT(*c8, 3.0 * *c2);
    EXPECT_THROW(oscillating_waveform(0.1, t, 3), std::invalid_argument);
}

TEST(Waveform, CsvRoundTrip) {
    std::mt19937_64 rng(5);
    const auto w = random_waveform(rng, 4);
    std::stringstream ss;
    write_waveform_csv(ss, w);
    const auto back = read_waveform_csv(ss);
    ASSERT_EQ(back.segments().size(), w.segments().size());
    for (std::size_t i = 0; i < w.segments().size(); ++i) {
        EXPECT_EQ(back.segments()[i].duration, w.segments()[i].duration);
        EXPECT_EQ(back.segments()[i].amplitude, w.segments()[i].amplitude);
    }
    std::stringstream bad("duration_s,amplitude_T_per_m\n0.01,0.1\n0.01,0.2\n");
    EXPECT_THROW(read_waveform_csv(bad), std::invalid_argument);
}
