#include <gtest/gtest.h>

#include <cmath>

#include "dprec/scalar_min.hpp"

using namespace dprec;

TEST(ScalarMin, Quadratic) {
    const auto m = brent_minimize([](double x) { return (x - 1.234) * (x - 1.234) + 2; }, -10.0, 10.0, 1e-10);
    EXPECT_NEAR(m.x, 1.234, 1e-8);
    EXPECT_NEAR(m.fx, 2.0, 1e-14);
}

TEST(ScalarMin, NonSmoothKink) {
    const auto m = brent_minimize([](double x) { return std::abs(x - 0.3); }, -1.0, 2.0, 1e-10);
    EXPECT_NEAR(m.x, 0.3, 1e-8);
}

TEST(ScalarMin, BracketExpansion) {
    auto f = [](double x) { return std::cosh(x - 7.0); };
    const auto b = expand_bracket(f, 0.0, 0.1, -100.0, 100.0);
    ASSERT_TRUE(b.has_value());
    EXPECT_LT(b->lo, 7.0);
    EXPECT_GT(b->hi, 7.0);
    EXPECT_NEAR(brent_minimize(f, b->lo, b->hi, 1e-10).x, 7.0, 1e-7);
}

TEST(ScalarMin, BoundaryMinimumGivesNoBracket) {
    EXPECT_FALSE(expand_bracket([](double x) { return x; }, 0.0, 0.1, -1.0, 1.0).has_value());
    EXPECT_FALSE(expand_bracket([](double x) { return -x; }, 0.0, 0.1, -1.0, 1.0).has_value());
}
