#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dprec/quadrature.hpp"

using namespace dprec;

TEST(Quadrature, Polynomial) {
    const auto r = integrate([](double x) { return x * x * x - 2 * x; }, -1.0, 3.0);
    EXPECT_NEAR(r.value, (81.0 / 4 - 9) - (0.25 - 1), 1e-12);
}

TEST(Quadrature, Oscillatory) {
    const auto r = integrate([](double x) { return std::cos(50 * x); }, 0.0, 100.0);
    EXPECT_NEAR(r.value, std::sin(5000.0) / 50, 1e-10);
}

TEST(Quadrature, EndpointSingularity) {
    const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {1e-10, 0.0, 2'000'000});
    EXPECT_NEAR(r.value, 2.0, 1e-7);
}

TEST(Quadrature, PanelsSumToWhole) {
    auto f = [](double x) { return std::exp(-x) * std::sin(3 * x); };
    const auto whole = integrate(f, 0.0, 20.0);
    const auto split = integrate_panels(f, {0.0, 1.0, 2.5, 7.0, 20.0});
    EXPECT_NEAR(whole.value, split.value, 1e-12);
    EXPECT_NEAR(whole.value, (3.0 - std::exp(-20.0) * (std::sin(60.0) + 3 * std::cos(60.0))) / 10.0, 1e-12);
}

TEST(Quadrature, BudgetExhaustionCarriesPartial) {
    QuadratureOptions opt{1e-15, 0.0, 100};
    try {
        integrate([](double x) { return std::sin(1e4 * x); }, 0.0, 1.0, opt);
        FAIL() << "expected QuadratureError";
    } catch (const QuadratureError& e) {
        EXPECT_GT(e.partial().evaluations, 0u);
    }
}
