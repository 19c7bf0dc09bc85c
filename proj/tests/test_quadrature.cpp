#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "relay/quadrature.hpp"

using namespace relay;

TEST_CASE("smooth integrands to near machine accuracy") {
    CHECK(integrate([](double x) { return x * x * x * x * x * x * x; }, 0.0, 1.0) ==
          Catch::Approx(0.125).margin(1e-13));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0,
                    3.14159265358979323846) == Catch::Approx(2.0).margin(1e-12));
    CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 40.0) ==
          Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("degenerate and invalid ranges") {
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
    CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 2.0, 1.0),
                    contract_error);
}

TEST_CASE("breakpoints make discontinuous integrands exact") {
    auto step = [](double x) { return x < 1.0 ? 1.0 : 0.0; };
    const std::vector<double> breaks{1.0};
    CHECK(integrate(step, 0.0, 2.0, {}, breaks) ==
          Catch::Approx(1.0).margin(1e-12));

    auto ramp = [](double x) { return x < 0.5 ? 2.0 * x : 3.0 - x; };
    const std::vector<double> b2{0.5};
    // 2x on [0, 0.5) then 3-x on [0.5, 2]: 0.25 + (4.5 - 2 - 1.5 + 0.125)
    CHECK(integrate(ramp, 0.0, 2.0, {}, b2) ==
          Catch::Approx(0.25 + 2.625).margin(1e-12));
}

TEST_CASE("breakpoints outside the range are ignored") {
    const std::vector<double> breaks{-1.0, 0.0, 5.0};
    CHECK(integrate([](double x) { return x; }, 0.0, 1.0, {}, breaks) ==
          Catch::Approx(0.5).margin(1e-13));
}

TEST_CASE("truncation verdict: stable values are finite") {
    const auto v = assess_truncation(1.0, 1.0, 1.0);
    CHECK_FALSE(v.divergent);
    CHECK(v.value == Catch::Approx(1.0));
}

TEST_CASE("truncation verdict: geometric tails are extrapolated") {
    // partial sums of 1 + 1/2 + 1/4 + ... at 1, 2, 3 doublings
    const auto v = assess_truncation(1.5, 1.75, 1.875);
    CHECK_FALSE(v.divergent);
    CHECK(v.value == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("truncation verdict: sustained growth is divergent") {
    const auto v = assess_truncation(1.0, 1.2, 1.5);
    CHECK(v.divergent);
    // partial means of a density with no first moment (frozen from a
    // 1/(1+x)^2-tailed family at T = 50, 100, 200)
    const auto heavy = assess_truncation(2.9514334758615807, 3.6250215069402694,
                                         4.3082800324371852);
    CHECK(heavy.divergent);
}

TEST_CASE("truncation verdict: contracting increments beat the growth rule") {
    // frozen partial values of a convergent series whose last increment still
    // exceeds 1% relative growth; contraction (ratio ~0.51) rescues it
    const auto v = assess_truncation(0.94232233454704450, 0.97059014792764445,
                                     0.98514875930980970);
    CHECK_FALSE(v.divergent);
    CHECK(v.value == Catch::Approx(1.0).margin(2e-3));

    const auto w = assess_truncation(0.75214244570318717, 0.76243225490113105,
                                     0.76763863638287040);
    CHECK_FALSE(w.divergent);
    CHECK(w.value == Catch::Approx(0.77288721956224652).margin(2e-4));
}
