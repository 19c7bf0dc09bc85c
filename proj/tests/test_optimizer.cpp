#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "relay/optimizer.hpp"

using namespace relay;

namespace {

BoxDensity two_block() {
    return {{{1.0 / 12.0, 1.0, 3.0, 4.0, 7.0}, {1.0 / 12.0, 5.0, 8.0, 2.0, 4.0}}};
}

BoxDensity random_boxes(std::mt19937_64& gen, int max_boxes = 4) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 1 + int(u(gen) * max_boxes);
    BoxDensity d;
    double x_cursor = u(gen) * 0.5;
    for (int i = 0; i < n; ++i) {
        const double a = x_cursor;
        const double b = a + 0.1 + 2.0 * u(gen);
        const double c = u(gen) * 3.0;
        const double dd = c + 0.1 + 2.0 * u(gen);
        d.boxes.push_back({1.0, a, b, c, dd});
        x_cursor = b + u(gen) * 0.5;
    }
    double m = 0.0;
    for (const auto& box : d.boxes) m += box.mass();
    for (auto& box : d.boxes) box.k /= m;
    return d;
}

}  // namespace

TEST_CASE("two-block optimum: switch at 3 for an expected 4") {
    const auto report = optimize_box(two_block());
    CHECK(report.tau_star == Catch::Approx(3.0).margin(1e-12));
    CHECK(report.et_star == Catch::Approx(4.0).margin(1e-12));
    CHECK(report.e_pi1.value() == Catch::Approx(4.25).margin(1e-12));
    CHECK(report.e_pi2.value() == Catch::Approx(4.25).margin(1e-12));
    // roughly 6% better than the best single algorithm
    CHECK(report.relative_gain.value() ==
          Catch::Approx(1.0 - 4.0 / 4.25).margin(1e-12));
    CHECK(report.candidates.size() == 5);  // 0 and four distinct edges
}

TEST_CASE("ties resolve to the smallest switch time") {
    // symmetric single box: never switching and always switching cost the same
    const BoxDensity single{{{1.0, 0.0, 1.0, 0.0, 1.0}}};
    const auto report = optimize_box(single);
    CHECK(report.et_star == Catch::Approx(0.5).margin(1e-15));
    CHECK(report.tau_star == 0.0);
}

TEST_CASE("optimum scales with the time unit") {
    const auto base = optimize_box(two_block());
    const double s = 3.5;
    BoxDensity scaled;
    for (const auto& box : two_block().boxes)
        scaled.boxes.push_back(
            {box.k / (s * s), box.a * s, box.b * s, box.c * s, box.d * s});
    const auto report = optimize_box(scaled);
    CHECK(report.tau_star == Catch::Approx(s * base.tau_star).margin(1e-9));
    CHECK(report.et_star == Catch::Approx(s * base.et_star).margin(1e-9));
}

TEST_CASE("edge candidates are never beaten by a dense scan") {
    std::mt19937_64 gen(314159);
    for (int trial = 0; trial < 10; ++trial) {
        const auto d = random_boxes(gen);
        const auto report = optimize_box(d);
        const double hi = support_upper(JointDensity{d}, Axis::x).value();
        const double step = hi / 2000.0;
        for (double tau = 0.0; tau <= hi; tau += step)
            CHECK(et_box(d, tau) >= report.et_star - 1e-9);
    }
}

TEST_CASE("scan on the tabulated peaks density reproduces its optimum") {
    const auto f = builtin_expression("complementary_peaks");
    const auto g = tabulate_expression(f, graded_knots(12.0, 400),
                                       graded_knots(12.0, 400));
    const auto report = optimize_scan(JointDensity{g});
    CHECK(report.tau_star == Catch::Approx(2.4921033538933720).margin(0.02));
    CHECK(report.et_star == Catch::Approx(2.8541094850978911).margin(0.02));
    CHECK(report.e_pi1.value() == Catch::Approx(4.2604059953907036).margin(0.01));
    CHECK(report.e_pi2.value() == Catch::Approx(4.2604059953907036).margin(0.01));
    CHECK(report.relative_gain.value() ==
          Catch::Approx(0.33008509325502607).margin(0.02));
}

TEST_CASE("scan matches a dense closed-form sweep") {
    const ExpPolyDensity p{1.0, 2.0, 0.5, 0.25};
    const auto report = optimize_scan(JointDensity{p}, {{0.0, 8.0}});
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4096; ++i)
        best = std::min(best, et_exp_poly(p, 8.0 * double(i) / 4096.0));
    CHECK(report.et_star == Catch::Approx(best).margin(1e-6));
    CHECK(et_exp_poly(p, report.tau_star) ==
          Catch::Approx(report.et_star).margin(1e-9));
}

TEST_CASE("scan is not fooled by an interior stationary maximum") {
    // this curve has a stationary point that is a maximum; the minimum over
    // any [0, hi] sits at the right boundary where the curve approaches its
    // limit from above
    const auto f = builtin_expression("rayleigh_pair");
    const auto g =
        tabulate_expression(f, graded_knots(4.0, 500), graded_knots(4.0, 500));
    const auto report = optimize_scan(JointDensity{g}, {{0.0, 3.0}});
    CHECK(report.tau_star > 1.0);  // far from the maximum at ~0.244
    CHECK(report.et_star == Catch::Approx(0.44311346272637901).margin(2e-3));
}

TEST_CASE("scan aborts when the curve does not exist") {
    const auto f = builtin_expression("pareto_tails");
    const auto g = tabulate_expression(f, graded_knots(250.0, 200, 2.0),
                                       graded_knots(250.0, 200, 2.0));
    CHECK_THROWS_AS(optimize_scan(JointDensity{g}, {{0.0, 10.0}}),
                    divergent_error);
}

TEST_CASE("scan contract checks") {
    const JointDensity d = two_block();
    ScanConfig cfg;
    cfg.grid_points = 1;
    CHECK_THROWS_AS(optimize_scan(d, std::nullopt, cfg), contract_error);
    CHECK_THROWS_AS(optimize_scan(d, {{-1.0, 2.0}}), contract_error);
    CHECK_THROWS_AS(optimize_scan(d, {{2.0, 2.0}}), contract_error);
}

TEST_CASE("scan default range covers the support of the first algorithm") {
    const auto report = optimize_scan(JointDensity{two_block()});
    CHECK(report.tau_star == Catch::Approx(3.0).margin(0.02));
    CHECK(report.et_star == Catch::Approx(4.0).margin(1e-4));
}

TEST_CASE("dominance detection") {
    CHECK(dominance_check(TimingSamples{{{1.0, 2.0}, {2.0, 3.0}}}).value() == 1);
    CHECK(dominance_check(TimingSamples{{{2.0, 1.0}, {3.0, 1.0}}}).value() == 2);
    CHECK_FALSE(dominance_check(TimingSamples{{{1.0, 2.0}, {2.0, 1.0}}}).has_value());
    CHECK(dominance_check(TimingSamples{{{1.0, 1.0}, {2.0, 2.0}}}).value() == 1);
    CHECK_FALSE(dominance_check(TimingSamples{}).has_value());
}
