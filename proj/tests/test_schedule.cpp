#include <catch2/catch_amalgamated.hpp>

#include "relay/schedule.hpp"

using namespace relay;

TEST_CASE("two-stage outcomes") {
    const Schedule s{{3.0}};
    const auto fast = derived_time({2.0, 5.0}, s);
    CHECK(fast.total_time == 2.0);
    CHECK(fast.completing_index == 1);

    const auto slow = derived_time({5.0, 2.0}, s);
    CHECK(slow.total_time == 5.0);  // 3 + 2
    CHECK(slow.completing_index == 2);
}

TEST_CASE("finishing exactly at the budget counts as completing") {
    const auto outcome = derived_time({3.0, 7.0}, Schedule{{3.0}});
    CHECK(outcome.total_time == 3.0);
    CHECK(outcome.completing_index == 1);
}

TEST_CASE("three stages falling through to the last") {
    const auto outcome = derived_time({4.0, 9.0, 1.0}, Schedule{{2.0, 3.0}});
    CHECK(outcome.total_time == 6.0);
    CHECK(outcome.completing_index == 3);
}

TEST_CASE("single algorithm, empty schedule") {
    const auto outcome = derived_time({7.5}, Schedule{});
    CHECK(outcome.total_time == 7.5);
    CHECK(outcome.completing_index == 1);
}

TEST_CASE("zero budgets always fall through") {
    const auto outcome = derived_time({0.5, 0.5, 2.5}, Schedule{{0.0, 0.0}});
    CHECK(outcome.total_time == 2.5);
    CHECK(outcome.completing_index == 3);
}

TEST_CASE("a generous first budget hides the rest") {
    const auto outcome = derived_time({1.0, 100.0}, Schedule{{50.0}});
    CHECK(outcome.total_time == 1.0);
    CHECK(outcome.completing_index == 1);
}

TEST_CASE("outcome never beats the completing stage's own time") {
    const Schedule s{{1.0, 2.0}};
    for (double t1 : {0.5, 1.5})
        for (double t2 : {1.0, 2.5})
            for (double t3 : {0.25, 4.0}) {
                const auto o = derived_time({t1, t2, t3}, s);
                const double own = o.completing_index == 1   ? t1
                                   : o.completing_index == 2 ? t2
                                                             : t3;
                CHECK(o.total_time >= own);
                if (o.completing_index == 1) CHECK(o.total_time == own);
            }
}

TEST_CASE("contract violations") {
    CHECK_THROWS_AS(derived_time({1.0, 2.0}, Schedule{{1.0, 2.0}}), contract_error);
    CHECK_THROWS_AS(derived_time({1.0}, Schedule{{1.0}}), contract_error);
    CHECK_THROWS_AS(derived_time({0.0, 1.0}, Schedule{{1.0}}), contract_error);
    CHECK_THROWS_AS(derived_time({1.0, -2.0}, Schedule{{1.0}}), contract_error);
    CHECK_THROWS_AS(validate(Schedule{{-1.0}}), contract_error);
    CHECK_NOTHROW(validate(Schedule{{0.0, 5.0}}));
}
