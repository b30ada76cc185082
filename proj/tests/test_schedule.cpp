#include <doctest.h>

#include <numeric>
#include <stdexcept>

#include "ceopt/rng.hpp"
#include "ceopt/schedule.hpp"
#include "oracles.hpp"

using namespace ceopt;

TEST_CASE("uniform schedule is the identity") {
    EvaluationSchedule sched(ScheduleSpec{}, 10, 5, 10);
    for (int k = 1; k <= 10; ++k) {
        const Allocation a = sched.next(k);
        CHECK(a.m == 10);
        CHECK(a.m_elite == 5);
    }
}

TEST_CASE("literal geometric matches the hand-evaluated sequence") {
    const ScheduleSpec spec{ScheduleKind::geometric_literal, 0.1};
    EvaluationSchedule sched(spec, 10, 5, 10);
    std::vector<int> expected_elites;
    const std::vector<int> expected =
        oracles::literal_schedule_sequence(0.1, 10, 5, 10, &expected_elites);
    CHECK(expected[0] == 9); // round(100 * 0.1 * 0.9)
    for (int k = 1; k <= 10; ++k) {
        const Allocation a = sched.next(k);
        CHECK(a.m == expected[k - 1]);
        CHECK(a.m_elite == expected_elites[k - 1]);
    }
}

TEST_CASE("budgeted geometric spends the budget exactly") {
    for (double p : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8}) {
        EvaluationSchedule sched({ScheduleKind::geometric_budgeted, p}, 10, 5, 10);
        int total = 0;
        for (int k = 1; k <= 10; ++k) {
            const Allocation a = sched.next(k);
            CHECK(a.m >= 0);
            CHECK(a.m_elite == std::min(5, a.m));
            total += a.m;
        }
        CHECK(total == 100);
    }
}

TEST_CASE("budgeted geometric can exhaust early leaving a zero final iteration") {
    EvaluationSchedule sched({ScheduleKind::geometric_budgeted, 0.5}, 5, 3, 10);
    std::vector<int> ms;
    int total = 0;
    for (int k = 1; k <= 10; ++k) {
        ms.push_back(sched.next(k).m);
        total += ms.back();
    }
    CHECK(total == 50);
    CHECK(ms.front() == 25); // round(50 * 0.5)
    CHECK(ms.back() == 0);
}

TEST_CASE("budget conservation holds for all three kinds") {
    RngStream rng(61);
    for (int rep = 0; rep < 200; ++rep) {
        const int m = 1 + static_cast<int>(rng.uniform() * 20);
        const int m_elite = 1 + static_cast<int>(rng.uniform() * m);
        const int k_max = 2 + static_cast<int>(rng.uniform() * 18);
        const double p = 0.05 + 0.85 * rng.uniform();
        for (const ScheduleSpec spec :
             {ScheduleSpec{}, ScheduleSpec{ScheduleKind::geometric_literal, p},
              ScheduleSpec{ScheduleKind::geometric_budgeted, p}}) {
            EvaluationSchedule sched(spec, m, m_elite, k_max);
            long long total = 0;
            for (int k = 1; k <= k_max; ++k) {
                const Allocation a = sched.next(k);
                REQUIRE(a.m >= 0);
                REQUIRE(a.m_elite <= a.m + (spec.kind == ScheduleKind::uniform ? m : 0));
                total += a.m;
            }
            CHECK(total == static_cast<long long>(m) * k_max);
        }
    }
}

TEST_CASE("budgeted kind rejects out-of-order queries") {
    EvaluationSchedule sched({ScheduleKind::geometric_budgeted, 0.2}, 10, 5, 10);
    CHECK_THROWS_AS(sched.next(3), std::logic_error);
    CHECK(sched.next(1).m >= 0);
    CHECK_THROWS_AS(sched.next(1), std::logic_error);
}

TEST_CASE("spec parsing and validation") {
    CHECK(ScheduleSpec::parse("uniform").kind == ScheduleKind::uniform);
    const ScheduleSpec g = ScheduleSpec::parse("geom:0.25");
    CHECK(g.kind == ScheduleKind::geometric_budgeted);
    CHECK(g.p == doctest::Approx(0.25));
    CHECK(ScheduleSpec::parse("geom-literal:0.1").kind == ScheduleKind::geometric_literal);
    CHECK_THROWS_AS(ScheduleSpec::parse("linear"), std::invalid_argument);
    CHECK_THROWS_AS(ScheduleSpec::parse("geom:1.5"), std::invalid_argument);
    CHECK_THROWS_AS(EvaluationSchedule(ScheduleSpec{}, 5, 9, 10), std::invalid_argument);
}
