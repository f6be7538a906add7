#include "doctest.h"

#include "sdpsa/schedule.hpp"

using namespace sdpsa;

TEST_CASE("schedule values") {
  CHECK(Schedule::constant(0.4).at(1000) == 0.4);
  CHECK(Schedule::power(1.0, 1.0).at(0) == 1.0);
  CHECK(Schedule::power(1.0, 1.0).at(3) == doctest::Approx(0.25));
  const Schedule nu = Schedule::hold_decay(0.1, 100, 0.5, 0.01);
  CHECK(nu.at(99) == 0.1);
  CHECK(nu.at(100) == 0.1);
  CHECK(nu.at(101) == doctest::Approx(0.05));
  CHECK(nu.at(105) == doctest::Approx(0.01));
  CHECK(nu.at(100000) == 0.01);
  CHECK(nu.eventual_value() == 0.01);
  CHECK_THROWS(Schedule::power(0.0, 1.0));
  CHECK_THROWS(Schedule::hold_decay(0.1, 10, 1.5, 0.0));
  CHECK_THROWS(Schedule::hold_decay(0.1, 10, 0.9, 0.2));
}

TEST_CASE("two-timescale conditions") {
  SUBCASE("1/(1+m) over 1/(1+m)^(2/3)") {
    const auto r = validate_schedule_pair(Schedule::power(1.0, 1.0), Schedule::power(1.0, 2.0 / 3.0));
    CHECK(r.ok());
    CHECK(r.mode == ScheduleReport::Mode::theory);
  }
  SUBCASE("equal rates") {
    const auto r = validate_schedule_pair(Schedule::power(1.0, 1.0), Schedule::power(1.0, 1.0));
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].find("ratio") != std::string::npos);
  }
  SUBCASE("too slow a decay") {
    const auto r = validate_schedule_pair(Schedule::power(1.0, 0.5), Schedule::power(1.0, 0.4));
    CHECK_FALSE(r.ok());
    CHECK(r.violations.size() == 2);  // both square sums diverge
  }
  SUBCASE("summable slow step") {
    const auto r = validate_schedule_pair(Schedule::power(1.0, 1.5), Schedule::power(1.0, 0.75));
    CHECK(r.violations == std::vector<std::string>{"sum of slow steps is finite"});
  }
  SUBCASE("constant pair checks ordering only") {
    const auto r = validate_schedule_pair(Schedule::constant(0.1), Schedule::constant(0.4));
    CHECK(r.ok());
    CHECK(r.mode == ScheduleReport::Mode::constant);
    CHECK(r.warnings.size() == 1);
    CHECK_FALSE(validate_schedule_pair(Schedule::constant(0.5), Schedule::constant(0.4)).ok());
  }
  SUBCASE("decaying nu with floor counts as constant") {
    const auto r = validate_schedule_pair(Schedule::hold_decay(0.2, 100, 0.999, 0.02),
                                          Schedule::constant(0.4));
    CHECK(r.ok());
    CHECK(r.mode == ScheduleReport::Mode::constant);
  }
  SUBCASE("mixed constant fast step fails theory mode") {
    const auto r = validate_schedule_pair(Schedule::power(1.0, 1.0), Schedule::constant(0.4));
    CHECK(r.violations == std::vector<std::string>{"sum of squared fast steps diverges"});
  }
  SUBCASE("frozen slow step") {
    CHECK_FALSE(validate_schedule_pair(Schedule::constant(0.0), Schedule::constant(0.4)).ok());
  }
}
