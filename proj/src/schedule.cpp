#include "sdpsa/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sdpsa {

Schedule Schedule::constant(double c) {
  // Zero is allowed so the slow step can be frozen; the pair validator rejects it.
  if (!(c >= 0.0)) throw std::invalid_argument("constant step must be nonnegative");
  return Schedule(Kind::constant, c);
}

Schedule Schedule::power(double c, double p) {
  if (!(c > 0.0)) throw std::invalid_argument("power schedule scale must be positive");
  if (!(p >= 0.0)) throw std::invalid_argument("power schedule exponent must be nonnegative");
  Schedule s(Kind::power, c);
  s.exponent_ = p;
  return s;
}

Schedule Schedule::hold_decay(double c, std::uint64_t hold, double factor, double floor) {
  if (!(c > 0.0)) throw std::invalid_argument("hold_decay start must be positive");
  if (!(factor > 0.0 && factor <= 1.0)) throw std::invalid_argument("decay factor must lie in (0, 1]");
  if (!(floor >= 0.0 && floor <= c)) throw std::invalid_argument("decay floor must lie in [0, start]");
  Schedule s(Kind::hold_decay, c);
  s.hold_ = hold;
  s.factor_ = factor;
  s.floor_ = floor;
  return s;
}

double Schedule::at(std::uint64_t m) const {
  switch (kind_) {
    case Kind::constant:
      return scale_;
    case Kind::power:
      return scale_ / std::pow(1.0 + static_cast<double>(m), exponent_);
    case Kind::hold_decay:
      if (m < hold_) return scale_;
      return std::max(floor_, scale_ * std::pow(factor_, static_cast<double>(m - hold_)));
  }
  return scale_;
}

double Schedule::eventual_value() const {
  switch (kind_) {
    case Kind::constant:
      return scale_;
    case Kind::power:
      return exponent_ == 0.0 ? scale_ : 0.0;
    case Kind::hold_decay:
      return factor_ == 1.0 ? scale_ : floor_;
  }
  return scale_;
}

std::string Schedule::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::constant:
      out << "constant(" << scale_ << ")";
      break;
    case Kind::power:
      out << scale_ << "/(1+m)^" << exponent_;
      break;
    case Kind::hold_decay:
      out << "hold_decay(" << scale_ << ", hold=" << hold_ << ", factor=" << factor_
          << ", floor=" << floor_ << ")";
      break;
  }
  return out.str();
}

namespace {

struct Asymptotics {
  bool sum_diverges;
  bool square_sum_finite;
  bool ratio_to_one;
  // Decay rate m^-rate when the tail is polynomial; 0 for a constant tail,
  // +inf for a geometric (summable) tail.
  double rate;
};

Asymptotics asymptotics(const Schedule& s) {
  switch (s.kind()) {
    case Schedule::Kind::constant:
      return {true, false, true, 0.0};
    case Schedule::Kind::power: {
      const double p = s.exponent();
      return {p <= 1.0, p > 0.5, true, p};
    }
    case Schedule::Kind::hold_decay:
      if (s.eventual_value() > 0.0) return {true, false, true, 0.0};
      return {false, true, s.factor() == 1.0, INFINITY};
  }
  return {true, false, true, 0.0};
}

}  // namespace

ScheduleReport validate_schedule_pair(const Schedule& slow, const Schedule& fast) {
  ScheduleReport report;
  if (!(slow.scale() > 0.0) || !(fast.scale() > 0.0)) {
    report.violations.push_back("steps must be strictly positive");
    return report;
  }
  if (slow.is_constant_like() && fast.is_constant_like() && slow.eventual_value() > 0.0 &&
      fast.eventual_value() > 0.0) {
    report.mode = ScheduleReport::Mode::constant;
    if (!(slow.scale() < fast.scale() && slow.eventual_value() < fast.eventual_value()))
      report.violations.push_back("slow step must stay below fast step (" + slow.describe() +
                                  " vs " + fast.describe() + ")");
    report.warnings.push_back(
        "constant steps: square-summability and slow/fast -> 0 do not hold; "
        "only the timescale ordering is checked");
    return report;
  }

  const Asymptotics a = asymptotics(slow);
  const Asymptotics b = asymptotics(fast);
  if (!a.sum_diverges) report.violations.push_back("sum of slow steps is finite");
  if (!b.sum_diverges) report.violations.push_back("sum of fast steps is finite");
  if (!a.square_sum_finite) report.violations.push_back("sum of squared slow steps diverges");
  if (!b.square_sum_finite) report.violations.push_back("sum of squared fast steps diverges");
  if (!(a.rate > b.rate)) report.violations.push_back("slow/fast step ratio does not vanish");
  if (!a.ratio_to_one) report.violations.push_back("consecutive slow-step ratio does not tend to 1");
  return report;
}

}  // namespace sdpsa
