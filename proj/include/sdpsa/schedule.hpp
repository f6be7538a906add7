#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdpsa {

/**
 * Step-size sequence descriptor.
 *
 *  - constant:   step_m = c
 *  - power:      step_m = c / (1 + m)^p
 *  - hold_decay: step_m = c for m < hold, then c * factor^(m - hold), never below floor
 *
 * hold_decay is the slow-step law used in constant-step experiments: it starts at
 * c, decays geometrically and settles on a small positive constant.
 */
class Schedule {
 public:
  enum class Kind { constant, power, hold_decay };

  static Schedule constant(double c);
  static Schedule power(double c, double p);
  static Schedule hold_decay(double c, std::uint64_t hold, double factor, double floor);

  double at(std::uint64_t m) const;

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  double exponent() const { return exponent_; }
  std::uint64_t hold() const { return hold_; }
  double factor() const { return factor_; }
  double floor() const { return floor_; }

  /// Value the sequence settles at for constant-like kinds (0 for power).
  double eventual_value() const;
  bool is_constant_like() const { return kind_ != Kind::power; }

  std::string describe() const;

 private:
  Schedule(Kind kind, double scale) : kind_(kind), scale_(scale) {}

  Kind kind_;
  double scale_;
  double exponent_ = 0.0;
  std::uint64_t hold_ = 0;
  double factor_ = 1.0;
  double floor_ = 0.0;
};

struct ScheduleReport {
  enum class Mode { theory, constant };

  Mode mode = Mode::theory;
  std::vector<std::string> violations;
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
};

/**
 * Checks a (slow, fast) pair against the two-timescale step-size conditions:
 * both sums diverge, both square sums converge, slow/fast -> 0 and
 * slow_{m+1}/slow_m -> 1. The check is symbolic, from the descriptors.
 *
 * When both sequences are constant-like only the ordering slow < fast is
 * enforced; the report then carries a warning that the diminishing-step
 * conditions do not hold.
 */
ScheduleReport validate_schedule_pair(const Schedule& slow, const Schedule& fast);

}  // namespace sdpsa
