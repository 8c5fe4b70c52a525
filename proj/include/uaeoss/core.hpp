#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace uaeoss {

/// Satellite pointing state in degrees (pitch, roll, yaw).
struct Attitude {
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  double yaw_deg = 0.0;
};

/// One axis of a task's attitude profile: value at window start plus a
/// constant rate, valid on [ws_s, we_s].
struct AxisProfile {
  double start_deg = 0.0;
  double rate_deg_per_s = 0.0;

  double at(double dt_s) const { return start_deg + rate_deg_per_s * dt_s; }
};

struct AttitudeProfile {
  AxisProfile pitch;
  AxisProfile roll;
  AxisProfile yaw;
};

/// An observation request with its visible time window and the attitude the
/// satellite must hold to image it at any instant of that window.
struct Task {
  int id = 0;
  double ws_s = 0.0;             // window start
  double we_s = 0.0;             // window end
  double du_s = 0.0;             // imaging duration
  double expected_profit = 0.0;  // profit units
  AttitudeProfile profile;
};

/// One linear segment of the slew-time model: time = a_s + angle / v for
/// angles in [lo_deg, hi_deg). The last segment is unbounded above.
struct TransitionSegment {
  double a_s = 0.0;
  double v_deg_per_s = 1.0;
  double lo_deg = 0.0;
  double hi_deg = std::numeric_limits<double>::infinity();
};

/// Piecewise-linear attitude transition time as a function of the total
/// maneuver angle. Segment intervals are lower-inclusive, upper-exclusive;
/// the first matching segment wins. The model may be discontinuous at
/// interior breakpoints.
struct TransitionModel {
  std::vector<TransitionSegment> segments;

  // Throws std::invalid_argument if segments do not cover [0, inf) in
  // ascending order with v > 0 and a >= 0.
  void validate() const;
};

/// Standard 4-segment slew-time model used by the instance generator.
TransitionModel default_transition_model();

struct Instance {
  std::vector<Task> tasks;
  double st_s = 0.0;                       // scheduling horizon end
  double mmc_units = 0.0;                  // maximum memory capacity
  double expected_rate_units_per_s = 0.0;  // expected memory write rate (cr)
  TransitionModel transition;
  double attitude_bound_deg = 0.0;  // symmetric pitch/roll maneuvering bound
  double max_transition_time_s = 0.0;

  std::size_t task_count() const { return tasks.size(); }

  // Recomputes the cached max_transition_time_s from the transition model,
  // the maneuvering bound and the task profiles.
  void refresh_max_transition_time();

  // Throws std::invalid_argument on any violated task/instance invariant.
  void validate() const;
};

/// One sampled world: per-task realized profit, realized memory write rate
/// and cloud visibility. Profit and visibility are known before a decision;
/// the rate is revealed only when the observation completes.
struct EnvironmentRealization {
  std::vector<double> actual_profit;
  std::vector<double> actual_rate_units_per_s;
  std::vector<std::uint8_t> visible;
  std::uint64_t seed = 0;
};

struct Observation {
  int task_id = 0;
  double os_s = 0.0;
  double oe_s = 0.0;
};

enum class ScheduleStatus { Completed, ImagingFailure };

/// An ordered observation sequence. When status is ImagingFailure the entry
/// at failure_index is the observation whose realized memory draw exceeded
/// the remaining capacity; it earns no profit and ends the schedule.
struct Schedule {
  std::vector<Observation> observations;
  ScheduleStatus status = ScheduleStatus::Completed;
  std::size_t failure_index = 0;  // meaningful only for ImagingFailure
  double realized_profit = 0.0;
  double memory_used_units = 0.0;
};

enum class ConstraintTag {
  UnknownTask,
  Duplicate,
  Ordering,
  Visibility,
  Window,
  Duration,
  Transition,
  Memory,
};

std::string to_string(ConstraintTag tag);

struct Violation {
  ConstraintTag tag;
  std::vector<int> task_ids;
  std::string detail;
};

struct ValidationReport {
  bool feasible = true;
  std::vector<Violation> violations;
};

/// Attitude required to observe `task` at time t. Throws std::out_of_range
/// when t lies outside [ws_s, we_s].
Attitude attitude_at(const Task& task, double t_s);

/// Total maneuver angle between two attitudes: sum of per-axis absolute
/// differences. Symmetric, satisfies the triangle inequality.
double transition_angle(const Attitude& a, const Attitude& b);

/// Slew time for a maneuver angle delta_g_deg >= 0.
double transition_time(const TransitionModel& model, double delta_g_deg);

/// Transition time at the largest maneuver angle the instance can require.
double max_transition_time(const Instance& instance);

/// Largest maneuver angle attainable under the instance's bounds: full pitch
/// span plus full roll span with yaw at 0, widened when a task profile (or
/// the boot attitude) reaches measurably beyond the bounds on some axis.
double max_maneuver_angle(const Instance& instance);

/// Offline feasibility check of a schedule against the full constraint set:
/// task identity, ordering, visibility, window containment, imaging
/// duration, pairwise transition times and cumulative memory. Collects every
/// violation instead of stopping at the first.
ValidationReport validate_schedule(const Instance& instance,
                                   const EnvironmentRealization& env,
                                   const Schedule& schedule);

/// Mean realized profit over a set of environment realizations. Throws
/// std::invalid_argument on an empty list.
double expected_total_profit(const std::vector<double>& profits);

}  // namespace uaeoss
