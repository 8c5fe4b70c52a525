#include "uaeoss/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace uaeoss {

namespace {

// Shared slack tolerance for time comparisons in the validator. Rollouts
// commit times produced by the same arithmetic the validator re-evaluates,
// so this only has to absorb rounding of stored sums.
constexpr double kTimeTolS = 1e-9;

std::string fmt_task(int id) { return "task " + std::to_string(id); }

}  // namespace

void TransitionModel::validate() const {
  if (segments.empty()) {
    throw std::invalid_argument("transition model: no segments");
  }
  if (segments.front().lo_deg != 0.0) {
    throw std::invalid_argument("transition model: first segment must start at 0");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.v_deg_per_s > 0.0) || s.a_s < 0.0) {
      throw std::invalid_argument("transition model: need v > 0 and a >= 0");
    }
    if (!(s.lo_deg < s.hi_deg)) {
      throw std::invalid_argument("transition model: empty segment interval");
    }
    if (i + 1 < segments.size()) {
      if (segments[i + 1].lo_deg != s.hi_deg) {
        throw std::invalid_argument("transition model: segments must tile [0, inf)");
      }
    } else if (std::isfinite(s.hi_deg)) {
      throw std::invalid_argument("transition model: last segment must be unbounded");
    }
  }
}

TransitionModel default_transition_model() {
  TransitionModel m;
  m.segments = {
      {5.0, 1.0, 0.0, 15.0},
      {10.0, 2.0, 15.0, 40.0},
      {16.0, 2.5, 40.0, 90.0},
      {22.0, 3.0, 90.0, std::numeric_limits<double>::infinity()},
  };
  return m;
}

Attitude attitude_at(const Task& task, double t_s) {
  if (t_s < task.ws_s || t_s > task.we_s) {
    std::ostringstream os;
    os << "attitude_at: t=" << t_s << " outside window [" << task.ws_s << ", "
       << task.we_s << "] of " << fmt_task(task.id);
    throw std::out_of_range(os.str());
  }
  const double dt = t_s - task.ws_s;
  return Attitude{task.profile.pitch.at(dt), task.profile.roll.at(dt),
                  task.profile.yaw.at(dt)};
}

double transition_angle(const Attitude& a, const Attitude& b) {
  return std::abs(a.pitch_deg - b.pitch_deg) + std::abs(a.roll_deg - b.roll_deg) +
         std::abs(a.yaw_deg - b.yaw_deg);
}

double transition_time(const TransitionModel& model, double delta_g_deg) {
  if (!(delta_g_deg >= 0.0)) {
    throw std::invalid_argument("transition_time: negative maneuver angle");
  }
  for (const auto& s : model.segments) {
    if (delta_g_deg >= s.lo_deg && delta_g_deg < s.hi_deg) {
      return s.a_s + delta_g_deg / s.v_deg_per_s;
    }
  }
  // Unreachable for a validated model; keep a hard failure for malformed ones.
  throw std::logic_error("transition_time: angle not covered by any segment");
}

double max_maneuver_angle(const Instance& instance) {
  double lo_p = -instance.attitude_bound_deg, hi_p = instance.attitude_bound_deg;
  double lo_r = -instance.attitude_bound_deg, hi_r = instance.attitude_bound_deg;
  double lo_y = 0.0, hi_y = 0.0;
  // Profiles sit inside the bounds up to rounding; only a measurable excess
  // widens the range (same tolerance the instance validator allows).
  auto widen = [](double& lo, double& hi, const AxisProfile& ax, double len) {
    for (const double v : {ax.at(0.0), ax.at(len)}) {
      if (v < lo - 1e-9) lo = v;
      if (v > hi + 1e-9) hi = v;
    }
  };
  for (const auto& t : instance.tasks) {
    const double len = t.we_s - t.ws_s;
    widen(lo_p, hi_p, t.profile.pitch, len);
    widen(lo_r, hi_r, t.profile.roll, len);
    widen(lo_y, hi_y, t.profile.yaw, len);
  }
  return (hi_p - lo_p) + (hi_r - lo_r) + (hi_y - lo_y);
}

void Instance::refresh_max_transition_time() {
  max_transition_time_s = transition_time(transition, max_maneuver_angle(*this));
}

void Instance::validate() const {
  if (tasks.empty()) throw std::invalid_argument("instance: no tasks");
  if (!(mmc_units > 0.0)) throw std::invalid_argument("instance: MMC must be positive");
  if (!(expected_rate_units_per_s > 0.0)) {
    throw std::invalid_argument("instance: expected rate must be positive");
  }
  if (!(st_s > 0.0)) throw std::invalid_argument("instance: horizon must be positive");
  transition.validate();
  for (const auto& t : tasks) {
    if (!(t.ws_s >= 0.0) || !(t.ws_s < t.we_s) || !(t.we_s <= st_s)) {
      throw std::invalid_argument(fmt_task(t.id) + ": window outside [0, ST]");
    }
    if (!(t.du_s > 0.0) || !(t.du_s <= t.we_s - t.ws_s)) {
      throw std::invalid_argument(fmt_task(t.id) + ": bad imaging duration");
    }
    if (!(t.expected_profit > 0.0)) {
      throw std::invalid_argument(fmt_task(t.id) + ": non-positive expected profit");
    }
    const double len = t.we_s - t.ws_s;
    for (const AxisProfile* ax : {&t.profile.pitch, &t.profile.roll}) {
      const double v0 = ax->at(0.0), v1 = ax->at(len);
      if (std::max(std::abs(v0), std::abs(v1)) > attitude_bound_deg + 1e-9) {
        throw std::invalid_argument(fmt_task(t.id) + ": attitude profile exceeds bound");
      }
    }
    if (!std::isfinite(t.profile.yaw.at(0.0)) || !std::isfinite(t.profile.yaw.at(len))) {
      throw std::invalid_argument(fmt_task(t.id) + ": non-finite yaw profile");
    }
  }
}

double max_transition_time(const Instance& instance) {
  return instance.max_transition_time_s;
}

std::string to_string(ConstraintTag tag) {
  switch (tag) {
    case ConstraintTag::UnknownTask: return "unknown-task";
    case ConstraintTag::Duplicate: return "duplicate";
    case ConstraintTag::Ordering: return "ordering";
    case ConstraintTag::Visibility: return "visibility";
    case ConstraintTag::Window: return "window";
    case ConstraintTag::Duration: return "duration";
    case ConstraintTag::Transition: return "transition";
    case ConstraintTag::Memory: return "memory";
  }
  return "unknown";
}

ValidationReport validate_schedule(const Instance& instance,
                                   const EnvironmentRealization& env,
                                   const Schedule& schedule) {
  ValidationReport report;
  auto add = [&report](ConstraintTag tag, std::vector<int> ids, std::string detail) {
    report.violations.push_back({tag, std::move(ids), std::move(detail)});
  };

  std::unordered_map<int, std::size_t> index_of;
  for (std::size_t i = 0; i < instance.tasks.size(); ++i) {
    index_of.emplace(instance.tasks[i].id, i);
  }

  const bool failed = schedule.status == ScheduleStatus::ImagingFailure;
  if (failed && schedule.failure_index + 1 != schedule.observations.size()) {
    add(ConstraintTag::Memory, {},
        "imaging failure must be the terminal observation");
  }

  std::unordered_set<int> seen;
  double memory_units = 0.0;
  const Task* prev_task = nullptr;
  double prev_oe = 0.0;

  for (std::size_t k = 0; k < schedule.observations.size(); ++k) {
    const auto& obs = schedule.observations[k];
    const auto it = index_of.find(obs.task_id);
    if (it == index_of.end()) {
      add(ConstraintTag::UnknownTask, {obs.task_id}, "id not in instance");
      continue;
    }
    const std::size_t ti = it->second;
    const Task& task = instance.tasks[ti];

    if (!seen.insert(obs.task_id).second) {
      add(ConstraintTag::Duplicate, {obs.task_id}, "task observed twice");
    }
    if (k > 0 && obs.os_s < schedule.observations[k - 1].os_s) {
      add(ConstraintTag::Ordering, {obs.task_id}, "observations not ordered by start");
    }
    if (ti < env.visible.size() && env.visible[ti] == 0) {
      add(ConstraintTag::Visibility, {obs.task_id}, "task is cloud covered");
    }
    if (obs.os_s < task.ws_s || obs.oe_s > task.we_s || !(obs.os_s < obs.oe_s)) {
      add(ConstraintTag::Window, {obs.task_id}, "observation outside visible window");
    }
    if (std::abs((obs.oe_s - obs.os_s) - task.du_s) > kTimeTolS) {
      add(ConstraintTag::Duration, {obs.task_id},
          "observation length differs from imaging duration");
    }
    if (prev_task != nullptr) {
      // Same arithmetic as the simulator's delay(): prev_end + slew - os.
      const Attitude att_prev =
          attitude_at(*prev_task, std::min(prev_oe, prev_task->we_s));
      const Attitude att_here = attitude_at(task, std::clamp(obs.os_s, task.ws_s, task.we_s));
      const double slew = transition_time(instance.transition,
                                          transition_angle(att_prev, att_here));
      const double slack = prev_oe + slew - obs.os_s;
      if (slack > kTimeTolS) {
        std::ostringstream det;
        det << "gap " << obs.os_s - prev_oe << "s < transition " << slew << "s";
        add(ConstraintTag::Transition, {prev_task->id, obs.task_id}, det.str());
      }
    }

    const double rate = ti < env.actual_rate_units_per_s.size()
                            ? env.actual_rate_units_per_s[ti]
                            : instance.expected_rate_units_per_s;
    const double draw = rate * task.du_s;
    const bool failure_entry = failed && k == schedule.failure_index;
    if (failure_entry) {
      if (memory_units + draw <= instance.mmc_units) {
        add(ConstraintTag::Memory, {obs.task_id},
            "memory draw fits but schedule reports imaging failure");
      }
    } else {
      memory_units += draw;
      if (memory_units > instance.mmc_units) {
        add(ConstraintTag::Memory, {obs.task_id}, "cumulative memory exceeds capacity");
      }
    }

    prev_task = &task;
    prev_oe = obs.oe_s;
  }

  report.feasible = report.violations.empty();
  return report;
}

double expected_total_profit(const std::vector<double>& profits) {
  if (profits.empty()) {
    throw std::invalid_argument("expected_total_profit: empty profit list");
  }
  const double sum = std::accumulate(profits.begin(), profits.end(), 0.0);
  return sum / static_cast<double>(profits.size());
}

}  // namespace uaeoss
