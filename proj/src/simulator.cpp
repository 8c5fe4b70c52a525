#include "uaeoss/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uaeoss {

namespace {

double eval_delay(const Instance& instance, double prev_end_s, const Attitude& prev_att,
                  const Task& next, double os_s, int* evals) {
  if (evals != nullptr) ++*evals;
  const Attitude att = attitude_at(next, os_s);
  const double slew = transition_time(instance.transition, transition_angle(prev_att, att));
  return prev_end_s + slew - os_s;
}

// Maneuver angle toward `task` as a function of the start time; piecewise
// linear with kinks where an axis profile passes through the previous
// attitude's value on that axis.
double angle_at(const Attitude& prev_att, const Task& task, double os_s) {
  const double dt = os_s - task.ws_s;
  return std::abs(prev_att.pitch_deg - task.profile.pitch.at(dt)) +
         std::abs(prev_att.roll_deg - task.profile.roll.at(dt)) +
         std::abs(prev_att.yaw_deg - task.profile.yaw.at(dt));
}

// Positions in (lo, hi) where the delay curve can jump or kink: axis kinks
// plus the starts at which the maneuver angle crosses a transition-segment
// boundary. Between consecutive breakpoints the delay is linear and, for the
// sweep rates the generator enforces, strictly decreasing.
std::vector<double> delay_breakpoints(const Instance& instance, const Attitude& prev_att,
                                      const Task& task, double lo, double hi) {
  std::vector<double> kinks;
  auto add_kink = [&](double prev_val, const AxisProfile& ax) {
    if (ax.rate_deg_per_s == 0.0) return;
    const double t = task.ws_s + (prev_val - ax.start_deg) / ax.rate_deg_per_s;
    if (t > lo && t < hi) kinks.push_back(t);
  };
  add_kink(prev_att.pitch_deg, task.profile.pitch);
  add_kink(prev_att.roll_deg, task.profile.roll);
  add_kink(prev_att.yaw_deg, task.profile.yaw);
  std::sort(kinks.begin(), kinks.end());

  std::vector<double> pts;
  pts.push_back(lo);
  pts.insert(pts.end(), kinks.begin(), kinks.end());
  pts.push_back(hi);

  std::vector<double> bps = kinks;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double u = pts[i], v = pts[i + 1];
    if (!(v > u)) continue;
    const double gu = angle_at(prev_att, task, u);
    const double gv = angle_at(prev_att, task, v);
    const double slope = (gv - gu) / (v - u);
    if (slope == 0.0) continue;
    for (std::size_t s = 1; s < instance.transition.segments.size(); ++s) {
      const double theta = instance.transition.segments[s].lo_deg;
      if ((gu - theta) * (gv - theta) < 0.0) {
        const double root = u + (theta - gu) / slope;
        if (root > lo && root < hi) bps.push_back(root);
      }
    }
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  return bps;
}

// Bracketed binary search on a monotone piece: d(lo) > 0, d(hi) <= 0.
// Returns the upper bracket end, which is always feasible.
double bisect_piece(const Instance& instance, double prev_end_s, const Attitude& prev_att,
                    const Task& task, double lo, double hi, int* evals) {
  while (hi - lo > kEarliestStartTolS) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eval_delay(instance, prev_end_s, prev_att, task, mid, evals) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

double delay(const Instance& instance, double prev_end_s, const Attitude& prev_attitude,
             const Task& next, double os_s) {
  return eval_delay(instance, prev_end_s, prev_attitude, next, os_s, nullptr);
}

double delay(const Instance& instance, double prev_end_s, const Task& prev,
             const Task& next, double os_s) {
  return eval_delay(instance, prev_end_s, attitude_at(prev, prev_end_s), next, os_s,
                    nullptr);
}

std::optional<double> earliest_start(const Instance& instance, double prev_end_s,
                                     const Attitude& prev_attitude, const Task& task,
                                     int* delay_evals) {
  const double l = std::max(task.ws_s, prev_end_s);
  double r = task.we_s - task.du_s;
  // Keep os + du inside the window under floating-point rounding.
  while (r + task.du_s > task.we_s) r = std::nextafter(r, -std::numeric_limits<double>::infinity());
  if (r < l) return std::nullopt;

  double d_left = eval_delay(instance, prev_end_s, prev_attitude, task, l, delay_evals);
  if (d_left <= 0.0) return l;

  std::vector<double> pts = delay_breakpoints(instance, prev_attitude, task, l, r);
  pts.push_back(r);

  double u = l;
  for (const double v : pts) {
    // Probe just left of v: same continuous piece as (u, v).
    double probe = std::nextafter(v, u);
    if (probe < u) probe = v;
    const double d_probe =
        eval_delay(instance, prev_end_s, prev_attitude, task, probe, delay_evals);
    if (d_probe <= 0.0) {
      if (probe <= u) return probe;
      return bisect_piece(instance, prev_end_s, prev_attitude, task, u, probe, delay_evals);
    }
    if (v > probe) {
      // v sits on the far side of a potential jump; test it directly.
      const double d_v = eval_delay(instance, prev_end_s, prev_attitude, task, v, delay_evals);
      if (d_v <= 0.0) return v;
    }
    u = v;
  }
  return std::nullopt;
}

namespace {

// Safe upper bound on the transition time over maneuver angles in
// [0, max_angle]. transition_time(max_angle) alone is not an upper bound
// when the model steps down at a breakpoint.
double slew_time_upper_bound(const TransitionModel& model, double max_angle) {
  double bound = 0.0;
  for (const auto& s : model.segments) {
    if (s.lo_deg > max_angle) break;
    bound = std::max(bound, s.a_s + std::min(max_angle, s.hi_deg) / s.v_deg_per_s);
  }
  return bound;
}

}  // namespace

FilterResult filter_pool(const DecisionContext& ctx, const Instance& instance,
                         const EnvironmentRealization& env, double slack_m) {
  FilterResult result;
  const double slew_bound =
      slew_time_upper_bound(instance.transition, max_maneuver_angle(instance));

  bool pruned = false;
  for (const std::size_t idx : ctx.candidate_pool) {
    const Task& task = instance.tasks[idx];
    if (idx < env.visible.size() && env.visible[idx] == 0) continue;

    if (!pruned && ctx.t_now_s + slew_bound <= task.ws_s) pruned = true;

    if (!pruned && ctx.t_now_s + task.du_s > task.we_s) {
      result.expired.push_back(idx);
      continue;
    }
    if (slack_m * instance.expected_rate_units_per_s * task.du_s >
        ctx.remaining_memory_units) {
      result.expired.push_back(idx);
      continue;
    }
    if (pruned) {
      // The slew from any attitude completes before this window opens.
      result.candidates.push_back({idx, std::max(task.ws_s, ctx.prev_end_s)});
      continue;
    }
    const auto os = earliest_start(instance, ctx.prev_end_s, ctx.prev_attitude, task);
    if (os.has_value()) {
      result.candidates.push_back({idx, *os});
    }
  }
  return result;
}

std::size_t pick_best_candidate(std::span<const Candidate> candidates,
                                std::span<const double> scores,
                                const Instance& instance) {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  int best_id = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double s = scores[i];
    if (!std::isfinite(s)) s = 1.0;
    const int id = instance.tasks[candidates[i].task_index].id;
    if (i == 0 || s > best_score || (s == best_score && id < best_id)) {
      best = i;
      best_score = s;
      best_id = id;
    }
  }
  return best;
}

RolloutOutcome rollout(const Instance& instance, const EnvironmentRealization& env,
                       const SchedulingPolicy& policy, double slack_m) {
  RolloutOutcome out;
  DecisionContext ctx;
  ctx.t_now_s = 0.0;
  ctx.prev_attitude = Attitude{0.0, 0.0, 0.0};
  ctx.prev_end_s = 0.0;
  ctx.remaining_memory_units = instance.mmc_units;
  ctx.mmc_units = instance.mmc_units;
  ctx.tasks_total = instance.task_count();
  ctx.horizon_s = instance.st_s;

  ctx.candidate_pool.reserve(instance.task_count());
  for (std::size_t i = 0; i < instance.task_count(); ++i) {
    if (i < env.visible.size() && env.visible[i] == 0) continue;
    ctx.candidate_pool.push_back(i);
  }
  std::sort(ctx.candidate_pool.begin(), ctx.candidate_pool.end(),
            [&](std::size_t a, std::size_t b) {
              const Task& ta = instance.tasks[a];
              const Task& tb = instance.tasks[b];
              return ta.ws_s != tb.ws_s ? ta.ws_s < tb.ws_s : ta.id < tb.id;
            });

  std::vector<double> scores;
  while (true) {
    FilterResult fr = filter_pool(ctx, instance, env, slack_m);
    if (!fr.expired.empty()) {
      auto& pool = ctx.candidate_pool;
      pool.erase(std::remove_if(pool.begin(), pool.end(),
                                [&](std::size_t i) {
                                  return std::find(fr.expired.begin(), fr.expired.end(),
                                                   i) != fr.expired.end();
                                }),
                 pool.end());
    }
    if (fr.candidates.empty()) break;

    scores.clear();
    scores.resize(fr.candidates.size());
    policy.score(ctx, fr.candidates, instance, env, scores);
    const std::size_t pick = pick_best_candidate(fr.candidates, scores, instance);

    const Candidate& cand = fr.candidates[pick];
    const Task& task = instance.tasks[cand.task_index];
    const double os = cand.earliest_os_s;
    const double oe = os + task.du_s;
    const double draw = env.actual_rate_units_per_s[cand.task_index] * task.du_s;

    out.schedule.observations.push_back({task.id, os, oe});
    ctx.candidate_pool.erase(
        std::find(ctx.candidate_pool.begin(), ctx.candidate_pool.end(), cand.task_index));

    if (draw > ctx.remaining_memory_units) {
      out.schedule.status = ScheduleStatus::ImagingFailure;
      out.schedule.failure_index = out.schedule.observations.size() - 1;
      out.trace.push_back({ctx.t_now_s, task.id, fr.candidates.size(), out.total_profit});
      break;
    }

    out.total_profit += env.actual_profit[cand.task_index];
    out.schedule.memory_used_units += draw;
    ctx.remaining_memory_units -= draw;
    out.trace.push_back({ctx.t_now_s, task.id, fr.candidates.size(), out.total_profit});

    ctx.t_now_s = oe;
    ctx.prev_end_s = oe;
    ctx.prev_attitude = attitude_at(task, std::min(oe, task.we_s));
  }

  out.schedule.realized_profit = out.total_profit;
  return out;
}

double expected_profit_on_set(const SchedulingPolicy& policy,
                              std::span<const EvalCase> cases, double slack_m) {
  if (cases.empty()) {
    throw std::invalid_argument("expected_profit_on_set: empty set");
  }
  double total = 0.0;
  for (const EvalCase& c : cases) {
    std::vector<double> profits;
    profits.reserve(c.envs->size());
    for (const auto& env : *c.envs) {
      profits.push_back(rollout(*c.instance, env, policy, slack_m).total_profit);
    }
    total += expected_total_profit(profits);
  }
  return total / static_cast<double>(cases.size());
}

}  // namespace uaeoss
