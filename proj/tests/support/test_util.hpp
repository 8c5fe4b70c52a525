#pragma once

// Shared builders and independent oracles for the test suites. The oracles
// deliberately avoid the library's search and rollout paths: earliest starts
// come from a linear scan of the delay curve and schedules from explicit
// state stepping, so they can arbitrate the binary search and the rollout.

#include <algorithm>
#include <optional>
#include <vector>

#include "uaeoss/core.hpp"
#include "uaeoss/simulator.hpp"

namespace uaeoss::testing {

inline Task make_task(int id, double ws, double we, double du, double profit,
                      double pitch0 = 0.0, double pitch_rate = 0.0, double roll = 0.0,
                      double yaw = 0.0) {
  Task t;
  t.id = id;
  t.ws_s = ws;
  t.we_s = we;
  t.du_s = du;
  t.expected_profit = profit;
  t.profile.pitch = {pitch0, pitch_rate};
  t.profile.roll = {roll, 0.0};
  t.profile.yaw = {yaw, 0.0};
  return t;
}

inline Instance make_instance(std::vector<Task> tasks, double st, double mmc,
                              double rate = 3.5, double bound = 27.0) {
  Instance inst;
  inst.tasks = std::move(tasks);
  inst.st_s = st;
  inst.mmc_units = mmc;
  inst.expected_rate_units_per_s = rate;
  inst.transition = default_transition_model();
  inst.attitude_bound_deg = bound;
  inst.refresh_max_transition_time();
  return inst;
}

/// Environment where every realization equals its expectation and everything
/// is visible.
inline EnvironmentRealization deterministic_env(const Instance& inst) {
  EnvironmentRealization env;
  for (const Task& t : inst.tasks) {
    env.actual_profit.push_back(t.expected_profit);
    env.actual_rate_units_per_s.push_back(inst.expected_rate_units_per_s);
    env.visible.push_back(1);
  }
  return env;
}

/// Linear scan of the delay curve at 1e-3 s steps; the reference for the
/// binary precedence search.
inline std::optional<double> oracle_earliest_start(const Instance& inst, double prev_end,
                                                   const Attitude& prev_att,
                                                   const Task& task,
                                                   double step = 1e-3) {
  const double l = std::max(task.ws_s, prev_end);
  const double r = task.we_s - task.du_s;
  if (r < l) return std::nullopt;
  for (double os = l; os < r; os += step) {
    if (delay(inst, prev_end, prev_att, task, os) <= 0.0) return os;
  }
  if (delay(inst, prev_end, prev_att, task, r) <= 0.0) return r;
  return std::nullopt;
}

/// Scheduling state stepped explicitly, independent of rollout().
struct OracleState {
  double t = 0.0;
  Attitude att{0.0, 0.0, 0.0};
  double memory;
  double profit = 0.0;

  explicit OracleState(const Instance& inst) : memory(inst.mmc_units) {}
};

/// Whether `task` can be scheduled from the state, under the same checks the
/// filter applies (visibility, capacity with slack, feasible start).
inline std::optional<double> oracle_feasible_start(const Instance& inst,
                                                   const EnvironmentRealization& env,
                                                   const OracleState& state,
                                                   std::size_t task_index, double slack_m) {
  if (env.visible[task_index] == 0) return std::nullopt;
  const Task& task = inst.tasks[task_index];
  if (slack_m * inst.expected_rate_units_per_s * task.du_s > state.memory) {
    return std::nullopt;
  }
  return oracle_earliest_start(inst, state.t, state.att, task);
}

inline void oracle_commit(const Instance& inst, const EnvironmentRealization& env,
                          OracleState& state, std::size_t task_index, double os) {
  const Task& task = inst.tasks[task_index];
  const double oe = os + task.du_s;
  const double draw = env.actual_rate_units_per_s[task_index] * task.du_s;
  state.memory -= draw;
  state.profit += env.actual_profit[task_index];
  state.t = oe;
  state.att = attitude_at(task, std::min(oe, task.we_s));
}

/// Simulates a fixed priority order: always observe the feasible task that
/// comes first in `order` (task indices), until nothing fits.
inline double oracle_simulate_order(const Instance& inst, const EnvironmentRealization& env,
                                    const std::vector<std::size_t>& order, double slack_m) {
  OracleState state(inst);
  std::vector<bool> used(inst.task_count(), false);
  while (true) {
    bool committed = false;
    for (const std::size_t idx : order) {
      if (used[idx]) continue;
      const auto os = oracle_feasible_start(inst, env, state, idx, slack_m);
      if (!os.has_value()) continue;
      const double draw = env.actual_rate_units_per_s[idx] * inst.tasks[idx].du_s;
      used[idx] = true;
      if (draw > state.memory) return state.profit;  // imaging failure
      oracle_commit(inst, env, state, idx, *os);
      committed = true;
      break;
    }
    if (!committed) return state.profit;
  }
}

/// Exhaustive search over all observation sequences with earliest-start
/// placement; the profit upper bound for small instances.
inline double oracle_best_sequence(const Instance& inst, const EnvironmentRealization& env,
                                   double slack_m) {
  double best = 0.0;
  std::vector<bool> used(inst.task_count(), false);
  auto dfs = [&](auto&& self, const OracleState& state) -> void {
    best = std::max(best, state.profit);
    for (std::size_t idx = 0; idx < inst.task_count(); ++idx) {
      if (used[idx]) continue;
      const auto os = oracle_feasible_start(inst, env, state, idx, slack_m);
      if (!os.has_value()) continue;
      const double draw = env.actual_rate_units_per_s[idx] * inst.tasks[idx].du_s;
      if (draw > state.memory) continue;
      OracleState next = state;
      oracle_commit(inst, env, next, idx, *os);
      used[idx] = true;
      self(self, next);
      used[idx] = false;
    }
  };
  dfs(dfs, OracleState(inst));
  return best;
}

/// Scores candidates by a fixed priority order over task indices (earlier in
/// the order is better).
class PermutationPolicy : public SchedulingPolicy {
 public:
  explicit PermutationPolicy(std::vector<std::size_t> order) : order_(std::move(order)) {}

  void score(const DecisionContext&, std::span<const Candidate> candidates, const Instance&,
             const EnvironmentRealization&, std::vector<double>& scores) const override {
    scores.resize(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto pos = std::find(order_.begin(), order_.end(), candidates[i].task_index);
      scores[i] = -static_cast<double>(pos - order_.begin());
    }
  }

 private:
  std::vector<std::size_t> order_;
};

/// Scores every candidate identically.
class ConstantPolicy : public SchedulingPolicy {
 public:
  void score(const DecisionContext&, std::span<const Candidate> candidates, const Instance&,
             const EnvironmentRealization&, std::vector<double>& scores) const override {
    scores.assign(candidates.size(), 1.0);
  }
};

}  // namespace uaeoss::testing
