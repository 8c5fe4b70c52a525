#include "uaeoss/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace uaeoss {

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::LAH1: return "LAH1";
    case BaselineKind::LAH2: return "LAH2";
    case BaselineKind::LAH3: return "LAH3";
    case BaselineKind::MDH1: return "MDH1";
    case BaselineKind::MDH2: return "MDH2";
    case BaselineKind::MDH3: return "MDH3";
  }
  return "?";
}

void BaselineSpec::validate() const {
  const bool windowed = kind == BaselineKind::LAH2 || kind == BaselineKind::LAH3;
  if (windowed) {
    if (lookahead_k < kLookaheadMin || lookahead_k > kLookaheadMax) {
      throw std::invalid_argument("look-ahead step size must lie in [2, 20]");
    }
  } else if (lookahead_k != 0) {
    throw std::invalid_argument("look-ahead step size only applies to LAH2/LAH3");
  }
}

namespace {

// Candidate order used by the look-ahead window: earliest feasible start,
// ties by task id.
std::vector<std::size_t> window_order(std::span<const Candidate> candidates,
                                      const Instance& instance) {
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double oa = candidates[a].earliest_os_s;
    const double ob = candidates[b].earliest_os_s;
    if (oa != ob) return oa < ob;
    return instance.tasks[candidates[a].task_index].id <
           instance.tasks[candidates[b].task_index].id;
  });
  return order;
}

double slew_to(const DecisionContext& ctx, const Instance& instance,
               const Candidate& candidate) {
  const Task& task = instance.tasks[candidate.task_index];
  const Attitude att = attitude_at(task, candidate.earliest_os_s);
  return transition_time(instance.transition,
                         transition_angle(ctx.prev_attitude, att));
}

}  // namespace

int lah_choose(const DecisionContext& ctx, std::span<const Candidate> candidates,
               const Instance& instance, const EnvironmentRealization& env,
               const BaselineSpec& spec) {
  (void)ctx;
  if (candidates.empty()) throw std::invalid_argument("lah_choose: empty pool");
  const auto order = window_order(candidates, instance);
  const std::size_t k =
      spec.kind == BaselineKind::LAH1
          ? 1
          : std::min<std::size_t>(static_cast<std::size_t>(spec.lookahead_k), order.size());

  std::size_t best = order[0];
  double best_value = 0.0;
  for (std::size_t w = 0; w < k; ++w) {
    const std::size_t i = order[w];
    const Task& task = instance.tasks[candidates[i].task_index];
    double value = 0.0;
    switch (spec.kind) {
      case BaselineKind::LAH1:
        value = 0.0;  // window of one; the order already decided
        break;
      case BaselineKind::LAH2:
        value = env.actual_profit[candidates[i].task_index];
        break;
      case BaselineKind::LAH3:
        value = env.actual_profit[candidates[i].task_index] / task.du_s;
        break;
      default:
        throw std::invalid_argument("lah_choose: not a look-ahead rule");
    }
    const int id = task.id;
    const int best_id = instance.tasks[candidates[best].task_index].id;
    if (w == 0 || value > best_value || (value == best_value && id < best_id)) {
      best = i;
      best_value = value;
    }
  }
  return instance.tasks[candidates[best].task_index].id;
}

double mdh_score(const DecisionContext& ctx, const Candidate& candidate,
                 const Instance& instance, const EnvironmentRealization& env,
                 BaselineKind kind) {
  const Task& task = instance.tasks[candidate.task_index];
  switch (kind) {
    case BaselineKind::MDH1:
      return env.actual_profit[candidate.task_index] /
             (task.du_s + slew_to(ctx, instance, candidate));
    case BaselineKind::MDH2:
      return -std::max(slew_to(ctx, instance, candidate),
                       candidate.earliest_os_s - ctx.prev_end_s);
    case BaselineKind::MDH3:
      return ctx.remaining_memory_units < ctx.mmc_units / 2.0
                 ? mdh_score(ctx, candidate, instance, env, BaselineKind::MDH1)
                 : mdh_score(ctx, candidate, instance, env, BaselineKind::MDH2);
    default:
      throw std::invalid_argument("mdh_score: not a manually designed rule");
  }
}

BaselinePolicy::BaselinePolicy(BaselineSpec spec) : spec_(spec) { spec_.validate(); }

void BaselinePolicy::score(const DecisionContext& ctx, std::span<const Candidate> candidates,
                           const Instance& instance, const EnvironmentRealization& env,
                           std::vector<double>& scores) const {
  scores.assign(candidates.size(), 0.0);
  switch (spec_.kind) {
    case BaselineKind::MDH1:
    case BaselineKind::MDH2:
    case BaselineKind::MDH3:
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        scores[i] = mdh_score(ctx, candidates[i], instance, env, spec_.kind);
      }
      return;
    default:
      break;
  }
  // Look-ahead rules: the chosen task outranks everything else; the rollout
  // then applies its usual argmax.
  const int chosen = lah_choose(ctx, candidates, instance, env, spec_);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = instance.tasks[candidates[i].task_index].id == chosen ? 1.0 : 0.0;
  }
}

BestLahResult best_lah(std::span<const EvalCase> cases, double slack_m) {
  BestLahResult result;
  std::vector<BaselineSpec> specs;
  specs.push_back({BaselineKind::LAH1, 0});
  for (int k = kLookaheadMin; k <= kLookaheadMax; ++k) specs.push_back({BaselineKind::LAH2, k});
  for (int k = kLookaheadMin; k <= kLookaheadMax; ++k) specs.push_back({BaselineKind::LAH3, k});

  bool first = true;
  for (const BaselineSpec& spec : specs) {
    BaselinePolicy policy(spec);
    const double profit = expected_profit_on_set(policy, cases, slack_m);
    result.sweep.push_back({spec, profit});
    if (first || profit > result.expected_profit) {
      result.best = spec;
      result.expected_profit = profit;
      first = false;
    }
  }
  return result;
}

}  // namespace uaeoss
