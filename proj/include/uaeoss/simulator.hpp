#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "uaeoss/core.hpp"

namespace uaeoss {

/// A pool task that survived filtering, carrying its earliest feasible
/// observation start.
struct Candidate {
  std::size_t task_index = 0;
  double earliest_os_s = 0.0;
};

/// State visible to a scheduling policy at one decision point.
/// candidate_pool holds the indices of all still-open tasks (unscheduled,
/// visible, not yet expired), sorted ascending by (ws, id); prev_end_s and
/// prev_attitude describe the end of the last committed observation (or the
/// boot state at t = 0).
struct DecisionContext {
  double t_now_s = 0.0;
  Attitude prev_attitude;
  double prev_end_s = 0.0;
  double remaining_memory_units = 0.0;
  double mmc_units = 0.0;
  std::vector<std::size_t> candidate_pool;
  std::size_t tasks_total = 0;
  double horizon_s = 0.0;
};

/// Slack of starting `next` at `os_s` after an observation that ended at
/// prev_end_s with attitude prev_attitude: prev_end + slew - os. A value
/// <= 0 means the maneuver completes in time.
double delay(const Instance& instance, double prev_end_s, const Attitude& prev_attitude,
             const Task& next, double os_s);

/// Convenience overload: the previous attitude is the one `prev` holds at
/// prev_end_s (which must lie inside prev's window).
double delay(const Instance& instance, double prev_end_s, const Task& prev,
             const Task& next, double os_s);

/// Earliest start inside [max(ws, prev_end), we - du] at which the attitude
/// transition from the previous observation completes in time, or nullopt.
///
/// Stage 1 clamps the bracket so imaging always finishes inside the window;
/// stage 2 runs a bracketed binary search on the delay curve to 1e-3 s and
/// returns the feasible upper bracket end. The transition model is
/// discontinuous at segment breakpoints, so the delay curve is only
/// piecewise decreasing; the search therefore splits the bracket at the
/// exactly-computable breakpoint positions (profile kinks and maneuver-angle
/// segment crossings) and searches the first monotone piece that reaches
/// feasibility.
///
/// delay_evals, when given, accumulates the number of delay evaluations.
std::optional<double> earliest_start(const Instance& instance, double prev_end_s,
                                     const Attitude& prev_attitude, const Task& task,
                                     int* delay_evals = nullptr);

/// Search tolerance of earliest_start, in seconds.
inline constexpr double kEarliestStartTolS = 1e-3;

struct FilterResult {
  std::vector<Candidate> candidates;        // survivors with earliest starts
  std::vector<std::size_t> expired;         // failed a permanent check (timeout/capacity)
};

/// Filter cascade over ctx.candidate_pool, applied in order:
///   1. pruning      — tasks whose window starts after t_now + max transition
///                     time are timing-feasible by construction; timing
///                     checks are skipped for them and everything later,
///   2. timeout      — t_now + du > we can no longer finish imaging,
///   3. capacity     — slack_m * cr * du exceeding the remaining memory,
///   4. earliest start — no feasible start exists.
/// Invisible tasks are dropped as well, so the result is usable standalone.
/// Timeout and capacity failures are permanent (time moves forward, memory
/// only shrinks) and reported in `expired`.
FilterResult filter_pool(const DecisionContext& ctx, const Instance& instance,
                         const EnvironmentRealization& env, double slack_m);

/// Scores candidates at a decision point; the rollout observes the candidate
/// with the largest score (ties broken by smallest task id). Scores that are
/// not finite are treated as 1.
class SchedulingPolicy {
 public:
  virtual ~SchedulingPolicy() = default;
  virtual void score(const DecisionContext& ctx, std::span<const Candidate> candidates,
                     const Instance& instance, const EnvironmentRealization& env,
                     std::vector<double>& scores) const = 0;
};

struct DecisionRecord {
  double t_now_s = 0.0;
  int task_id = 0;
  std::size_t pool_size = 0;  // number of scored candidates
  double cumulative_profit = 0.0;
};

struct RolloutOutcome {
  Schedule schedule;
  std::vector<DecisionRecord> trace;
  double total_profit = 0.0;
};

/// Constructive rollout of one environment realization under a policy.
/// Deterministic in all inputs. Starts at t = 0 with attitude (0, 0, 0) and
/// full memory; commits each chosen task at its earliest feasible start; a
/// realized memory draw that exceeds the remaining capacity ends the rollout
/// as an imaging failure that earns nothing.
RolloutOutcome rollout(const Instance& instance, const EnvironmentRealization& env,
                       const SchedulingPolicy& policy, double slack_m = 1.0);

/// Picks the index of the best-scoring candidate with the rollout's
/// safeguards: non-finite scores count as 1, ties go to the smallest id.
std::size_t pick_best_candidate(std::span<const Candidate> candidates,
                                std::span<const double> scores,
                                const Instance& instance);

/// One instance of a benchmark split together with its sampled environments.
struct EvalCase {
  const Instance* instance = nullptr;
  const std::vector<EnvironmentRealization>* envs = nullptr;
};

/// Mean rollout profit of a policy over a set: per instance the mean over
/// its environments, then the mean over instances.
double expected_profit_on_set(const SchedulingPolicy& policy,
                              std::span<const EvalCase> cases, double slack_m);

}  // namespace uaeoss
