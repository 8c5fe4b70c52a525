#pragma once

#include <string>
#include <vector>

#include "uaeoss/simulator.hpp"

namespace uaeoss {

enum class BaselineKind { LAH1, LAH2, LAH3, MDH1, MDH2, MDH3 };

std::string to_string(BaselineKind kind);

inline constexpr int kLookaheadMin = 2;
inline constexpr int kLookaheadMax = 20;

/// A concrete baseline: a look-ahead rule with its window size, or one of
/// the manually designed scoring rules. lookahead_k is meaningful only for
/// LAH2/LAH3 and must lie in [2, 20].
struct BaselineSpec {
  BaselineKind kind = BaselineKind::LAH1;
  int lookahead_k = 0;

  void validate() const;
};

/// The look-ahead decision: restrict attention to the k candidates with the
/// earliest feasible starts (k = 1 for LAH1), then pick by the rule's
/// criterion. Ties break toward the smaller task id. Returns the chosen
/// task id.
int lah_choose(const DecisionContext& ctx, std::span<const Candidate> candidates,
               const Instance& instance, const EnvironmentRealization& env,
               const BaselineSpec& spec);

/// Manually designed heuristic value for one candidate; larger is better.
/// MDH1 is profit per occupied second (imaging plus slew); MDH2 is the
/// negated readiness delay, so the nearest task wins; MDH3 switches from
/// MDH2 to MDH1 once less than half the memory remains.
double mdh_score(const DecisionContext& ctx, const Candidate& candidate,
                 const Instance& instance, const EnvironmentRealization& env,
                 BaselineKind kind);

/// Runs any baseline through the shared rollout machinery.
class BaselinePolicy : public SchedulingPolicy {
 public:
  explicit BaselinePolicy(BaselineSpec spec);
  void score(const DecisionContext& ctx, std::span<const Candidate> candidates,
             const Instance& instance, const EnvironmentRealization& env,
             std::vector<double>& scores) const override;

  const BaselineSpec& spec() const { return spec_; }

 private:
  BaselineSpec spec_;
};

struct LahSweepEntry {
  BaselineSpec spec;
  double expected_profit = 0.0;
};

struct BestLahResult {
  BaselineSpec best;
  double expected_profit = 0.0;
  std::vector<LahSweepEntry> sweep;  // LAH1 plus LAH2/LAH3 for k in [2, 20]
};

/// Sweeps LAH1 and LAH2/LAH3 over the whole look-ahead range and returns the
/// best expected profit (ties keep the earlier entry in sweep order).
BestLahResult best_lah(std::span<const EvalCase> cases, double slack_m);

}  // namespace uaeoss
