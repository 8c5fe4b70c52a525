#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "uaeoss/simulator.hpp"

namespace uaeoss {

enum class FunctionKind { Add, Sub, Mul, Div, Max, Min, Sin };
enum class TerminalKind { RP, RPPU, EMC, EMO, RMP, CT, TIST, RTP, FR, RR };

inline constexpr int kFunctionCount = 7;
inline constexpr int kTerminalCount = 10;

int arity(FunctionKind fn);
std::string to_string(FunctionKind fn);
std::string to_string(TerminalKind term);

/// Per-candidate feature values, all normalized into [0, 1] except EMO,
/// which may exceed 1 when a task would over-consume the remaining memory.
struct FeatureVector {
  double rp = 0.0;    // realized profit, min-max over the scored pool
  double rppu = 0.0;  // realized profit per imaging second, min-max
  double emc = 0.0;   // expected memory consumption, min-max
  double emo = 0.0;   // expected consumption / remaining memory
  double rmp = 0.0;   // remaining memory / capacity
  double ct = 0.0;    // current time / horizon
  double tist = 0.0;  // earliest start, normalized to the remaining horizon
  double rtp = 0.0;   // open tasks / total tasks
  double fr = 0.0;    // window-start rank among all tasks
  double rr = 0.0;    // window-start rank within the open pool

  double value(TerminalKind term) const;
};

struct PolicyNode {
  enum class Kind { Function, Terminal, Constant };

  Kind kind = Kind::Constant;
  FunctionKind fn = FunctionKind::Add;
  TerminalKind terminal = TerminalKind::RP;
  double value = 0.0;
  std::vector<std::unique_ptr<PolicyNode>> children;

  std::unique_ptr<PolicyNode> clone() const;
};

/// An immutable-after-construction expression tree over the terminal
/// features. Copying clones the whole tree.
class PolicyTree {
 public:
  PolicyTree() = default;
  explicit PolicyTree(std::unique_ptr<PolicyNode> root) : root_(std::move(root)) {}
  PolicyTree(const PolicyTree& other);
  PolicyTree& operator=(const PolicyTree& other);
  PolicyTree(PolicyTree&&) noexcept = default;
  PolicyTree& operator=(PolicyTree&&) noexcept = default;

  static PolicyTree terminal(TerminalKind term);
  static PolicyTree constant(double value);
  static PolicyTree function(FunctionKind fn, std::vector<PolicyTree> children);

  bool empty() const { return root_ == nullptr; }
  const PolicyNode& root() const { return *root_; }
  PolicyNode& mutable_root() { return *root_; }

  int depth() const;        // single node counts as depth 1
  std::size_t size() const; // node count
  bool equals(const PolicyTree& other) const;

 private:
  std::unique_ptr<PolicyNode> root_;
};

/// Evaluates the tree on a feature vector. Every arithmetic step is
/// safeguarded: a non-finite intermediate collapses to 1, so the result is
/// always finite.
double evaluate(const PolicyTree& tree, const FeatureVector& features);
double evaluate(const PolicyNode& node, const FeatureVector& features);

/// Feature vectors for every candidate that survived filtering. Min-max
/// features normalize over `candidates`; pool-share features (RTP, RR) use
/// ctx.candidate_pool. Empty input yields empty output.
std::vector<FeatureVector> compute_features(const DecisionContext& ctx,
                                            std::span<const Candidate> candidates,
                                            const Instance& instance,
                                            const EnvironmentRealization& env);

class PolicyParseError : public std::runtime_error {
 public:
  PolicyParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Prefix S-expression form, e.g. "(+ RP (max EMO RMP))". Constants are
/// rendered with shortest round-trip precision.
std::string serialize(const PolicyTree& tree);

/// Inverse of serialize. Throws PolicyParseError with the byte offset of the
/// first problem.
PolicyTree parse_policy(const std::string& text);

/// Policy files hold one S-expression per line; blank lines and lines
/// starting with '#' are skipped.
std::vector<PolicyTree> read_policy_file(const std::string& path);
void write_policy_file(const std::string& path, const std::vector<PolicyTree>& trees);

/// Adapts a PolicyTree to the rollout's scoring interface. Holds a
/// reference; the tree must outlive the adapter.
class TreePolicy : public SchedulingPolicy {
 public:
  explicit TreePolicy(const PolicyTree& tree) : tree_(&tree) {}
  void score(const DecisionContext& ctx, std::span<const Candidate> candidates,
             const Instance& instance, const EnvironmentRealization& env,
             std::vector<double>& scores) const override;

 private:
  const PolicyTree* tree_;
};

}  // namespace uaeoss
