#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "uaeoss/policy.hpp"

namespace uaeoss {

struct EvolutionConfig {
  int population_size = 20;
  int generations = 60;
  double crossover_prob = 0.85;
  double mutation_prob = 0.15;
  int tournament_size = 4;
  int init_min_depth = 2;
  int init_max_depth = 6;
  int mutation_subtree_max_depth = 4;
  int overall_max_depth = 8;
  int batches = 20;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Individual {
  PolicyTree tree;
  double fitness = 0.0;
  int batch_id = -1;
};

/// Half-and-half tree of a target depth drawn uniformly from
/// [min_depth, max_depth]: Grow and Full each with probability 1/2. Full
/// places every leaf at the target depth; Grow draws function-or-terminal
/// freely below the root. A target depth of 1 is a single terminal.
PolicyTree generate_tree(std::mt19937_64& rng, int min_depth, int max_depth);

std::vector<Individual> init_population(const EvolutionConfig& config,
                                        std::mt19937_64& rng);

/// Uniform without-replacement tournament; ties are broken uniformly at
/// random among the tied best.
const Individual& tournament_select(const std::vector<Individual>& population,
                                    int tournament_size, std::mt19937_64& rng);

/// Swaps subtrees rooted at uniformly chosen non-leaf nodes. Parents without
/// a non-leaf node, and offspring that would exceed max_depth after bounded
/// retries, fall back to plain copies.
std::pair<PolicyTree, PolicyTree> crossover_single_point(const PolicyTree& a,
                                                         const PolicyTree& b,
                                                         int max_depth,
                                                         std::mt19937_64& rng);

/// With probability config.mutation_prob replaces a uniformly chosen node by
/// a fresh half-and-half subtree of depth at most
/// config.mutation_subtree_max_depth, subject to the overall depth cap
/// (bounded retries, then the tree is returned unchanged).
PolicyTree mutate_uniform(const PolicyTree& tree, const EvolutionConfig& config,
                          std::mt19937_64& rng);

/// Mean rollout profit of a policy over a mini-batch; every batch element is
/// one instance with one environment realization.
double fitness(const PolicyTree& tree, std::span<const EvalCase> batch, double slack_m);

struct GenerationRecord {
  int generation = 0;
  int batch_id = 0;
  double batch_best_fitness = 0.0;
  double validation_score = 0.0;
  std::size_t best_size = 0;
  int best_depth = 0;
  std::string best_tree;
};

struct EvolveResult {
  PolicyTree best;
  double best_validation = 0.0;
  std::vector<GenerationRecord> history;
};

/// Per-generation inspection hook for tests; called after fitness
/// evaluation, before breeding.
using GenerationInspector =
    std::function<void(int generation, const std::vector<Individual>&)>;

/// The training loop: evaluate the population on the rotating mini-batch,
/// track the batch-best individual's validation performance, breed by
/// tournament selection + single-point crossover + uniform mutation, and
/// after the final generation return the individual whose recorded
/// validation performance was best. |train| must divide evenly into
/// config.batches. Deterministic in config.rng_seed.
EvolveResult evolve(std::span<const EvalCase> train, std::span<const EvalCase> validation,
                    const EvolutionConfig& config, double slack_m = 1.0,
                    const GenerationInspector& inspector = nullptr);

/// History rows as CSV (generation, batch, batch-best fitness, validation
/// score, best tree size/depth, serialized best tree).
std::string history_to_csv(const std::vector<GenerationRecord>& history);

}  // namespace uaeoss
