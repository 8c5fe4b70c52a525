#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "support/test_util.hpp"
#include "uaeoss/evolution.hpp"
#include "uaeoss/instance_gen.hpp"
#include "uaeoss/json_io.hpp"
#include "uaeoss/rng.hpp"

using namespace uaeoss;
using namespace uaeoss::testing;

namespace {

bool tree_is_valid(const PolicyNode& node) {
  switch (node.kind) {
    case PolicyNode::Kind::Function:
      if (static_cast<int>(node.children.size()) != arity(node.fn)) return false;
      for (const auto& child : node.children) {
        if (!tree_is_valid(*child)) return false;
      }
      return true;
    case PolicyNode::Kind::Terminal:
      return node.children.empty();
    case PolicyNode::Kind::Constant:
      return node.children.empty() && std::isfinite(node.value) &&
             node.value >= -1.0 && node.value <= 1.0;
  }
  return false;
}

void leaf_depths(const PolicyNode& node, int depth, std::set<int>& out) {
  if (node.children.empty()) {
    out.insert(depth);
    return;
  }
  for (const auto& child : node.children) leaf_depths(*child, depth + 1, out);
}

// True when every leaf sits exactly at `target` depth (the Full shape for
// that target).
bool full_shaped(const PolicyTree& tree, int target) {
  std::set<int> depths;
  leaf_depths(tree.root(), 1, depths);
  return depths.size() == 1 && *depths.begin() == target;
}

struct TinyWorld {
  std::vector<InstanceData> train_data;
  std::vector<InstanceData> valid_data;
  std::vector<EvalCase> train;
  std::vector<EvalCase> valid;

  TinyWorld(int train_n, int valid_n, std::uint64_t seed) {
    for (int i = 0; i < train_n; ++i) {
      InstanceData d;
      d.instance = generate_random_instance(
          8, 800.0, 512.0, derive_seed(seed, {0, static_cast<std::uint64_t>(i)}));
      d.envs.push_back(sample_environment(
          d.instance, 0.2, derive_seed(seed, {1, static_cast<std::uint64_t>(i)})));
      train_data.push_back(std::move(d));
    }
    for (int i = 0; i < valid_n; ++i) {
      InstanceData d;
      d.instance = generate_random_instance(
          8, 800.0, 512.0, derive_seed(seed, {2, static_cast<std::uint64_t>(i)}));
      d.envs.push_back(sample_environment(
          d.instance, 0.2, derive_seed(seed, {3, static_cast<std::uint64_t>(i)})));
      valid_data.push_back(std::move(d));
    }
    for (const auto& d : train_data) train.push_back({&d.instance, &d.envs});
    for (const auto& d : valid_data) valid.push_back({&d.instance, &d.envs});
  }
};

EvolutionConfig tiny_config() {
  EvolutionConfig c;
  c.population_size = 8;
  c.generations = 6;
  c.tournament_size = 3;
  c.batches = 2;
  c.rng_seed = 99;
  return c;
}

}  // namespace

TEST_CASE("generated trees respect the depth range and structure") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const PolicyTree tree = generate_tree(rng, 2, 6);
    CHECK(tree.depth() >= 2);
    CHECK(tree.depth() <= 6);
    CHECK(tree_is_valid(tree.root()));
  }
}

TEST_CASE("half-and-half splits Grow and Full evenly") {
  // At a fixed target depth of 6 a Grow tree reaches the Full shape only
  // with vanishing probability, so the full-shaped fraction estimates
  // P(Full) = 1/2.
  std::mt19937_64 rng(2);
  int full_count = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    if (full_shaped(generate_tree(rng, 6, 6), 6)) ++full_count;
  }
  const double fraction = static_cast<double>(full_count) / n;
  CHECK(fraction == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("a depth-2 draw puts every leaf at depth 2") {
  // At target depth 2 Grow and Full coincide: a function root with terminal
  // children.
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    CHECK(full_shaped(generate_tree(rng, 2, 2), 2));
  }
}

TEST_CASE("init_population creates N structurally valid individuals") {
  EvolutionConfig config = tiny_config();
  config.population_size = 20;
  auto rng = make_rng(7);
  const auto population = init_population(config, rng);
  CHECK(population.size() == 20);
  for (const Individual& ind : population) {
    CHECK(tree_is_valid(ind.tree.root()));
    CHECK(ind.tree.depth() <= config.init_max_depth);
  }
}

TEST_CASE("tournament over the whole population returns the global best") {
  std::vector<Individual> population;
  for (int i = 0; i < 6; ++i) {
    Individual ind;
    ind.tree = PolicyTree::terminal(TerminalKind::RP);
    ind.fitness = static_cast<double>(i * 7 % 13);
    population.push_back(std::move(ind));
  }
  auto rng = make_rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Individual& winner = tournament_select(population, 6, rng);
    CHECK(winner.fitness == 9.0);  // max of i*7 mod 13 over i in [0, 5]
  }
}

TEST_CASE("tournament selection is uniform under equal fitness") {
  std::vector<Individual> population;
  for (int i = 0; i < 8; ++i) {
    Individual ind;
    ind.tree = PolicyTree::constant(static_cast<double>(i) / 8.0);
    ind.fitness = 1.0;
    population.push_back(std::move(ind));
  }
  auto rng = make_rng(13);
  std::map<double, int> counts;
  const int trials = 16000;
  for (int t = 0; t < trials; ++t) {
    counts[tournament_select(population, 4, rng).tree.root().value]++;
  }
  for (const auto& [value, count] : counts) {
    CHECK(static_cast<double>(count) / trials == doctest::Approx(1.0 / 8.0).epsilon(0.1));
  }

  // Degenerate tournament of one is a uniform draw as well.
  std::map<double, int> solo;
  for (int t = 0; t < trials; ++t) {
    solo[tournament_select(population, 1, rng).tree.root().value]++;
  }
  for (const auto& [value, count] : solo) {
    CHECK(static_cast<double>(count) / trials == doctest::Approx(1.0 / 8.0).epsilon(0.1));
  }
}

TEST_CASE("crossover at the roots exchanges the parents") {
  // Single-function trees: the root is the only non-leaf node.
  const PolicyTree a = parse_policy("(+ RP CT)");
  const PolicyTree b = parse_policy("(* RR FR)");
  auto rng = make_rng(17);
  const auto [c1, c2] = crossover_single_point(a, b, 8, rng);
  CHECK(c1.equals(b));
  CHECK(c2.equals(a));
}

TEST_CASE("crossover falls back to copies for leaf-only parents") {
  const PolicyTree a = PolicyTree::terminal(TerminalKind::RP);
  const PolicyTree b = parse_policy("(+ RR FR)");
  auto rng = make_rng(19);
  const auto [c1, c2] = crossover_single_point(a, b, 8, rng);
  CHECK(c1.equals(a));
  CHECK(c2.equals(b));
}

TEST_CASE("crossover offspring respect arity and the depth cap") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const PolicyTree a = generate_tree(rng, 2, 6);
    const PolicyTree b = generate_tree(rng, 2, 6);
    const auto [c1, c2] = crossover_single_point(a, b, 8, rng);
    CHECK(tree_is_valid(c1.root()));
    CHECK(tree_is_valid(c2.root()));
    CHECK(c1.depth() <= 8);
    CHECK(c2.depth() <= 8);
  }
}

TEST_CASE("mutation obeys its gate and depth limits") {
  EvolutionConfig config = tiny_config();
  auto rng = make_rng(29);

  config.mutation_prob = 0.0;
  const PolicyTree tree = parse_policy("(+ RP (max EMC RMP))");
  CHECK(mutate_uniform(tree, config, rng).equals(tree));

  config.mutation_prob = 1.0;
  const PolicyTree leaf = PolicyTree::terminal(TerminalKind::CT);
  for (int trial = 0; trial < 200; ++trial) {
    const PolicyTree mutated = mutate_uniform(leaf, config, rng);
    CHECK(mutated.depth() <= config.mutation_subtree_max_depth);
    CHECK(tree_is_valid(mutated.root()));
  }

  for (int trial = 0; trial < 1000; ++trial) {
    const PolicyTree base = generate_tree(rng, 2, 6);
    const PolicyTree mutated = mutate_uniform(base, config, rng);
    CHECK(tree_is_valid(mutated.root()));
    CHECK(mutated.depth() <= config.overall_max_depth);
  }
}

TEST_CASE("fitness of a single-element batch is that rollout's profit") {
  const TinyWorld world(2, 1, 41);
  const PolicyTree tree = parse_policy("RP");
  const double f = fitness(tree, std::span(world.train.data(), 1), 1.0);
  const double direct = rollout(world.train_data[0].instance, world.train_data[0].envs[0],
                                TreePolicy(tree), 1.0)
                            .total_profit;
  CHECK(f == direct);
}

TEST_CASE("a constant policy matches the pure tie-break rollout") {
  const TinyWorld world(1, 1, 43);
  const double via_tree =
      fitness(PolicyTree::constant(0.25), std::span(world.train.data(), 1), 1.0);
  const double via_ties = rollout(world.train_data[0].instance, world.train_data[0].envs[0],
                                  ConstantPolicy{}, 1.0)
                              .total_profit;
  CHECK(via_tree == via_ties);
}

TEST_CASE("identical policies earn identical fitness") {
  const TinyWorld world(4, 1, 47);
  const PolicyTree a = parse_policy("(+ RP RPPU)");
  const PolicyTree b = parse_policy("(+ RP RPPU)");
  CHECK(fitness(a, world.train, 1.0) == fitness(b, world.train, 1.0));
}

TEST_CASE("evolve is deterministic and rotates batches fairly") {
  const TinyWorld world(8, 3, 53);
  const EvolutionConfig config = tiny_config();

  const EvolveResult a = evolve(world.train, world.valid, config);
  const EvolveResult b = evolve(world.train, world.valid, config);
  CHECK(history_to_csv(a.history) == history_to_csv(b.history));
  CHECK(serialize(a.best) == serialize(b.best));

  // 6 generations over 2 batches: each used exactly 3 times, in rotation.
  std::map<int, int> usage;
  for (const auto& r : a.history) usage[r.batch_id]++;
  REQUIRE(usage.size() == 2);
  CHECK(usage[0] == 3);
  CHECK(usage[1] == 3);
  for (std::size_t g = 0; g < a.history.size(); ++g) {
    CHECK(a.history[g].batch_id == static_cast<int>(g % 2));
  }

  // The returned policy dominates every recorded validation score.
  for (const auto& r : a.history) CHECK(a.best_validation >= r.validation_score);
}

TEST_CASE("evolve holds population invariants every generation") {
  const TinyWorld world(6, 2, 59);
  EvolutionConfig config = tiny_config();
  config.batches = 3;
  config.generations = 5;

  int calls = 0;
  const EvolveResult result = evolve(
      world.train, world.valid, config, 1.0,
      [&](int generation, const std::vector<Individual>& population) {
        CHECK(generation == calls);
        ++calls;
        CHECK(population.size() == static_cast<std::size_t>(config.population_size));
        for (const Individual& ind : population) {
          CHECK(tree_is_valid(ind.tree.root()));
          CHECK(ind.tree.depth() <= config.overall_max_depth);
          CHECK(std::isfinite(ind.fitness));
          CHECK(ind.batch_id == (calls - 1) % config.batches);
        }
      });
  CHECK(calls == config.generations);
  CHECK(result.history.size() == static_cast<std::size_t>(config.generations));
}

TEST_CASE("evolve with zero generations selects from the initial population") {
  const TinyWorld world(4, 2, 61);
  EvolutionConfig config = tiny_config();
  config.generations = 0;
  const EvolveResult result = evolve(world.train, world.valid, config);
  CHECK(result.history.empty());
  CHECK_FALSE(result.best.empty());
  CHECK(result.best_validation ==
        expected_profit_on_set(TreePolicy(result.best), world.valid, 1.0));
}

TEST_CASE("evolve rejects a train set that does not divide into batches") {
  const TinyWorld world(7, 2, 67);
  EvolutionConfig config = tiny_config();
  config.batches = 2;  // 7 % 2 != 0
  CHECK_THROWS_AS(evolve(world.train, world.valid, config), std::invalid_argument);
}

TEST_CASE("config validation catches inconsistent parameters") {
  EvolutionConfig config;
  config.tournament_size = 30;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = EvolutionConfig{};
  config.crossover_prob = 1.2;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = EvolutionConfig{};
  config.overall_max_depth = 3;  // below init_max_depth
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  CHECK_NOTHROW(EvolutionConfig{}.validate());
}
