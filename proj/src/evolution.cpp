#include "uaeoss/evolution.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "uaeoss/rng.hpp"

namespace uaeoss {

namespace {

constexpr int kOperatorRetries = 10;

// Stream tags for counter-based sub-seeding.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kBreedStream = 1;

PolicyTree random_leaf(std::mt19937_64& rng) {
  // Terminal set: the ten features plus the ephemeral constant.
  std::uniform_int_distribution<int> pick(0, kTerminalCount);
  const int choice = pick(rng);
  if (choice == kTerminalCount) {
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    return PolicyTree::constant(value(rng));
  }
  return PolicyTree::terminal(static_cast<TerminalKind>(choice));
}

FunctionKind random_function(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, kFunctionCount - 1);
  return static_cast<FunctionKind>(pick(rng));
}

PolicyTree build_tree(std::mt19937_64& rng, int level, int target, bool grow) {
  if (level >= target) return random_leaf(rng);
  bool make_function = true;
  if (grow && level > 1) {
    // Grow draws uniformly over the union of functions and terminals.
    std::uniform_int_distribution<int> pick(0, kFunctionCount + kTerminalCount);
    make_function = pick(rng) < kFunctionCount;
  }
  if (!make_function) return random_leaf(rng);
  const FunctionKind fn = random_function(rng);
  std::vector<PolicyTree> children;
  for (int i = 0; i < arity(fn); ++i) {
    children.push_back(build_tree(rng, level + 1, target, grow));
  }
  return PolicyTree::function(fn, std::move(children));
}

void collect_nodes(PolicyNode& node, bool non_leaf_only, std::vector<PolicyNode*>& out) {
  if (!non_leaf_only || node.kind == PolicyNode::Kind::Function) out.push_back(&node);
  for (auto& child : node.children) collect_nodes(*child, non_leaf_only, out);
}

PolicyNode* random_node(PolicyTree& tree, bool non_leaf_only, std::mt19937_64& rng) {
  std::vector<PolicyNode*> nodes;
  collect_nodes(tree.mutable_root(), non_leaf_only, nodes);
  if (nodes.empty()) return nullptr;
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  return nodes[pick(rng)];
}

}  // namespace

void EvolutionConfig::validate() const {
  if (population_size < 1) throw std::invalid_argument("population_size must be >= 1");
  if (generations < 0) throw std::invalid_argument("generations must be >= 0");
  if (crossover_prob < 0.0 || crossover_prob > 1.0 || mutation_prob < 0.0 ||
      mutation_prob > 1.0) {
    throw std::invalid_argument("operator probabilities must lie in [0, 1]");
  }
  if (tournament_size < 1 || tournament_size > population_size) {
    throw std::invalid_argument("tournament_size must lie in [1, population_size]");
  }
  if (init_min_depth < 1 || init_max_depth < init_min_depth) {
    throw std::invalid_argument("bad initialization depth range");
  }
  if (mutation_subtree_max_depth < 1) {
    throw std::invalid_argument("mutation_subtree_max_depth must be >= 1");
  }
  if (overall_max_depth < init_max_depth) {
    throw std::invalid_argument("overall_max_depth must cover the initialization depth");
  }
  if (batches < 1) throw std::invalid_argument("batches must be >= 1");
}

PolicyTree generate_tree(std::mt19937_64& rng, int min_depth, int max_depth) {
  std::uniform_int_distribution<int> depth_dist(min_depth, max_depth);
  const int target = depth_dist(rng);
  std::bernoulli_distribution half(0.5);
  const bool grow = half(rng);
  return build_tree(rng, 1, target, grow);
}

std::vector<Individual> init_population(const EvolutionConfig& config,
                                        std::mt19937_64& rng) {
  std::vector<Individual> population;
  population.reserve(static_cast<std::size_t>(config.population_size));
  for (int i = 0; i < config.population_size; ++i) {
    Individual ind;
    ind.tree = generate_tree(rng, config.init_min_depth, config.init_max_depth);
    population.push_back(std::move(ind));
  }
  return population;
}

const Individual& tournament_select(const std::vector<Individual>& population,
                                    int tournament_size, std::mt19937_64& rng) {
  if (static_cast<std::size_t>(tournament_size) > population.size()) {
    throw std::invalid_argument("tournament larger than population");
  }
  // Partial Fisher-Yates: uniform sample without replacement.
  std::vector<std::size_t> indices(population.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  for (int i = 0; i < tournament_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, indices.size() - 1);
    std::swap(indices[static_cast<std::size_t>(i)], indices[pick(rng)]);
  }

  std::vector<std::size_t> tied;
  double best = 0.0;
  for (int i = 0; i < tournament_size; ++i) {
    const std::size_t idx = indices[static_cast<std::size_t>(i)];
    const double f = population[idx].fitness;
    if (tied.empty() || f > best) {
      tied.assign(1, idx);
      best = f;
    } else if (f == best) {
      tied.push_back(idx);
    }
  }
  if (tied.size() == 1) return population[tied.front()];
  std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
  return population[tied[pick(rng)]];
}

std::pair<PolicyTree, PolicyTree> crossover_single_point(const PolicyTree& a,
                                                         const PolicyTree& b,
                                                         int max_depth,
                                                         std::mt19937_64& rng) {
  const auto has_non_leaf = [](const PolicyTree& t) {
    return !t.empty() && t.root().kind == PolicyNode::Kind::Function;
  };
  if (!has_non_leaf(a) || !has_non_leaf(b)) return {a, b};

  for (int attempt = 0; attempt < kOperatorRetries; ++attempt) {
    PolicyTree ca = a;
    PolicyTree cb = b;
    PolicyNode* na = random_node(ca, /*non_leaf_only=*/true, rng);
    PolicyNode* nb = random_node(cb, /*non_leaf_only=*/true, rng);
    std::swap(*na, *nb);
    if (ca.depth() <= max_depth && cb.depth() <= max_depth) {
      return {std::move(ca), std::move(cb)};
    }
  }
  return {a, b};
}

PolicyTree mutate_uniform(const PolicyTree& tree, const EvolutionConfig& config,
                          std::mt19937_64& rng) {
  std::bernoulli_distribution gate(config.mutation_prob);
  if (!gate(rng)) return tree;
  for (int attempt = 0; attempt < kOperatorRetries; ++attempt) {
    PolicyTree mutated = tree;
    PolicyNode* target = random_node(mutated, /*non_leaf_only=*/false, rng);
    PolicyTree replacement = generate_tree(rng, 1, config.mutation_subtree_max_depth);
    *target = std::move(replacement.mutable_root());
    if (mutated.depth() <= config.overall_max_depth) return mutated;
  }
  return tree;
}

double fitness(const PolicyTree& tree, std::span<const EvalCase> batch, double slack_m) {
  if (batch.empty()) throw std::invalid_argument("fitness: empty batch");
  TreePolicy policy(tree);
  double total = 0.0;
  for (const EvalCase& c : batch) {
    // A batch element is one instance with one sampled realization.
    total += rollout(*c.instance, c.envs->front(), policy, slack_m).total_profit;
  }
  return total / static_cast<double>(batch.size());
}

EvolveResult evolve(std::span<const EvalCase> train, std::span<const EvalCase> validation,
                    const EvolutionConfig& config, double slack_m,
                    const GenerationInspector& inspector) {
  config.validate();
  if (train.empty() || train.size() % static_cast<std::size_t>(config.batches) != 0) {
    throw std::invalid_argument("evolve: training set size must be a positive multiple "
                                "of the mini-batch count");
  }
  if (validation.empty()) throw std::invalid_argument("evolve: empty validation set");

  auto init_rng = make_rng(derive_seed(config.rng_seed, {kInitStream}));
  std::vector<Individual> population = init_population(config, init_rng);

  EvolveResult result;
  const std::size_t batch_size = train.size() / static_cast<std::size_t>(config.batches);
  bool have_best = false;

  if (config.generations == 0) {
    for (const Individual& ind : population) {
      const double val = expected_profit_on_set(TreePolicy(ind.tree), validation, slack_m);
      if (!have_best || val > result.best_validation) {
        result.best = ind.tree;
        result.best_validation = val;
        have_best = true;
      }
    }
    return result;
  }

  for (int g = 0; g < config.generations; ++g) {
    const int batch_id = g % config.batches;
    const std::span<const EvalCase> batch =
        train.subspan(static_cast<std::size_t>(batch_id) * batch_size, batch_size);

    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < population.size(); ++i) {
      population[i].fitness = fitness(population[i].tree, batch, slack_m);
      population[i].batch_id = batch_id;
      if (population[i].fitness > population[best_idx].fitness) best_idx = i;
    }

    const Individual& gen_best = population[best_idx];
    const double val = expected_profit_on_set(TreePolicy(gen_best.tree), validation, slack_m);

    GenerationRecord record;
    record.generation = g;
    record.batch_id = batch_id;
    record.batch_best_fitness = gen_best.fitness;
    record.validation_score = val;
    record.best_size = gen_best.tree.size();
    record.best_depth = gen_best.tree.depth();
    record.best_tree = serialize(gen_best.tree);
    result.history.push_back(std::move(record));

    if (!have_best || val > result.best_validation) {
      result.best = gen_best.tree;
      result.best_validation = val;
      have_best = true;
    }

    if (inspector) inspector(g, population);

    auto breed_rng =
        make_rng(derive_seed(config.rng_seed, {kBreedStream, static_cast<std::uint64_t>(g)}));
    std::vector<Individual> offspring;
    offspring.reserve(population.size());
    std::bernoulli_distribution do_crossover(config.crossover_prob);
    while (offspring.size() < population.size()) {
      const Individual& p1 = tournament_select(population, config.tournament_size, breed_rng);
      const Individual& p2 = tournament_select(population, config.tournament_size, breed_rng);
      PolicyTree c1, c2;
      if (do_crossover(breed_rng)) {
        std::tie(c1, c2) =
            crossover_single_point(p1.tree, p2.tree, config.overall_max_depth, breed_rng);
      } else {
        c1 = p1.tree;
        c2 = p2.tree;
      }
      c1 = mutate_uniform(c1, config, breed_rng);
      c2 = mutate_uniform(c2, config, breed_rng);
      offspring.push_back(Individual{std::move(c1), 0.0, -1});
      if (offspring.size() < population.size()) {
        offspring.push_back(Individual{std::move(c2), 0.0, -1});
      }
    }
    population = std::move(offspring);
  }

  return result;
}

std::string history_to_csv(const std::vector<GenerationRecord>& history) {
  std::ostringstream out;
  out << "generation,batch_id,batch_best_fitness,validation_score,best_size,best_depth,"
         "best_tree\n";
  out.precision(17);
  for (const auto& r : history) {
    out << r.generation << ',' << r.batch_id << ',' << r.batch_best_fitness << ','
        << r.validation_score << ',' << r.best_size << ',' << r.best_depth << ",\""
        << r.best_tree << "\"\n";
  }
  return out.str();
}

}  // namespace uaeoss
