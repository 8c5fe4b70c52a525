// Command-line harness: benchmark generation, policy training, baseline
// sweeps, method comparison, trajectory export and schedule re-validation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uaeoss/experiments.hpp"
#include "uaeoss/instance_gen.hpp"
#include "uaeoss/rng.hpp"

namespace fs = std::filesystem;
using namespace uaeoss;

namespace {

std::uint64_t hash_name(const std::string& name) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

struct EvolutionOptions {
  int population = 20;
  int generations = 60;
  int batches = 20;
  int tournament = 4;
  double crossover_prob = 0.85;
  double mutation_prob = 0.15;
  int max_depth = 8;

  void attach(CLI::App* cmd) {
    cmd->add_option("--pop", population, "population size");
    cmd->add_option("--generations", generations, "number of generations");
    cmd->add_option("--batches", batches, "mini-batch count (must divide the train set)");
    cmd->add_option("--tournament", tournament, "tournament size");
    cmd->add_option("--cx-prob", crossover_prob, "crossover probability");
    cmd->add_option("--mut-prob", mutation_prob, "mutation probability");
    cmd->add_option("--max-depth", max_depth, "overall tree depth cap");
  }

  EvolutionConfig config() const {
    EvolutionConfig c;
    c.population_size = population;
    c.generations = generations;
    c.batches = batches;
    c.tournament_size = tournament;
    c.crossover_prob = crossover_prob;
    c.mutation_prob = mutation_prob;
    c.overall_max_depth = max_depth;
    return c;
  }
};

BaselineSpec parse_baseline_expr(const std::string& expr) {
  std::string kind = expr;
  int k = 0;
  if (const auto colon = expr.find(':'); colon != std::string::npos) {
    kind = expr.substr(0, colon);
    k = std::stoi(expr.substr(colon + 1));
  }
  BaselineSpec spec;
  if (kind == "LAH1") spec.kind = BaselineKind::LAH1;
  else if (kind == "LAH2") spec.kind = BaselineKind::LAH2;
  else if (kind == "LAH3") spec.kind = BaselineKind::LAH3;
  else if (kind == "MDH1") spec.kind = BaselineKind::MDH1;
  else if (kind == "MDH2") spec.kind = BaselineKind::MDH2;
  else if (kind == "MDH3") spec.kind = BaselineKind::MDH3;
  else throw CLI::ValidationError("unknown baseline '" + kind + "'");
  spec.lookahead_k = k;
  spec.validate();
  return spec;
}

std::vector<std::string> matched_cells(const std::string& bench, const std::string& filter) {
  const ScenarioFilter f = ScenarioFilter::parse(filter);
  std::vector<std::string> names;
  for (const std::string& name : list_cells(bench)) {
    if (f.matches(name)) names.push_back(name);
  }
  return names;
}

int cmd_gen(const std::string& out, std::uint64_t seed, const std::string& profile_name,
            const std::string& filter) {
  BenchmarkProfile profile = profile_name == "full" ? full_profile() : desk_profile();
  if (!filter.empty()) {
    const ScenarioFilter f = ScenarioFilter::parse(filter);
    std::vector<GridCell> kept;
    for (const GridCell& cell : profile.cells) {
      ScenarioConfig cfg{cell.nt, cell.st_s, cell.mmc_units, cell.prob_cloud, 0};
      if (f.matches(cfg.cell_name())) kept.push_back(cell);
    }
    profile.cells = std::move(kept);
  }
  generate_benchmark(seed, profile, out);
  std::cout << "generated " << profile.cells.size() << " cell(s) under " << out << "\n";
  return 0;
}

int cmd_train(const std::string& bench, const std::string& out, std::uint64_t seed,
              const std::string& filter, double slack_m, const EvolutionOptions& opts) {
  const auto names = matched_cells(bench, filter);
  if (names.empty()) {
    std::cerr << "no cells matched\n";
    return 1;
  }
  fs::create_directories(out);
  for (const std::string& name : names) {
    const CellData cell = load_cell((fs::path(bench) / "bench" / name).string());
    std::vector<EvalCase> train, valid;
    for (const auto& d : cell.train) train.push_back({&d.instance, &d.envs});
    for (const auto& d : cell.valid) valid.push_back({&d.instance, &d.envs});

    EvolutionConfig config = opts.config();
    config.rng_seed = derive_seed(seed, {hash_name(name)});
    const EvolveResult result = evolve(train, valid, config, slack_m);

    const fs::path cell_out = fs::path(out) / name;
    fs::create_directories(cell_out);
    write_policy_file((cell_out / "best_policy.txt").string(), {result.best});
    write_text_file((cell_out / "history.csv").string(), history_to_csv(result.history));
    std::cout << name << ": validation " << result.best_validation << "  policy "
              << serialize(result.best) << "\n";
  }
  return 0;
}

int cmd_baselines(const std::string& bench, const std::string& out,
                  const std::string& filter, double slack_m) {
  const auto names = matched_cells(bench, filter);
  if (names.empty()) {
    std::cerr << "no cells matched\n";
    return 1;
  }
  fs::create_directories(out);
  std::string csv = "cell,variant,k,expected_profit\n";
  for (const std::string& name : names) {
    const CellData cell = load_cell((fs::path(bench) / "bench" / name).string());
    std::vector<EvalCase> test;
    for (const auto& d : cell.test) test.push_back({&d.instance, &d.envs});

    const BestLahResult lah = best_lah(test, slack_m);
    for (const auto& entry : lah.sweep) {
      csv += name + "," + to_string(entry.spec.kind) + "," +
             std::to_string(entry.spec.lookahead_k) + "," +
             std::to_string(entry.expected_profit) + "\n";
    }
    for (BaselineKind kind : {BaselineKind::MDH1, BaselineKind::MDH2, BaselineKind::MDH3}) {
      BaselineSpec spec;
      spec.kind = kind;
      const double profit = expected_profit_on_set(BaselinePolicy(spec), test, slack_m);
      csv += name + "," + to_string(kind) + ",0," + std::to_string(profit) + "\n";
    }
    std::cout << name << ": best " << to_string(lah.best.kind);
    if (lah.best.lookahead_k > 0) std::cout << " k=" << lah.best.lookahead_k;
    std::cout << " profit " << lah.expected_profit << "\n";
  }
  write_text_file((fs::path(out) / "baselines.csv").string(), csv);
  return 0;
}

int cmd_compare(CompareParams params) {
  const CompareReport report = run_compare(params);
  for (const std::string& warning : report.warnings) std::cerr << "warning: " << warning << "\n";
  for (const CellReport& cell : report.cells) {
    std::printf("%-22s lah %10.2f  mdh %10.2f  gphh best %10.2f mean %10.2f worst %10.2f\n",
                cell.cell.c_str(), cell.lah.expected_profit, cell.best_mdh, cell.gphh_best,
                cell.gphh_mean, cell.gphh_worst);
  }
  for (const ScaleRow& row : report.scales) {
    std::printf("scale %3d: gap(best, LAH) %+.4f  gap(best, MDH) %+.4f\n", row.nt,
                gap(row.gphh_best_sum, row.lah_sum), gap(row.gphh_best_sum, row.mdh_sum));
  }
  return report.cells.empty() ? 1 : 0;
}

int cmd_trajectory(const std::string& bench, const std::string& cell_name,
                   const std::string& split, int instance_idx, int env_idx,
                   const std::vector<std::string>& policy_files,
                   const std::vector<std::string>& baseline_exprs, const std::string& out,
                   double slack_m) {
  const CellData cell = load_cell((fs::path(bench) / "bench" / cell_name).string());
  const std::vector<InstanceData>* data = &cell.test;
  if (split == "train") data = &cell.train;
  else if (split == "valid") data = &cell.valid;
  else if (split != "test") throw CLI::ValidationError("split must be train/valid/test");

  const InstanceData& item = data->at(static_cast<std::size_t>(instance_idx));
  const EnvironmentRealization& env = item.envs.at(static_cast<std::size_t>(env_idx));

  std::vector<PolicyTree> trees;
  std::vector<std::unique_ptr<SchedulingPolicy>> owned;
  std::vector<std::pair<std::string, const SchedulingPolicy*>> policies;
  for (const std::string& file : policy_files) {
    for (auto& tree : read_policy_file(file)) trees.push_back(std::move(tree));
  }
  for (std::size_t i = 0; i < trees.size(); ++i) {
    owned.push_back(std::make_unique<TreePolicy>(trees[i]));
    policies.emplace_back("policy_" + std::to_string(i), owned.back().get());
  }
  for (const std::string& expr : baseline_exprs) {
    owned.push_back(std::make_unique<BaselinePolicy>(parse_baseline_expr(expr)));
    policies.emplace_back(expr, owned.back().get());
  }
  if (policies.empty()) throw CLI::ValidationError("no policies given");

  const auto series = export_trajectory(item.instance, env, policies, slack_m);
  const std::string csv = trajectory_to_csv(series);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(out, csv);
  }
  return 0;
}

int cmd_validate(const std::string& schedules_dir) {
  const ValidateSummary summary = validate_stored_schedules(schedules_dir);
  std::cout << "checked " << summary.schedules_checked << " schedule(s), "
            << summary.failures.size() << " violation(s)\n";
  for (const std::string& failure : summary.failures) std::cerr << failure << "\n";
  return summary.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheduling-policy evolution for uncertain agile satellite scheduling"};
  app.require_subcommand(1);

  std::string bench, out, filter, profile = "desk", cell, split = "test", schedules;
  std::uint64_t seed = 42;
  double slack_m = 1.0;
  int seeds = 5, threads = 0, instance_idx = 0, env_idx = 0;
  bool save_schedules = true;
  std::vector<std::string> policy_files, baseline_exprs;
  EvolutionOptions evo;

  auto* gen = app.add_subcommand("gen", "generate a benchmark");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--seed", seed, "master seed");
  gen->add_option("--profile", profile, "desk or full")
      ->check(CLI::IsMember({"desk", "full"}));
  gen->add_option("--filter", filter, "cell filter, e.g. nt=50,st=2000");

  auto* train = app.add_subcommand("train", "evolve a policy per cell");
  train->add_option("--bench", bench, "benchmark directory")->required();
  train->add_option("--out", out, "output directory")->required();
  train->add_option("--seed", seed, "master seed");
  train->add_option("--filter", filter, "cell filter");
  train->add_option("--slack-m", slack_m, "memory slack factor");
  evo.attach(train);

  auto* base = app.add_subcommand("baselines", "run LAH sweep and MDHs per cell");
  base->add_option("--bench", bench, "benchmark directory")->required();
  base->add_option("--out", out, "output directory")->required();
  base->add_option("--filter", filter, "cell filter");
  base->add_option("--slack-m", slack_m, "memory slack factor");

  auto* compare = app.add_subcommand("compare", "full GPHH vs baselines protocol");
  compare->add_option("--bench", bench, "benchmark directory")->required();
  compare->add_option("--out", out, "output directory")->required();
  compare->add_option("--seed", seed, "master seed");
  compare->add_option("--seeds", seeds, "GPHH runs per cell");
  compare->add_option("--threads", threads, "worker threads (0 = hardware)");
  compare->add_option("--filter", filter, "cell filter");
  compare->add_option("--slack-m", slack_m, "memory slack factor");
  compare->add_flag("--save-schedules,!--no-save-schedules", save_schedules,
                    "store rollout schedules for later validation");
  evo.attach(compare);

  auto* traj = app.add_subcommand("trajectory", "export cumulative-profit ladder series");
  traj->add_option("--bench", bench, "benchmark directory")->required();
  traj->add_option("--cell", cell, "cell name")->required();
  traj->add_option("--split", split, "train/valid/test");
  traj->add_option("--instance", instance_idx, "instance index");
  traj->add_option("--env", env_idx, "environment index");
  traj->add_option("--policy", policy_files, "policy file (repeatable)");
  traj->add_option("--baseline", baseline_exprs, "baseline, e.g. LAH2:5 (repeatable)");
  traj->add_option("--out", out, "output CSV (stdout when omitted)");
  traj->add_option("--slack-m", slack_m, "memory slack factor");

  auto* val = app.add_subcommand("validate", "re-check stored schedules");
  val->add_option("--schedules", schedules, "schedule directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(out, seed, profile, filter);
    if (train->parsed()) return cmd_train(bench, out, seed, filter, slack_m, evo);
    if (base->parsed()) return cmd_baselines(bench, out, filter, slack_m);
    if (compare->parsed()) {
      CompareParams params;
      params.bench_dir = bench;
      params.out_dir = out;
      params.master_seed = seed;
      params.gphh_seeds = seeds;
      params.slack_m = slack_m;
      params.threads = threads;
      params.filter = filter;
      params.evolution = evo.config();
      params.save_schedules = save_schedules;
      return cmd_compare(std::move(params));
    }
    if (traj->parsed()) {
      return cmd_trajectory(bench, cell, split, instance_idx, env_idx, policy_files,
                            baseline_exprs, out, slack_m);
    }
    if (val->parsed()) return cmd_validate(schedules);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
