#include "uaeoss/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "uaeoss/rng.hpp"

namespace uaeoss {

namespace fs = std::filesystem;

double gap(double a, double b) {
  if (b == 0.0) throw std::domain_error("gap: reference value is zero");
  return (a - b) / b;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

// FNV-1a; stable cell identity for seed derivation independent of filters.
std::uint64_t hash_name(const std::string& name) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

void run_jobs(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<EvalCase> as_cases(const std::vector<InstanceData>& data) {
  std::vector<EvalCase> cases;
  cases.reserve(data.size());
  for (const auto& d : data) cases.push_back({&d.instance, &d.envs});
  return cases;
}

void parse_cell_name(const std::string& name, CellReport& report) {
  const auto parts = split(name, '_');
  if (parts.size() == 4) {
    report.nt = std::stoi(parts[0]);
    report.st_s = std::stod(parts[1]);
    report.mmc_units = std::stod(parts[2]);
    report.prob_cloud = std::stod(parts[3]);
  }
}

std::string csv_num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

ScenarioFilter ScenarioFilter::parse(const std::string& expr) {
  ScenarioFilter filter;
  if (expr.empty()) return filter;
  for (const std::string& clause : split(expr, ',')) {
    const auto eq = clause.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("filter clause '" + clause + "' is not key=value");
    }
    const std::string key = clause.substr(0, eq);
    const auto values = split(clause.substr(eq + 1), '|');
    if (key == "nt") {
      filter.nt_ = values;
    } else if (key == "st") {
      filter.st_ = values;
    } else if (key == "mmc") {
      filter.mmc_ = values;
    } else if (key == "cloud") {
      filter.cloud_ = values;
    } else {
      throw std::invalid_argument("unknown filter key '" + key + "'");
    }
  }
  return filter;
}

bool ScenarioFilter::matches(const std::string& cell_name) const {
  const auto parts = split(cell_name, '_');
  if (parts.size() != 4) return false;
  auto ok = [](const std::vector<std::string>& wanted, const std::string& got) {
    return wanted.empty() || std::find(wanted.begin(), wanted.end(), got) != wanted.end();
  };
  return ok(nt_, parts[0]) && ok(st_, parts[1]) && ok(mmc_, parts[2]) && ok(cloud_, parts[3]);
}

namespace {

void save_cell_schedules(const CellReport& report, const CellData& cell,
                         const CompareParams& params) {
  const fs::path dir = fs::path(params.out_dir) / "schedules" / report.cell;
  fs::create_directories(dir);

  // Best GPHH policy across seeds, best LAH variant and best MDH variant.
  std::size_t best_run = 0;
  for (std::size_t s = 1; s < report.gphh.size(); ++s) {
    if (report.gphh[s].test_profit > report.gphh[best_run].test_profit) best_run = s;
  }
  const PolicyTree best_tree = parse_policy(report.gphh[best_run].policy);
  const TreePolicy gphh_policy(best_tree);
  const BaselinePolicy lah_policy(report.lah.best);
  BaselineSpec mdh_spec;
  mdh_spec.kind = report.best_mdh_kind;
  const BaselinePolicy mdh_policy(mdh_spec);

  const std::pair<std::string, const SchedulingPolicy*> runs[] = {
      {"gphh", &gphh_policy},
      {to_string(report.lah.best.kind), &lah_policy},
      {to_string(mdh_spec.kind), &mdh_policy},
  };

  for (std::size_t i = 0; i < cell.test.size(); ++i) {
    const InstanceData& data = cell.test[i];
    const fs::path instance_path =
        fs::path(cell.dir) / "test" / ("instance_" + std::to_string(i) + ".json");
    for (std::size_t j = 0; j < data.envs.size(); ++j) {
      for (const auto& [label, policy] : runs) {
        const RolloutOutcome outcome =
            rollout(data.instance, data.envs[j], *policy, params.slack_m);
        StoredSchedule stored;
        stored.schedule = outcome.schedule;
        stored.env_index = static_cast<int>(j);
        stored.policy_label = label;
        std::error_code ec;
        const fs::path rel = fs::relative(instance_path, dir, ec);
        stored.instance_path = ec ? fs::absolute(instance_path).string() : rel.string();
        save_schedule((dir / (label + "_i" + std::to_string(i) + "_e" + std::to_string(j) +
                              ".json"))
                          .string(),
                      stored);
      }
    }
  }
}

}  // namespace

CompareReport run_compare(const CompareParams& params) {
  CompareReport report;
  const ScenarioFilter filter = ScenarioFilter::parse(params.filter);

  std::vector<std::string> cell_names;
  for (const std::string& name : list_cells(params.bench_dir)) {
    if (filter.matches(name)) cell_names.push_back(name);
  }
  if (cell_names.empty()) {
    report.warnings.push_back("no benchmark cells matched the filter");
    return report;
  }

  std::vector<CellData> cells(cell_names.size());
  std::vector<bool> usable(cell_names.size(), true);
  for (std::size_t i = 0; i < cell_names.size(); ++i) {
    cells[i] = load_cell((fs::path(params.bench_dir) / "bench" / cell_names[i]).string());
    if (cells[i].train.empty() || cells[i].valid.empty() || cells[i].test.empty()) {
      report.warnings.push_back("cell " + cell_names[i] + " is missing a split; skipped");
      usable[i] = false;
    }
  }

  report.cells.resize(cell_names.size());

  // One job per baseline sweep and per GPHH seed run.
  struct Job {
    std::size_t cell;
    int kind;  // -1 = baselines, otherwise seed index
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!usable[i]) continue;
    jobs.push_back({i, -1});
    for (int s = 0; s < params.gphh_seeds; ++s) jobs.push_back({i, s});
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    report.cells[i].cell = cell_names[i];
    parse_cell_name(cell_names[i], report.cells[i]);
    report.cells[i].gphh.resize(static_cast<std::size_t>(params.gphh_seeds));
  }

  run_jobs(jobs.size(), params.threads, [&](std::size_t j) {
    const Job job = jobs[j];
    const CellData& cell = cells[job.cell];
    CellReport& out = report.cells[job.cell];
    const auto test_cases = as_cases(cell.test);

    if (job.kind < 0) {
      out.lah = best_lah(test_cases, params.slack_m);
      for (int m = 0; m < 3; ++m) {
        BaselineSpec spec;
        spec.kind = static_cast<BaselineKind>(static_cast<int>(BaselineKind::MDH1) + m);
        out.mdh_profit[m] =
            expected_profit_on_set(BaselinePolicy(spec), test_cases, params.slack_m);
      }
      const int best =
          static_cast<int>(std::max_element(out.mdh_profit, out.mdh_profit + 3) -
                           out.mdh_profit);
      out.best_mdh_kind =
          static_cast<BaselineKind>(static_cast<int>(BaselineKind::MDH1) + best);
      out.best_mdh = out.mdh_profit[best];
      return;
    }

    const auto train_cases = as_cases(cell.train);
    const auto valid_cases = as_cases(cell.valid);
    EvolutionConfig config = params.evolution;
    config.rng_seed = derive_seed(params.master_seed,
                                  {hash_name(cell.name), static_cast<std::uint64_t>(job.kind)});
    const EvolveResult evolved = evolve(train_cases, valid_cases, config, params.slack_m);

    GphhRun& run = out.gphh[static_cast<std::size_t>(job.kind)];
    run.seed = config.rng_seed;
    run.policy = serialize(evolved.best);
    run.history = evolved.history;
    run.test_profit =
        expected_profit_on_set(TreePolicy(evolved.best), test_cases, params.slack_m);
  });

  // Drop skipped cells, then summarize.
  std::vector<CellReport> kept;
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    if (usable[i]) kept.push_back(std::move(report.cells[i]));
  }
  report.cells = std::move(kept);

  for (CellReport& cell : report.cells) {
    double best = 0.0, worst = 0.0, sum = 0.0;
    for (std::size_t s = 0; s < cell.gphh.size(); ++s) {
      const double p = cell.gphh[s].test_profit;
      if (s == 0 || p > best) best = p;
      if (s == 0 || p < worst) worst = p;
      sum += p;
    }
    cell.gphh_best = best;
    cell.gphh_worst = worst;
    cell.gphh_mean = cell.gphh.empty() ? 0.0 : sum / static_cast<double>(cell.gphh.size());
  }

  for (const CellReport& cell : report.cells) {
    auto it = std::find_if(report.scales.begin(), report.scales.end(),
                           [&](const ScaleRow& row) { return row.nt == cell.nt; });
    if (it == report.scales.end()) {
      report.scales.push_back({cell.nt, 0, 0, 0, 0, 0});
      it = std::prev(report.scales.end());
    }
    it->lah_sum += cell.lah.expected_profit;
    it->mdh_sum += cell.best_mdh;
    it->gphh_best_sum += cell.gphh_best;
    it->gphh_mean_sum += cell.gphh_mean;
    it->gphh_worst_sum += cell.gphh_worst;
  }
  std::sort(report.scales.begin(), report.scales.end(),
            [](const ScaleRow& a, const ScaleRow& b) { return a.nt < b.nt; });

  if (!params.out_dir.empty()) {
    fs::create_directories(params.out_dir);
    write_text_file((fs::path(params.out_dir) / "report_cells.csv").string(),
                    compare_cells_csv(report));
    write_text_file((fs::path(params.out_dir) / "report_scales.csv").string(),
                    compare_scales_csv(report));
    write_text_file((fs::path(params.out_dir) / "lah_sweep.csv").string(),
                    lah_sweep_csv(report));

    nlohmann::json config_json;
    config_json["bench_dir"] = params.bench_dir;
    config_json["master_seed"] = params.master_seed;
    config_json["gphh_seeds"] = params.gphh_seeds;
    config_json["slack_m"] = params.slack_m;
    config_json["filter"] = params.filter;
    config_json["population_size"] = params.evolution.population_size;
    config_json["generations"] = params.evolution.generations;
    config_json["batches"] = params.evolution.batches;
    config_json["crossover_prob"] = params.evolution.crossover_prob;
    config_json["mutation_prob"] = params.evolution.mutation_prob;
    config_json["tournament_size"] = params.evolution.tournament_size;
    write_text_file((fs::path(params.out_dir) / "run_config.json").string(),
                    config_json.dump(2) + "\n");

    for (std::size_t i = 0; i < report.cells.size(); ++i) {
      const CellReport& cell = report.cells[i];
      const fs::path cell_dir = fs::path(params.out_dir) / "gphh" / cell.cell;
      fs::create_directories(cell_dir);
      std::string policies;
      for (std::size_t s = 0; s < cell.gphh.size(); ++s) {
        policies += cell.gphh[s].policy + "\n";
        write_text_file((cell_dir / ("history_seed" + std::to_string(s) + ".csv")).string(),
                        history_to_csv(cell.gphh[s].history));
      }
      write_text_file((cell_dir / "policies.txt").string(), policies);
    }

    if (params.save_schedules) {
      for (const CellReport& cell : report.cells) {
        const auto it =
            std::find_if(cells.begin(), cells.end(),
                         [&](const CellData& c) { return c.name == cell.cell; });
        if (it != cells.end()) save_cell_schedules(cell, *it, params);
      }
    }
  }
  return report;
}

std::vector<TrajectorySeries> export_trajectory(
    const Instance& instance, const EnvironmentRealization& env,
    const std::vector<std::pair<std::string, const SchedulingPolicy*>>& policies,
    double slack_m) {
  std::vector<TrajectorySeries> series;
  series.reserve(policies.size());
  for (const auto& [label, policy] : policies) {
    const RolloutOutcome outcome = rollout(instance, env, *policy, slack_m);
    TrajectorySeries s;
    s.label = label;
    s.points.emplace_back(0.0, 0.0);
    for (std::size_t i = 0; i < outcome.schedule.observations.size(); ++i) {
      s.points.emplace_back(outcome.schedule.observations[i].oe_s,
                            outcome.trace[i].cumulative_profit);
    }
    series.push_back(std::move(s));
  }
  return series;
}

std::string trajectory_to_csv(const std::vector<TrajectorySeries>& series) {
  std::ostringstream out;
  out << "policy,t_s,cumulative_profit\n";
  out.precision(17);
  for (const auto& s : series) {
    for (const auto& [t, profit] : s.points) {
      out << s.label << ',' << t << ',' << profit << '\n';
    }
  }
  return out.str();
}

ValidateSummary validate_stored_schedules(const std::string& schedules_dir) {
  ValidateSummary summary;
  if (!fs::exists(schedules_dir)) {
    throw std::invalid_argument("no such schedule directory: " + schedules_dir);
  }
  for (const auto& entry : fs::recursive_directory_iterator(schedules_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const StoredSchedule stored = load_schedule(entry.path().string());

    fs::path instance_path = stored.instance_path;
    if (instance_path.is_relative()) {
      instance_path = entry.path().parent_path() / instance_path;
    }
    const Instance instance = load_instance(instance_path.string());
    fs::path envs_path = instance_path;
    envs_path.replace_filename("envs_" +
                               instance_path.filename().string().substr(9));
    const auto envs = load_envs(envs_path.string());
    const auto& env = envs.at(static_cast<std::size_t>(stored.env_index));

    ++summary.schedules_checked;
    const ValidationReport result = validate_schedule(instance, env, stored.schedule);
    for (const Violation& v : result.violations) {
      summary.failures.push_back(entry.path().string() + ": " + to_string(v.tag) + " " +
                                 v.detail);
    }
  }
  return summary;
}

std::string compare_cells_csv(const CompareReport& report) {
  std::ostringstream out;
  out << "cell,nt,st_s,mmc_units,prob_cloud,best_lah,best_lah_k,lah_profit,"
         "mdh1_profit,mdh2_profit,mdh3_profit,best_mdh,mdh_profit,"
         "gphh_best,gphh_mean,gphh_worst,"
         "gap_best_vs_lah,gap_mean_vs_lah,gap_worst_vs_lah,"
         "gap_best_vs_mdh,gap_mean_vs_mdh,gap_worst_vs_mdh\n";
  for (const CellReport& c : report.cells) {
    out << c.cell << ',' << c.nt << ',' << csv_num(c.st_s) << ',' << csv_num(c.mmc_units)
        << ',' << csv_num(c.prob_cloud) << ',' << to_string(c.lah.best.kind) << ','
        << c.lah.best.lookahead_k << ',' << csv_num(c.lah.expected_profit) << ','
        << csv_num(c.mdh_profit[0]) << ',' << csv_num(c.mdh_profit[1]) << ','
        << csv_num(c.mdh_profit[2]) << ',' << to_string(c.best_mdh_kind) << ','
        << csv_num(c.best_mdh);
    for (double g : {c.gphh_best, c.gphh_mean, c.gphh_worst}) out << ',' << csv_num(g);
    for (double g : {c.gphh_best, c.gphh_mean, c.gphh_worst}) {
      out << ',' << csv_num(gap(g, c.lah.expected_profit));
    }
    for (double g : {c.gphh_best, c.gphh_mean, c.gphh_worst}) {
      out << ',' << csv_num(gap(g, c.best_mdh));
    }
    out << '\n';
  }
  return out.str();
}

std::string compare_scales_csv(const CompareReport& report) {
  std::ostringstream out;
  out << "task_scale,lah_sum,mdh_sum,gphh_best_sum,gphh_mean_sum,gphh_worst_sum,"
         "gap_best_vs_lah,gap_mean_vs_lah,gap_best_vs_mdh,gap_mean_vs_mdh\n";
  for (const ScaleRow& row : report.scales) {
    out << row.nt << ',' << csv_num(row.lah_sum) << ',' << csv_num(row.mdh_sum) << ','
        << csv_num(row.gphh_best_sum) << ',' << csv_num(row.gphh_mean_sum) << ','
        << csv_num(row.gphh_worst_sum) << ',' << csv_num(gap(row.gphh_best_sum, row.lah_sum))
        << ',' << csv_num(gap(row.gphh_mean_sum, row.lah_sum)) << ','
        << csv_num(gap(row.gphh_best_sum, row.mdh_sum)) << ','
        << csv_num(gap(row.gphh_mean_sum, row.mdh_sum)) << '\n';
  }
  return out.str();
}

std::string lah_sweep_csv(const CompareReport& report) {
  std::ostringstream out;
  out << "cell,variant,k,expected_profit\n";
  for (const CellReport& c : report.cells) {
    for (const LahSweepEntry& e : c.lah.sweep) {
      out << c.cell << ',' << to_string(e.spec.kind) << ',' << e.spec.lookahead_k << ','
          << csv_num(e.expected_profit) << '\n';
    }
  }
  return out.str();
}

}  // namespace uaeoss
