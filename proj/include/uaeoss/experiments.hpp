#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uaeoss/baselines.hpp"
#include "uaeoss/evolution.hpp"
#include "uaeoss/json_io.hpp"

namespace uaeoss {

/// Relative improvement of a over b: (a - b) / b. Throws std::domain_error
/// when b is zero.
double gap(double a, double b);

/// Cell filter parsed from expressions like "nt=50,st=2000|4000,cloud=0.2".
/// Keys: nt, st, mmc, cloud; values may list alternatives with '|'. An empty
/// expression matches everything.
class ScenarioFilter {
 public:
  static ScenarioFilter parse(const std::string& expr);
  bool matches(const std::string& cell_name) const;

 private:
  std::vector<std::string> nt_, st_, mmc_, cloud_;
};

struct CompareParams {
  std::string bench_dir;
  std::string out_dir;  // empty: compute only, write nothing
  std::uint64_t master_seed = 0;
  int gphh_seeds = 5;
  double slack_m = 1.0;
  int threads = 0;  // 0 = hardware concurrency
  std::string filter;
  EvolutionConfig evolution;
  bool save_schedules = true;
};

struct GphhRun {
  std::uint64_t seed = 0;
  double test_profit = 0.0;
  std::string policy;  // serialized best tree
  std::vector<GenerationRecord> history;
};

struct CellReport {
  std::string cell;
  int nt = 0;
  double st_s = 0.0;
  double mmc_units = 0.0;
  double prob_cloud = 0.0;

  BestLahResult lah;
  double mdh_profit[3] = {0.0, 0.0, 0.0};  // MDH1..MDH3
  BaselineKind best_mdh_kind = BaselineKind::MDH1;
  double best_mdh = 0.0;

  std::vector<GphhRun> gphh;
  double gphh_best = 0.0;
  double gphh_mean = 0.0;
  double gphh_worst = 0.0;
};

struct ScaleRow {
  int nt = 0;
  double lah_sum = 0.0;
  double mdh_sum = 0.0;
  double gphh_best_sum = 0.0;
  double gphh_mean_sum = 0.0;
  double gphh_worst_sum = 0.0;
};

struct CompareReport {
  std::vector<CellReport> cells;
  std::vector<ScaleRow> scales;  // Table-IX-style aggregation over cells
  std::vector<std::string> warnings;
};

/// The comparison protocol over a generated benchmark: per cell the best
/// look-ahead heuristic (full k sweep), the three manually designed
/// heuristics, and GPHH trained once per seed (selection on the validation
/// split, reporting on the test split). Deterministic in master_seed
/// regardless of thread count. Writes CSV reports, policies, histories and
/// (optionally) schedules under out_dir.
CompareReport run_compare(const CompareParams& params);

struct TrajectorySeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (time, cumulative profit)
};

/// Cumulative-profit step series of each policy on one realization; a row
/// per decision, starting at (0, 0).
std::vector<TrajectorySeries> export_trajectory(
    const Instance& instance, const EnvironmentRealization& env,
    const std::vector<std::pair<std::string, const SchedulingPolicy*>>& policies,
    double slack_m);

std::string trajectory_to_csv(const std::vector<TrajectorySeries>& series);

struct ValidateSummary {
  std::size_t schedules_checked = 0;
  std::vector<std::string> failures;  // "path: tag detail" per violation
};

/// Re-validates every stored schedule (*.json) under a directory tree
/// against its instance and environment.
ValidateSummary validate_stored_schedules(const std::string& schedules_dir);

std::string compare_cells_csv(const CompareReport& report);
std::string compare_scales_csv(const CompareReport& report);
std::string lah_sweep_csv(const CompareReport& report);

}  // namespace uaeoss
