#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "support/test_util.hpp"
#include "uaeoss/experiments.hpp"
#include "uaeoss/instance_gen.hpp"

using namespace uaeoss;
using namespace uaeoss::testing;

namespace fs = std::filesystem;

TEST_CASE("gap is the relative improvement") {
  CHECK(gap(105.0, 100.0) == doctest::Approx(0.05));
  CHECK(gap(100.0, 100.0) == 0.0);
  CHECK(gap(94965.36, 89156.65) == doctest::Approx(0.06515).epsilon(1e-3));
  CHECK_THROWS_AS(gap(1.0, 0.0), std::domain_error);
}

TEST_CASE("scenario filters match cell names piecewise") {
  const ScenarioFilter all = ScenarioFilter::parse("");
  CHECK(all.matches("50_2000_1024_0.2"));
  CHECK(all.matches("200_6000_8192_0.3"));

  const ScenarioFilter f = ScenarioFilter::parse("nt=50,st=2000|4000,cloud=0.2");
  CHECK(f.matches("50_2000_1024_0.2"));
  CHECK(f.matches("50_4000_2048_0.2"));
  CHECK_FALSE(f.matches("50_6000_1024_0.2"));
  CHECK_FALSE(f.matches("50_2000_1024_0.3"));
  CHECK_FALSE(f.matches("100_2000_2048_0.2"));

  CHECK_THROWS_AS(ScenarioFilter::parse("bogus=1"), std::invalid_argument);
  CHECK_THROWS_AS(ScenarioFilter::parse("nt"), std::invalid_argument);
}

TEST_CASE("trajectories step at observation ends and finish at the total") {
  const Instance inst = generate_random_instance(15, 2000.0, 1024.0, 21);
  const EnvironmentRealization env = sample_environment(inst, 0.2, 22);

  const ConstantPolicy constant;
  const BaselinePolicy lah1({BaselineKind::LAH1, 0});
  const auto series = export_trajectory(
      inst, env, {{"constant", &constant}, {"LAH1", &lah1}}, 1.0);
  REQUIRE(series.size() == 2);

  for (const TrajectorySeries& s : series) {
    REQUIRE_FALSE(s.points.empty());
    CHECK(s.points.front() == std::pair{0.0, 0.0});
    double last_t = -1.0, last_p = -1.0;
    for (const auto& [t, p] : s.points) {
      CHECK(t >= last_t);
      CHECK(p >= last_p);
      last_t = t;
      last_p = p;
    }
  }
  const double lah1_total = rollout(inst, env, lah1, 1.0).total_profit;
  CHECK(series[1].points.back().second == lah1_total);

  // No observable task: the series is the single origin row.
  const EnvironmentRealization covered = sample_environment(inst, 1.0, 5);
  const auto empty_series = export_trajectory(inst, covered, {{"constant", &constant}}, 1.0);
  REQUIRE(empty_series[0].points.size() == 1);
  CHECK(empty_series[0].points[0] == std::pair{0.0, 0.0});

  const std::string csv = trajectory_to_csv(series);
  CHECK(csv.rfind("policy,t_s,cumulative_profit\n", 0) == 0);
}

namespace {

fs::path make_tiny_benchmark(const std::string& tag) {
  BenchmarkProfile profile = desk_profile();
  profile.cells = {profile.cells[0]};  // a single 50_2000_1024_0.2 cell
  profile.train_count = 4;
  profile.valid_count = 2;
  profile.test_count = 2;
  profile.valid_envs = 2;
  profile.test_envs = 2;

  const fs::path dir = fs::temp_directory_path() / ("uaeoss_cmp_" + tag);
  fs::remove_all(dir);
  generate_benchmark(7, profile, dir.string());
  return dir;
}

CompareParams tiny_params(const fs::path& bench, const fs::path& out) {
  CompareParams params;
  params.bench_dir = bench.string();
  params.out_dir = out.string();
  params.master_seed = 3;
  params.gphh_seeds = 2;
  params.threads = 2;
  params.evolution.population_size = 6;
  params.evolution.generations = 2;
  params.evolution.batches = 2;
  params.evolution.tournament_size = 3;
  return params;
}

}  // namespace

TEST_CASE("run_compare assembles a deterministic report and stores artifacts") {
  const fs::path bench = make_tiny_benchmark("a");
  const fs::path out = fs::temp_directory_path() / "uaeoss_cmp_out";
  fs::remove_all(out);

  const CompareReport report = run_compare(tiny_params(bench, out));
  REQUIRE(report.cells.size() == 1);
  const CellReport& cell = report.cells[0];
  CHECK(cell.cell == "50_2000_1024_0.2");
  CHECK(cell.nt == 50);
  CHECK(cell.lah.sweep.size() == 39);
  CHECK(cell.gphh.size() == 2);
  CHECK(cell.gphh_best >= cell.gphh_mean);
  CHECK(cell.gphh_mean >= cell.gphh_worst);
  CHECK(cell.best_mdh ==
        std::max({cell.mdh_profit[0], cell.mdh_profit[1], cell.mdh_profit[2]}));

  REQUIRE(report.scales.size() == 1);
  CHECK(report.scales[0].nt == 50);
  CHECK(report.scales[0].gphh_best_sum == cell.gphh_best);

  // Determinism across runs and thread counts.
  CompareParams again = tiny_params(bench, "");
  again.threads = 1;
  const CompareReport replay = run_compare(again);
  REQUIRE(replay.cells.size() == 1);
  CHECK(replay.cells[0].gphh_best == cell.gphh_best);
  CHECK(replay.cells[0].gphh_worst == cell.gphh_worst);
  CHECK(replay.cells[0].lah.expected_profit == cell.lah.expected_profit);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(replay.cells[0].gphh[s].policy == cell.gphh[s].policy);
    CHECK(replay.cells[0].gphh[s].test_profit == cell.gphh[s].test_profit);
  }

  // Written artifacts: reports, resolved config, policies, histories.
  CHECK(fs::exists(out / "report_cells.csv"));
  CHECK(fs::exists(out / "report_scales.csv"));
  CHECK(fs::exists(out / "lah_sweep.csv"));
  CHECK(fs::exists(out / "run_config.json"));
  CHECK(fs::exists(out / "gphh" / cell.cell / "policies.txt"));
  CHECK(fs::exists(out / "gphh" / cell.cell / "history_seed0.csv"));

  const std::string cells_csv = compare_cells_csv(report);
  CHECK(cells_csv.find("gap_best_vs_lah") != std::string::npos);
  CHECK(cells_csv.find(cell.cell) != std::string::npos);

  // A single seed collapses best/mean/worst onto one value.
  CompareParams solo = tiny_params(bench, "");
  solo.gphh_seeds = 1;
  const CompareReport one = run_compare(solo);
  CHECK(one.cells[0].gphh_best == one.cells[0].gphh_mean);
  CHECK(one.cells[0].gphh_mean == one.cells[0].gphh_worst);

  // Stored schedules re-validate cleanly.
  const ValidateSummary summary = validate_stored_schedules((out / "schedules").string());
  CHECK(summary.schedules_checked == 2 * 2 * 3);  // instances x envs x policies
  CHECK(summary.failures.empty());

  fs::remove_all(bench);
  fs::remove_all(out);
}

TEST_CASE("run_compare warns on empty matches instead of failing") {
  const fs::path bench = make_tiny_benchmark("b");
  CompareParams params = tiny_params(bench, "");
  params.filter = "nt=200";
  const CompareReport report = run_compare(params);
  CHECK(report.cells.empty());
  REQUIRE_FALSE(report.warnings.empty());
  fs::remove_all(bench);
}
