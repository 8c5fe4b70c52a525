#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "uaeoss/core.hpp"

namespace uaeoss {

/// One cell of the benchmark grid. MMC must come from the NT-matched set:
/// NT=50 -> {1024, 2048, 4096}; NT=100/150 -> {2048, 4096, 6144};
/// NT=200 -> {4096, 6144, 8192}.
struct ScenarioConfig {
  int nt = 50;
  double st_s = 2000.0;
  double mmc_units = 1024.0;
  double prob_cloud = 0.1;  // probability that a task is cloud covered
  std::uint64_t seed = 0;

  void validate() const;
  std::string cell_name() const;  // "<NT>_<ST>_<MMC>_<cloud>"
};

/// One draw from a Gamma distribution parameterized by its mean and shape
/// (scale = mean / shape). Throws std::invalid_argument on non-positive
/// parameters.
double gamma_sample(double mean, double shape, std::mt19937_64& rng);

/// Random instance on the scenario grid. Task windows are uniform over the
/// horizon; imaging times and expected profits follow truncated normals;
/// attitude profiles sweep pitch across the full maneuvering range at most
/// 0.9 deg/s (slower than the slowest slew rate, which keeps the delay curve
/// decreasing between transition-segment crossings).
Instance generate_instance(const ScenarioConfig& config);

/// Same sampling without the grid restrictions; used for small ad-hoc
/// scenarios.
Instance generate_random_instance(int nt, double st_s, double mmc_units,
                                  std::uint64_t seed);

/// Samples realized profits (Gamma, shape 30 around the expected profit),
/// write rates (Gamma, shape 350 around the expected rate) and cloud cover
/// (each task invisible with probability prob_cloud).
EnvironmentRealization sample_environment(const Instance& instance, double prob_cloud,
                                          std::uint64_t seed);

struct GridCell {
  int nt;
  double st_s;
  double mmc_units;
  double prob_cloud;
};

/// Shape of one generated benchmark: which grid cells, how many instances
/// per split and how many environment realizations per instance.
struct BenchmarkProfile {
  std::string name;
  std::vector<GridCell> cells;
  int train_count = 100;
  int valid_count = 20;
  int test_count = 20;
  int train_envs = 1;
  int valid_envs = 5;
  int test_envs = 5;
  int gphh_seeds = 5;
};

/// Full 108-cell grid (4 NT x 3 ST x 3 MMC x 3 cloud), 100/20/20 instances.
BenchmarkProfile full_profile();

/// Tractable 9-cell preset: NT=50, the 3x3 ST x MMC grid at prob_cloud 0.2,
/// 20/10/10 instances, 3 training seeds.
BenchmarkProfile desk_profile();

/// Generates every cell of the profile under out_dir
/// (bench/<cell>/{train,valid,test}/instance_<i>.json plus envs_<i>.json)
/// and writes a manifest.json recording every seed. Refuses to overwrite:
/// an existing cell directory is an error.
void generate_benchmark(std::uint64_t master_seed, const BenchmarkProfile& profile,
                        const std::string& out_dir);

}  // namespace uaeoss
