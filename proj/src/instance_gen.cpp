#include "uaeoss/instance_gen.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "uaeoss/json_io.hpp"
#include "uaeoss/rng.hpp"

namespace uaeoss {

namespace {

constexpr double kAttitudeBoundDeg = 27.0;
constexpr double kExpectedRate = 3.5;
constexpr double kMaxPitchSweepRate = 0.9;  // deg/s, below the slowest slew rate
constexpr double kMinWindowLen = 60.0;
constexpr double kMaxWindowLen = 180.0;
constexpr char kGeneratorVersion[] = "1.0.0";

const double kMmcByNt[4][3] = {
    {1024.0, 2048.0, 4096.0},  // NT = 50
    {2048.0, 4096.0, 6144.0},  // NT = 100
    {2048.0, 4096.0, 6144.0},  // NT = 150
    {4096.0, 6144.0, 8192.0},  // NT = 200
};

int nt_slot(int nt) {
  switch (nt) {
    case 50: return 0;
    case 100: return 1;
    case 150: return 2;
    case 200: return 3;
  }
  return -1;
}

double truncated_normal(std::mt19937_64& rng, double mean, double sd, double floor) {
  std::normal_distribution<double> dist(mean, sd);
  for (int i = 0; i < 100; ++i) {
    const double v = dist(rng);
    if (v >= floor) return v;
  }
  return floor;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void ScenarioConfig::validate() const {
  const int slot = nt_slot(nt);
  if (slot < 0) throw std::invalid_argument("NT must be one of 50, 100, 150, 200");
  if (st_s != 2000.0 && st_s != 4000.0 && st_s != 6000.0) {
    throw std::invalid_argument("ST must be one of 2000, 4000, 6000");
  }
  const auto& mmcs = kMmcByNt[slot];
  if (std::find(std::begin(mmcs), std::end(mmcs), mmc_units) == std::end(mmcs)) {
    throw std::invalid_argument("MMC not in the set matched to this NT");
  }
  if (prob_cloud != 0.1 && prob_cloud != 0.2 && prob_cloud != 0.3) {
    throw std::invalid_argument("prob_cloud must be one of 0.1, 0.2, 0.3");
  }
}

std::string ScenarioConfig::cell_name() const {
  return std::to_string(nt) + "_" + std::to_string(static_cast<int>(st_s)) + "_" +
         std::to_string(static_cast<int>(mmc_units)) + "_" + format_double(prob_cloud);
}

double gamma_sample(double mean, double shape, std::mt19937_64& rng) {
  if (!(mean > 0.0) || !(shape > 0.0)) {
    throw std::invalid_argument("gamma_sample: mean and shape must be positive");
  }
  std::gamma_distribution<double> dist(shape, mean / shape);
  return dist(rng);
}

Instance generate_random_instance(int nt, double st_s, double mmc_units,
                                  std::uint64_t seed) {
  if (nt <= 0) throw std::invalid_argument("generate_random_instance: NT must be positive");
  auto rng = make_rng(seed);
  Instance inst;
  inst.st_s = st_s;
  inst.mmc_units = mmc_units;
  inst.expected_rate_units_per_s = kExpectedRate;
  inst.transition = default_transition_model();
  inst.attitude_bound_deg = kAttitudeBoundDeg;
  inst.tasks.reserve(static_cast<std::size_t>(nt));

  std::uniform_real_distribution<double> roll_dist(-kAttitudeBoundDeg, kAttitudeBoundDeg);
  for (int i = 0; i < nt; ++i) {
    Task task;
    task.id = i;
    task.du_s = truncated_normal(rng, 25.0, 3.0, 5.0);
    task.expected_profit = truncated_normal(rng, 2.0 * task.du_s, 10.0, 1.0);

    const double min_len = std::max(task.du_s + 10.0, kMinWindowLen);
    std::uniform_real_distribution<double> len_dist(min_len, kMaxWindowLen);
    const double len = len_dist(rng);
    std::uniform_real_distribution<double> ws_dist(0.0, st_s - len);
    task.ws_s = ws_dist(rng);
    task.we_s = task.ws_s + len;

    // Over-flight geometry: pitch sweeps the full range downward across the
    // window, roll constant, yaw zero.
    const double sweep_rate = 2.0 * kAttitudeBoundDeg / len;
    assert(sweep_rate <= kMaxPitchSweepRate + 1e-12);
    task.profile.pitch = {kAttitudeBoundDeg, -sweep_rate};
    task.profile.roll = {roll_dist(rng), 0.0};
    task.profile.yaw = {0.0, 0.0};

    inst.tasks.push_back(task);
  }
  inst.refresh_max_transition_time();
  inst.validate();
  return inst;
}

Instance generate_instance(const ScenarioConfig& config) {
  config.validate();
  return generate_random_instance(config.nt, config.st_s, config.mmc_units, config.seed);
}

EnvironmentRealization sample_environment(const Instance& instance, double prob_cloud,
                                          std::uint64_t seed) {
  if (prob_cloud < 0.0 || prob_cloud > 1.0) {
    throw std::invalid_argument("sample_environment: prob_cloud outside [0, 1]");
  }
  auto rng = make_rng(seed);
  EnvironmentRealization env;
  env.seed = seed;
  const std::size_t n = instance.task_count();
  env.actual_profit.reserve(n);
  env.actual_rate_units_per_s.reserve(n);
  env.visible.reserve(n);
  std::bernoulli_distribution covered(prob_cloud);
  for (const Task& task : instance.tasks) {
    env.actual_profit.push_back(gamma_sample(task.expected_profit, 30.0, rng));
    env.actual_rate_units_per_s.push_back(
        gamma_sample(instance.expected_rate_units_per_s, 350.0, rng));
    env.visible.push_back(covered(rng) ? 0 : 1);
  }
  return env;
}

BenchmarkProfile full_profile() {
  BenchmarkProfile p;
  p.name = "full";
  for (int nt : {50, 100, 150, 200}) {
    for (double st : {2000.0, 4000.0, 6000.0}) {
      for (double mmc : kMmcByNt[nt_slot(nt)]) {
        for (double cloud : {0.1, 0.2, 0.3}) {
          p.cells.push_back({nt, st, mmc, cloud});
        }
      }
    }
  }
  p.train_count = 100;
  p.valid_count = 20;
  p.test_count = 20;
  p.train_envs = 1;
  p.valid_envs = 5;
  p.test_envs = 5;
  p.gphh_seeds = 5;
  return p;
}

BenchmarkProfile desk_profile() {
  BenchmarkProfile p;
  p.name = "desk";
  for (double st : {2000.0, 4000.0, 6000.0}) {
    for (double mmc : kMmcByNt[0]) {
      p.cells.push_back({50, st, mmc, 0.2});
    }
  }
  p.train_count = 20;
  p.valid_count = 10;
  p.test_count = 10;
  p.train_envs = 1;
  p.valid_envs = 3;
  p.test_envs = 5;
  p.gphh_seeds = 3;
  return p;
}

namespace {

struct SplitPlan {
  const char* name;
  std::uint64_t tag;
  int instances;
  int envs;
};

}  // namespace

void generate_benchmark(std::uint64_t master_seed, const BenchmarkProfile& profile,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root = fs::path(out_dir) / "bench";
  fs::create_directories(root);

  nlohmann::json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["generator_version"] = kGeneratorVersion;
  manifest["profile"] = profile.name;
  manifest["master_seed"] = master_seed;
  manifest["counts"] = {{"train", profile.train_count},
                        {"valid", profile.valid_count},
                        {"test", profile.test_count}};
  manifest["env_counts"] = {{"train", profile.train_envs},
                            {"valid", profile.valid_envs},
                            {"test", profile.test_envs}};
  manifest["gphh_seeds"] = profile.gphh_seeds;
  manifest["cells"] = nlohmann::json::array();

  for (const GridCell& cell : profile.cells) {
    ScenarioConfig config{cell.nt, cell.st_s, cell.mmc_units, cell.prob_cloud, 0};
    config.validate();
    const std::string name = config.cell_name();
    const fs::path cell_dir = root / name;
    if (fs::exists(cell_dir)) {
      throw std::runtime_error("generate_benchmark: refusing to overwrite " +
                               cell_dir.string());
    }
    const std::uint64_t cell_base =
        derive_seed(master_seed,
                    {static_cast<std::uint64_t>(cell.nt),
                     static_cast<std::uint64_t>(cell.st_s),
                     static_cast<std::uint64_t>(cell.mmc_units),
                     static_cast<std::uint64_t>(std::lround(cell.prob_cloud * 100.0))});

    nlohmann::json cell_json;
    cell_json["name"] = name;
    cell_json["nt"] = cell.nt;
    cell_json["st_s"] = cell.st_s;
    cell_json["mmc_units"] = cell.mmc_units;
    cell_json["prob_cloud"] = cell.prob_cloud;

    const SplitPlan splits[] = {
        {"train", 0, profile.train_count, profile.train_envs},
        {"valid", 1, profile.valid_count, profile.valid_envs},
        {"test", 2, profile.test_count, profile.test_envs},
    };
    for (const SplitPlan& split : splits) {
      const fs::path split_dir = cell_dir / split.name;
      fs::create_directories(split_dir);
      nlohmann::json seeds_json = nlohmann::json::array();
      for (int i = 0; i < split.instances; ++i) {
        config.seed = derive_seed(cell_base, {split.tag, static_cast<std::uint64_t>(i), 0});
        Instance inst = generate_instance(config);
        save_instance((split_dir / ("instance_" + std::to_string(i) + ".json")).string(),
                      inst);
        std::vector<EnvironmentRealization> envs;
        nlohmann::json env_seeds = nlohmann::json::array();
        for (int j = 0; j < split.envs; ++j) {
          const std::uint64_t env_seed = derive_seed(
              cell_base,
              {split.tag, static_cast<std::uint64_t>(i), 1 + static_cast<std::uint64_t>(j)});
          envs.push_back(sample_environment(inst, cell.prob_cloud, env_seed));
          env_seeds.push_back(env_seed);
        }
        save_envs((split_dir / ("envs_" + std::to_string(i) + ".json")).string(), envs);
        seeds_json.push_back({{"instance_seed", config.seed}, {"env_seeds", env_seeds}});
      }
      cell_json["splits"][split.name] = seeds_json;
    }
    manifest["cells"].push_back(cell_json);
  }

  write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace uaeoss
