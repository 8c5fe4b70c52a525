#pragma once

#include <string>
#include <vector>

#include "uaeoss/core.hpp"

namespace uaeoss {

/// An instance with its sampled environment realizations.
struct InstanceData {
  Instance instance;
  std::vector<EnvironmentRealization> envs;
};

/// One benchmark cell loaded from disk.
struct CellData {
  std::string name;
  std::string dir;
  std::vector<InstanceData> train;
  std::vector<InstanceData> valid;
  std::vector<InstanceData> test;
};

/// A schedule stored with enough provenance to re-validate it offline.
struct StoredSchedule {
  Schedule schedule;
  std::string instance_path;  // relative to the schedule file's directory
  int env_index = 0;
  std::string policy_label;
};

// Schema version written into every file this library produces.
inline constexpr int kSchemaVersion = 1;

std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

std::string envs_to_json(const std::vector<EnvironmentRealization>& envs);
std::vector<EnvironmentRealization> envs_from_json(const std::string& text);

std::string schedule_to_json(const StoredSchedule& stored);
StoredSchedule schedule_from_json(const std::string& text);

void save_instance(const std::string& path, const Instance& instance);
Instance load_instance(const std::string& path);

void save_envs(const std::string& path, const std::vector<EnvironmentRealization>& envs);
std::vector<EnvironmentRealization> load_envs(const std::string& path);

void save_schedule(const std::string& path, const StoredSchedule& stored);
StoredSchedule load_schedule(const std::string& path);

/// Loads train/valid/test splits from a benchmark cell directory.
CellData load_cell(const std::string& cell_dir);

/// Names of the cell directories under a benchmark root, sorted.
std::vector<std::string> list_cells(const std::string& bench_dir);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace uaeoss
