#include "uaeoss/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace uaeoss {

namespace {

using nlohmann::json;

json task_to_json(const Task& t) {
  return json{{"id", t.id},
              {"ws_s", t.ws_s},
              {"we_s", t.we_s},
              {"du_s", t.du_s},
              {"expected_profit", t.expected_profit},
              {"pitch_start_deg", t.profile.pitch.start_deg},
              {"pitch_rate_deg_per_s", t.profile.pitch.rate_deg_per_s},
              {"roll_start_deg", t.profile.roll.start_deg},
              {"roll_rate_deg_per_s", t.profile.roll.rate_deg_per_s},
              {"yaw_start_deg", t.profile.yaw.start_deg},
              {"yaw_rate_deg_per_s", t.profile.yaw.rate_deg_per_s}};
}

Task task_from_json(const json& j) {
  Task t;
  t.id = j.at("id").get<int>();
  t.ws_s = j.at("ws_s").get<double>();
  t.we_s = j.at("we_s").get<double>();
  t.du_s = j.at("du_s").get<double>();
  t.expected_profit = j.at("expected_profit").get<double>();
  t.profile.pitch = {j.at("pitch_start_deg").get<double>(),
                     j.at("pitch_rate_deg_per_s").get<double>()};
  t.profile.roll = {j.at("roll_start_deg").get<double>(),
                    j.at("roll_rate_deg_per_s").get<double>()};
  t.profile.yaw = {j.at("yaw_start_deg").get<double>(),
                   j.at("yaw_rate_deg_per_s").get<double>()};
  return t;
}

void check_schema(const json& j, const char* what) {
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::runtime_error(std::string(what) + ": unsupported schema version");
  }
}

}  // namespace

std::string instance_to_json(const Instance& instance) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["st_s"] = instance.st_s;
  j["mmc_units"] = instance.mmc_units;
  j["expected_rate_units_per_s"] = instance.expected_rate_units_per_s;
  j["attitude_bound_deg"] = instance.attitude_bound_deg;
  json segs = json::array();
  for (const auto& s : instance.transition.segments) {
    json seg{{"a_s", s.a_s}, {"v_deg_per_s", s.v_deg_per_s}, {"lo_deg", s.lo_deg}};
    if (std::isfinite(s.hi_deg)) seg["hi_deg"] = s.hi_deg;
    segs.push_back(seg);
  }
  j["transition_segments"] = segs;
  json tasks = json::array();
  for (const auto& t : instance.tasks) tasks.push_back(task_to_json(t));
  j["tasks"] = tasks;
  return j.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
  const json j = json::parse(text);
  check_schema(j, "instance");
  Instance inst;
  inst.st_s = j.at("st_s").get<double>();
  inst.mmc_units = j.at("mmc_units").get<double>();
  inst.expected_rate_units_per_s = j.at("expected_rate_units_per_s").get<double>();
  inst.attitude_bound_deg = j.at("attitude_bound_deg").get<double>();
  for (const auto& seg : j.at("transition_segments")) {
    TransitionSegment s;
    s.a_s = seg.at("a_s").get<double>();
    s.v_deg_per_s = seg.at("v_deg_per_s").get<double>();
    s.lo_deg = seg.at("lo_deg").get<double>();
    s.hi_deg = seg.contains("hi_deg") ? seg.at("hi_deg").get<double>()
                                      : std::numeric_limits<double>::infinity();
    inst.transition.segments.push_back(s);
  }
  for (const auto& t : j.at("tasks")) inst.tasks.push_back(task_from_json(t));
  inst.refresh_max_transition_time();
  inst.validate();
  return inst;
}

std::string envs_to_json(const std::vector<EnvironmentRealization>& envs) {
  json j;
  j["schema_version"] = kSchemaVersion;
  json arr = json::array();
  for (const auto& env : envs) {
    json visible = json::array();
    for (auto v : env.visible) visible.push_back(v != 0);
    arr.push_back({{"seed", env.seed},
                   {"actual_profit", env.actual_profit},
                   {"actual_rate_units_per_s", env.actual_rate_units_per_s},
                   {"visible", visible}});
  }
  j["realizations"] = arr;
  return j.dump(2) + "\n";
}

std::vector<EnvironmentRealization> envs_from_json(const std::string& text) {
  const json j = json::parse(text);
  check_schema(j, "environments");
  std::vector<EnvironmentRealization> envs;
  for (const auto& e : j.at("realizations")) {
    EnvironmentRealization env;
    env.seed = e.at("seed").get<std::uint64_t>();
    env.actual_profit = e.at("actual_profit").get<std::vector<double>>();
    env.actual_rate_units_per_s = e.at("actual_rate_units_per_s").get<std::vector<double>>();
    for (const auto& v : e.at("visible")) env.visible.push_back(v.get<bool>() ? 1 : 0);
    envs.push_back(std::move(env));
  }
  return envs;
}

std::string schedule_to_json(const StoredSchedule& stored) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["instance_path"] = stored.instance_path;
  j["env_index"] = stored.env_index;
  j["policy_label"] = stored.policy_label;
  j["status"] = stored.schedule.status == ScheduleStatus::Completed ? "completed"
                                                                    : "imaging_failure";
  if (stored.schedule.status == ScheduleStatus::ImagingFailure) {
    j["failure_index"] = stored.schedule.failure_index;
  }
  j["realized_profit"] = stored.schedule.realized_profit;
  j["memory_used_units"] = stored.schedule.memory_used_units;
  json obs = json::array();
  for (const auto& o : stored.schedule.observations) {
    obs.push_back({{"task_id", o.task_id}, {"os_s", o.os_s}, {"oe_s", o.oe_s}});
  }
  j["observations"] = obs;
  return j.dump(2) + "\n";
}

StoredSchedule schedule_from_json(const std::string& text) {
  const json j = json::parse(text);
  check_schema(j, "schedule");
  StoredSchedule stored;
  stored.instance_path = j.at("instance_path").get<std::string>();
  stored.env_index = j.at("env_index").get<int>();
  stored.policy_label = j.at("policy_label").get<std::string>();
  const std::string status = j.at("status").get<std::string>();
  if (status == "completed") {
    stored.schedule.status = ScheduleStatus::Completed;
  } else if (status == "imaging_failure") {
    stored.schedule.status = ScheduleStatus::ImagingFailure;
    stored.schedule.failure_index = j.at("failure_index").get<std::size_t>();
  } else {
    throw std::runtime_error("schedule: unknown status '" + status + "'");
  }
  stored.schedule.realized_profit = j.at("realized_profit").get<double>();
  stored.schedule.memory_used_units = j.at("memory_used_units").get<double>();
  for (const auto& o : j.at("observations")) {
    stored.schedule.observations.push_back({o.at("task_id").get<int>(),
                                            o.at("os_s").get<double>(),
                                            o.at("oe_s").get<double>()});
  }
  return stored;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void save_instance(const std::string& path, const Instance& instance) {
  write_text_file(path, instance_to_json(instance));
}

Instance load_instance(const std::string& path) {
  return instance_from_json(read_text_file(path));
}

void save_envs(const std::string& path, const std::vector<EnvironmentRealization>& envs) {
  write_text_file(path, envs_to_json(envs));
}

std::vector<EnvironmentRealization> load_envs(const std::string& path) {
  return envs_from_json(read_text_file(path));
}

void save_schedule(const std::string& path, const StoredSchedule& stored) {
  write_text_file(path, schedule_to_json(stored));
}

StoredSchedule load_schedule(const std::string& path) {
  return schedule_from_json(read_text_file(path));
}

namespace {

std::vector<InstanceData> load_split(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<InstanceData> out;
  if (!fs::exists(dir)) return out;
  for (int i = 0;; ++i) {
    const fs::path inst_path = dir / ("instance_" + std::to_string(i) + ".json");
    if (!fs::exists(inst_path)) break;
    InstanceData data;
    data.instance = load_instance(inst_path.string());
    data.envs = load_envs((dir / ("envs_" + std::to_string(i) + ".json")).string());
    out.push_back(std::move(data));
  }
  return out;
}

}  // namespace

CellData load_cell(const std::string& cell_dir) {
  namespace fs = std::filesystem;
  CellData cell;
  cell.dir = cell_dir;
  cell.name = fs::path(cell_dir).filename().string();
  cell.train = load_split(fs::path(cell_dir) / "train");
  cell.valid = load_split(fs::path(cell_dir) / "valid");
  cell.test = load_split(fs::path(cell_dir) / "test");
  return cell;
}

std::vector<std::string> list_cells(const std::string& bench_dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> names;
  const fs::path root = fs::path(bench_dir) / "bench";
  if (!fs::exists(root)) return names;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace uaeoss
