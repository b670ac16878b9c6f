#include "rlab/manifest.hpp"

#include <chrono>

#include "rlab/hash.hpp"
#include "rlab/jsonl.hpp"

namespace rlab {

using nlohmann::json;

namespace {

json stage_to_json(const StageStatus& st, bool with_timings) {
  json j;
  j["name"] = st.name;
  j["status"] = st.status;
  j["artifacts"] = st.artifacts;
  j["hashes"] = st.hashes;
  if (!st.error.empty()) j["error"] = st.error;
  if (with_timings) {
    j["started_ms"] = st.started_ms;
    j["finished_ms"] = st.finished_ms;
  }
  return j;
}

// for_hash drops the command line and timings: identical runs must hash
// equal even when launched from different output directories or at
// different speeds.
json manifest_to_json(const RunManifest& m, bool for_hash) {
  json j;
  if (!for_hash) j["command_line"] = m.command_line;
  j["config"] = config_to_json(m.config);
  j["inputs"] = m.input_hashes;
  j["stages"] = json::array();
  for (const StageStatus& st : m.stages) j["stages"].push_back(stage_to_json(st, !for_hash));
  j["records"] = m.records;
  return j;
}

}  // namespace

int64_t wall_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

StageStatus* RunManifest::find_stage(const std::string& name) {
  for (StageStatus& st : stages) {
    if (st.name == name) return &st;
  }
  return nullptr;
}

const StageStatus* RunManifest::find_stage(const std::string& name) const {
  for (const StageStatus& st : stages) {
    if (st.name == name) return &st;
  }
  return nullptr;
}

bool RunManifest::stage_done(const std::string& name) const {
  const StageStatus* st = find_stage(name);
  return st != nullptr && st->status == "done";
}

StageStatus& RunManifest::begin_stage(const std::string& name) {
  StageStatus* st = find_stage(name);
  if (st == nullptr) {
    stages.push_back(StageStatus{});
    st = &stages.back();
    st->name = name;
  }
  st->status = "running";
  st->error.clear();
  st->started_ms = wall_clock_ms();
  st->finished_ms = 0;
  return *st;
}

void RunManifest::finish_stage(const std::string& name, std::vector<std::string> artifacts,
                               std::map<std::string, std::string> hashes) {
  StageStatus* st = find_stage(name);
  if (st == nullptr) throw Error("finish_stage on unknown stage " + name);
  st->status = "done";
  st->artifacts = std::move(artifacts);
  st->hashes = std::move(hashes);
  st->finished_ms = wall_clock_ms();
}

void RunManifest::fail_stage(const std::string& name, const std::string& error) {
  StageStatus* st = find_stage(name);
  if (st == nullptr) st = &begin_stage(name);
  st->status = "failed";
  st->error = error;
  st->finished_ms = wall_clock_ms();
}

std::string RunManifest::content_hash() const {
  return to_hex(fnv1a64(manifest_to_json(*this, /*for_hash=*/true).dump()));
}

void RunManifest::save(const std::string& path) const {
  json j = manifest_to_json(*this, /*for_hash=*/false);
  j["content_hash"] = content_hash();
  write_file_atomic(path, j.dump(2) + "\n");
}

RunManifest RunManifest::load(const std::string& path) {
  json j;
  try {
    j = json::parse(slurp_file(path));
  } catch (const json::exception& e) {
    throw Error(path + ": malformed manifest: " + e.what());
  }
  RunManifest m;
  try {
    m.command_line = j.at("command_line").get<std::string>();
    m.config = config_from_json(j.at("config"), path);
    m.input_hashes = j.at("inputs").get<std::map<std::string, std::string>>();
    for (const json& sj : j.at("stages")) {
      StageStatus st;
      st.name = sj.at("name").get<std::string>();
      st.status = sj.at("status").get<std::string>();
      st.artifacts = sj.at("artifacts").get<std::vector<std::string>>();
      st.hashes = sj.at("hashes").get<std::map<std::string, std::string>>();
      if (sj.contains("error")) st.error = sj.at("error").get<std::string>();
      if (sj.contains("started_ms")) st.started_ms = sj.at("started_ms").get<int64_t>();
      if (sj.contains("finished_ms")) st.finished_ms = sj.at("finished_ms").get<int64_t>();
      m.stages.push_back(std::move(st));
    }
    m.records = j.value("records", json::array());
  } catch (const json::exception& e) {
    throw Error(path + ": manifest missing fields: " + e.what());
  }
  return m;
}

}  // namespace rlab
