#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlab/core.hpp"

// Run manifests: one JSON document per run directory recording the command
// line, the config snapshot, input/output hashes, per-stage status, and
// result records. Written atomically at every stage boundary so an aborted
// run can be resumed from its last completed stage.

namespace rlab {

struct StageStatus {
  std::string name;
  std::string status;  // running | done | failed
  std::vector<std::string> artifacts;  // paths relative to the run directory
  std::map<std::string, std::string> hashes;
  std::string error;
  int64_t started_ms = 0;
  int64_t finished_ms = 0;
};

struct RunManifest {
  std::string command_line;
  PipelineConfig config;
  std::map<std::string, std::string> input_hashes;
  std::vector<StageStatus> stages;
  nlohmann::json records = nlohmann::json::array();

  StageStatus* find_stage(const std::string& name);
  const StageStatus* find_stage(const std::string& name) const;
  bool stage_done(const std::string& name) const;

  StageStatus& begin_stage(const std::string& name);
  void finish_stage(const std::string& name, std::vector<std::string> artifacts = {},
                    std::map<std::string, std::string> hashes = {});
  void fail_stage(const std::string& name, const std::string& error);

  // FNV hash of the manifest content with wall-clock timings excluded, so
  // two identical runs hash equal regardless of speed.
  std::string content_hash() const;

  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

int64_t wall_clock_ms();

}  // namespace rlab
