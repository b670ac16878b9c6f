#pragma once

#include <string>

#include <json.hpp>

#include "rlab/core.hpp"

// JSONL persistence and config files.
//
// Dataset schema (one UTF-8 JSON object per line): required keys `id`,
// `question`, `gold_answer`; optional `image`, `think`, `final_response`,
// `scores`, `rm_score`, `meta`. Keys are emitted sorted, so serialization
// is byte-stable for equal inputs.
//
// Config files are flat JSON objects whose keys are exactly the
// PipelineConfig field names; unknown keys are rejected.

namespace rlab {

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// In-memory forms of the same schema, used for hashing and tests.
std::string dataset_to_jsonl(const Dataset& ds);
Dataset dataset_from_jsonl(const std::string& text, const std::string& origin = "<memory>");

std::string sample_to_json_line(const Sample& s);

// FNV-1a over the canonical JSONL serialization.
uint64_t dataset_hash(const Dataset& ds);

PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& cfg, const std::string& path);

nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j, const std::string& origin);

std::string slurp_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace rlab
