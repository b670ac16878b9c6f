#include "rlab/jsonl.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rlab/hash.hpp"

namespace rlab {

using nlohmann::json;

namespace {

json bundle_to_json(const ScoreBundle& b) {
  json j;
  j["clarity"] = b.clarity;
  j["necessity"] = b.necessity;
  j["question_quality"] = b.question_quality;
  j["difficulty"] = b.difficulty;
  j["reasoning_demand"] = b.reasoning_demand;
  j["s_v"] = b.s_v;
  j["s_t"] = b.s_t;
  j["s_i"] = b.s_i;
  if (b.s_v_hat) j["s_v_hat"] = *b.s_v_hat;
  if (b.s_t_hat) j["s_t_hat"] = *b.s_t_hat;
  if (b.s_i_hat) j["s_i_hat"] = *b.s_i_hat;
  if (b.penalty) j["penalty"] = *b.penalty;
  return j;
}

int require_int_range(const json& j, const char* key, int lo, int hi) {
  if (!j.is_number_integer()) throw Error(std::string(key) + " must be an integer");
  int v = j.get<int>();
  if (v < lo || v > hi) {
    throw Error(std::string(key) + " out of range " + std::to_string(lo) + ".." + std::to_string(hi));
  }
  return v;
}

double require_real_range(const json& j, const char* key, double lo, double hi) {
  if (!j.is_number()) throw Error(std::string(key) + " must be a number");
  double v = j.get<double>();
  if (v < lo || v > hi) throw Error(std::string(key) + " out of range");
  return v;
}

ScoreBundle bundle_from_json(const json& j) {
  ScoreBundle b;
  if (j.contains("clarity")) b.clarity = require_real_range(j.at("clarity"), "scores.clarity", 0.0, 1.0);
  if (j.contains("necessity")) b.necessity = require_int_range(j.at("necessity"), "scores.necessity", 0, 5);
  if (j.contains("question_quality"))
    b.question_quality = require_int_range(j.at("question_quality"), "scores.question_quality", 0, 5);
  if (j.contains("difficulty")) b.difficulty = require_int_range(j.at("difficulty"), "scores.difficulty", 0, 5);
  if (j.contains("reasoning_demand"))
    b.reasoning_demand = require_int_range(j.at("reasoning_demand"), "scores.reasoning_demand", 0, 5);
  if (j.contains("s_v")) b.s_v = require_real_range(j.at("s_v"), "scores.s_v", 0.0, 5.0);
  if (j.contains("s_t")) b.s_t = require_real_range(j.at("s_t"), "scores.s_t", 0.0, 5.0);
  if (j.contains("s_i")) b.s_i = require_real_range(j.at("s_i"), "scores.s_i", 0.0, 5.0);
  if (j.contains("s_v_hat")) b.s_v_hat = require_real_range(j.at("s_v_hat"), "scores.s_v_hat", 0.0, 1.0);
  if (j.contains("s_t_hat")) b.s_t_hat = require_real_range(j.at("s_t_hat"), "scores.s_t_hat", 0.0, 1.0);
  if (j.contains("s_i_hat")) b.s_i_hat = require_real_range(j.at("s_i_hat"), "scores.s_i_hat", 0.0, 1.0);
  if (j.contains("penalty")) {
    double p = j.at("penalty").get<double>();
    if (!(p > 0.0)) throw Error("scores.penalty must be > 0");
    b.penalty = p;
  }
  return b;
}

json sample_to_json(const Sample& s) {
  json j;
  j["id"] = s.id;
  j["question"] = s.question;
  j["gold_answer"] = s.gold_answer;
  if (s.image_ref) j["image"] = *s.image_ref;
  if (s.think) j["think"] = *s.think;
  if (s.final_response) j["final_response"] = *s.final_response;
  if (s.scores) j["scores"] = bundle_to_json(*s.scores);
  if (s.rm_score) j["rm_score"] = *s.rm_score;
  if (!s.meta.empty()) j["meta"] = s.meta;
  return j;
}

Sample sample_from_json(const json& j) {
  if (!j.is_object()) throw Error("record is not a JSON object");
  Sample s;
  for (const char* key : {"id", "question", "gold_answer"}) {
    if (!j.contains(key) || !j.at(key).is_string()) {
      throw Error(std::string("missing or non-string required key '") + key + "'");
    }
  }
  s.id = j.at("id").get<std::string>();
  if (s.id.empty()) throw Error("id must be non-empty");
  s.question = j.at("question").get<std::string>();
  s.gold_answer = j.at("gold_answer").get<std::string>();
  if (j.contains("image")) s.image_ref = j.at("image").get<std::string>();
  if (j.contains("think")) {
    auto t = j.at("think").get<std::string>();
    if (t.empty()) throw Error("think, when present, must be non-empty");
    s.think = std::move(t);
  }
  if (j.contains("final_response")) s.final_response = j.at("final_response").get<std::string>();
  if (j.contains("scores")) s.scores = bundle_from_json(j.at("scores"));
  if (j.contains("rm_score")) s.rm_score = require_int_range(j.at("rm_score"), "rm_score", 0, 5);
  if (j.contains("meta")) {
    if (!j.at("meta").is_object()) throw Error("meta must be an object");
    for (auto& [k, v] : j.at("meta").items()) {
      if (!v.is_string()) throw Error("meta values must be strings");
      s.meta[k] = v.get<std::string>();
    }
  }
  return s;
}

}  // namespace

std::string sample_to_json_line(const Sample& s) { return sample_to_json(s).dump(); }

std::string dataset_to_jsonl(const Dataset& ds) {
  std::string out;
  for (const auto& s : ds.samples) {
    out += sample_to_json_line(s);
    out += '\n';
  }
  return out;
}

Dataset dataset_from_jsonl(const std::string& text, const std::string& origin) {
  Dataset ds;
  ds.provenance = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(origin + ": line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    Sample s;
    try {
      s = sample_from_json(j);
    } catch (const Error& e) {
      throw Error(origin + ": line " + std::to_string(line_no) + ": " + e.what());
    }
    if (ds.find(s.id) != nullptr) {
      throw Error(origin + ": line " + std::to_string(line_no) + ": duplicate id '" + s.id + "'");
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset load_dataset(const std::string& path) {
  return dataset_from_jsonl(slurp_file(path), path);
}

void save_dataset(const Dataset& ds, const std::string& path) {
  write_file_atomic(path, dataset_to_jsonl(ds));
}

uint64_t dataset_hash(const Dataset& ds) { return fnv1a64(dataset_to_jsonl(ds)); }

std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error("I/O error while reading '" + path + "'");
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("I/O error while writing '" + tmp + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

PipelineConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(slurp_file(path));
  } catch (const json::exception& e) {
    throw Error(path + ": malformed config: " + e.what());
  }
  return config_from_json(j, path);
}

PipelineConfig config_from_json(const json& j, const std::string& origin) {
  const std::string& path = origin;
  if (!j.is_object()) throw Error(path + ": config must be a JSON object");
  PipelineConfig cfg;
  std::vector<std::string> unknown;
  try {
    for (auto& [key, val] : j.items()) {
      if (key == "alpha") cfg.alpha = val.get<double>();
      else if (key == "beta") cfg.beta = val.get<double>();
      else if (key == "gamma") cfg.gamma = val.get<double>();
      else if (key == "penalty_cap") cfg.penalty_cap = val.get<double>();
      else if (key == "tau_schedule") cfg.tau_schedule = val.get<std::vector<int>>();
      else if (key == "group_size") cfg.group_size = val.get<int>();
      else if (key == "rl_temperature") cfg.rl_temperature = val.get<double>();
      else if (key == "rl_learning_rate") cfg.rl_learning_rate = val.get<double>();
      else if (key == "max_completion_tokens") cfg.max_completion_tokens = val.get<int>();
      else if (key == "sft_context_length") cfg.sft_context_length = val.get<int>();
      else if (key == "weight_decay") cfg.weight_decay = val.get<double>();
      else if (key == "warmup_ratio") cfg.warmup_ratio = val.get<double>();
      else if (key == "batch_size") cfg.batch_size = val.get<int>();
      else if (key == "seed") cfg.seed = val.get<uint64_t>();
      else unknown.push_back(key);
    }
  } catch (const json::exception& e) {
    throw Error(path + ": bad config value: " + e.what());
  }
  if (!unknown.empty()) {
    std::string msg = path + ": unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw Error(msg);
  }
  return cfg;
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  write_file_atomic(path, config_to_json(cfg).dump(2) + "\n");
}

json config_to_json(const PipelineConfig& cfg) {
  json j;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["gamma"] = cfg.gamma;
  j["penalty_cap"] = cfg.penalty_cap;
  j["tau_schedule"] = cfg.tau_schedule;
  j["group_size"] = cfg.group_size;
  j["rl_temperature"] = cfg.rl_temperature;
  j["rl_learning_rate"] = cfg.rl_learning_rate;
  j["max_completion_tokens"] = cfg.max_completion_tokens;
  j["sft_context_length"] = cfg.sft_context_length;
  j["weight_decay"] = cfg.weight_decay;
  j["warmup_ratio"] = cfg.warmup_ratio;
  j["batch_size"] = cfg.batch_size;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace rlab
