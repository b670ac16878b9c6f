#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-sample quality scores. clarity is computed locally from the image;
// the integer criteria come from the judge on a 0..5 scale. The aggregates
// are s_v = (5*clarity + necessity)/2 and s_t = mean of the three text
// criteria, both in [0,5]. Normalized fields and the penalty are filled in
// by the length controller over a batch.
struct ScoreBundle {
  double clarity = 0.0;
  int necessity = 0;
  int question_quality = 0;
  int difficulty = 0;
  int reasoning_demand = 0;
  double s_v = 0.0;
  double s_t = 0.0;
  double s_i = 0.0;
  std::optional<double> s_v_hat;
  std::optional<double> s_t_hat;
  std::optional<double> s_i_hat;
  std::optional<double> penalty;

  bool operator==(const ScoreBundle&) const = default;
};

// One image-text-answer record. think holds the bare reasoning-chain body;
// the <think>...</think> wrapping is applied only when rendering a full
// completion text.
struct Sample {
  std::string id;
  std::optional<std::string> image_ref;
  std::string question;
  std::string gold_answer;
  std::optional<std::string> think;
  std::optional<std::string> final_response;
  std::map<std::string, std::string> meta;
  std::optional<ScoreBundle> scores;
  std::optional<int> rm_score;

  bool operator==(const Sample&) const = default;
};

// Ordered sample container. Ids are unique; iteration order is insertion
// order. provenance records which stage produced the dataset and is run
// metadata, not part of value equality.
struct Dataset {
  std::vector<Sample> samples;
  std::string provenance;

  // Throws on duplicate id.
  void append(Sample s);
  const Sample* find(const std::string& id) const;
  size_t size() const { return samples.size(); }

  bool operator==(const Dataset& other) const { return samples == other.samples; }
};

struct PipelineConfig {
  double alpha = std::log(2.0);
  double beta = 1.0;
  double gamma = 1.0;
  double penalty_cap = 2.0;
  std::vector<int> tau_schedule = {2, 3, 4, 5};
  int group_size = 8;
  double rl_temperature = 1.0;
  double rl_learning_rate = 1e-6;
  int max_completion_tokens = 8192;
  int sft_context_length = 16384;
  double weight_decay = 0.05;
  double warmup_ratio = 0.03;
  int batch_size = 512;
  uint64_t seed = 0;

  bool operator==(const PipelineConfig&) const = default;
};

// Empty iff every config invariant holds; otherwise one human-readable
// violation per failed invariant.
std::vector<std::string> validate_config(const PipelineConfig& cfg);

// Throws Error listing all violations when the config is invalid.
void require_valid(const PipelineConfig& cfg);

// "<think>...</think>\n" + final_response. Samples without a chain render
// as the bare final response.
std::string render_completion(const Sample& s);

// Runs fn(i) for i in [0,n) on up to max_threads workers. fn must not
// throw; callers record per-item failures themselves. Results written by
// index are deterministic regardless of scheduling.
void for_each_parallel(size_t n, int max_threads, const std::function<void(size_t)>& fn);

}  // namespace rlab
