#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlab/core.hpp"
#include "rlab/distill.hpp"

// Iterative dataset curation: reward-model thresholding with a rising tau
// schedule, error sets built from the previous model's extracted answers,
// their per-iteration union, and the full staged training loop over a
// pluggable trainer.

namespace rlab {

struct RewardModelInterface {
  virtual ~RewardModelInterface() = default;
  virtual int score(const Sample& s) const = 0;  // 0..5
};

// Deterministic hash-bucketed scores in 0..5; meta["rm_score"] overrides
// per sample.
class MockRewardModel : public RewardModelInterface {
 public:
  explicit MockRewardModel(uint64_t seed = 0) : seed_(seed) {}
  int score(const Sample& s) const override;

 private:
  uint64_t seed_;
};

struct ModelInterface {
  virtual ~ModelInterface() = default;
  virtual std::string respond(const Sample& s) const = 0;
  virtual std::unique_ptr<ModelInterface> train(const Dataset& ds, double learning_rate) const = 0;
  virtual std::string snapshot() const = 0;  // serialized state for checkpoints
};

// Softmax classifier over the answer strings seen in training data, with a
// per-sample logit row: train() runs one epoch of gradient steps pulling
// each row toward its gold answer, respond() samples an answer and wraps
// it in a think/answer template. Deterministic given (seed, state, sample).
class ToySftModel : public ModelInterface {
 public:
  explicit ToySftModel(uint64_t seed = 0);
  std::string respond(const Sample& s) const override;
  std::unique_ptr<ModelInterface> train(const Dataset& ds, double learning_rate) const override;
  std::string snapshot() const override;
  static std::unique_ptr<ToySftModel> restore(const std::string& snapshot);

  // Sampling probability the model assigns to the gold answer (diagnostic).
  double gold_probability(const Sample& s) const;

 private:
  uint64_t seed_ = 0;
  int generation_ = 0;
  std::vector<std::string> answers_;                         // raw representative per class
  std::vector<std::string> canon_;                           // normalized, parallel to answers_
  std::map<std::string, std::vector<double>> sample_logits_;  // sample id -> row
  int class_index(const std::string& gold) const;
};

// Answers correctly on a fixed, hash-chosen subset of samples; train() is
// a no-op. A test oracle with an inspectable miss rule.
class FixedAccuracyModel : public ModelInterface {
 public:
  FixedAccuracyModel(uint64_t seed, double accuracy) : seed_(seed), accuracy_(accuracy) {}
  std::string respond(const Sample& s) const override;
  std::unique_ptr<ModelInterface> train(const Dataset&, double) const override;
  std::string snapshot() const override;
  bool hits(const Sample& s) const;

 private:
  uint64_t seed_;
  double accuracy_;
};

struct IterationRecord {
  int t = 0;
  int tau = 0;
  size_t d_rm_size = 0;
  size_t error_size = 0;
  size_t d_t_size = 0;
  double learning_rate = 0.0;
  std::map<std::string, double> metrics;
};

nlohmann::json iteration_record_to_json(const IterationRecord& r);
IterationRecord iteration_record_from_json(const nlohmann::json& j);

// Samples with rm.score >= tau, input order preserved, score cached into
// each kept sample's rm_score field.
Dataset filter_by_reward(const Dataset& ds, const RewardModelInterface& rm, int tau);

// Samples whose extracted answer is absent or differs from the normalized
// gold. A respond() failure counts the sample as an error; messages go to
// failure_log when provided.
Dataset error_set(const Dataset& ds, const ModelInterface& model,
                  std::vector<std::string>* failure_log = nullptr);

// Union of the tau-filtered set and the previous model's error set,
// deduplicated by id, ordered by ds order. When rm_source is non-null the
// reward filter runs over it instead of ds (ids must match); the union's
// sample content always comes from ds.
std::pair<Dataset, IterationRecord> build_iteration_dataset(
    const Dataset& ds, const RewardModelInterface& rm, const ModelInterface& model_prev, int t,
    const PipelineConfig& cfg, const Dataset* rm_source = nullptr);

struct TrainerFactory {
  std::function<std::unique_ptr<ModelInterface>()> fresh;
  std::function<std::unique_ptr<ModelInterface>(const std::string& snapshot)> restore;
};

TrainerFactory make_toy_trainer_factory(uint64_t seed);

struct ScheduleOptions {
  std::string run_dir = "curate_run";
  bool resume = false;
  bool rm_on_original = false;     // threshold the original dataset, not refreshed chains
  bool initial_round_done = false;  // caller already ran the leading distill round
  int fail_after_stages = -1;       // test hook: abort once this many stages completed
  double sft_lr_scale = 1.0;
  ScoreOptions score;
};

// Full staged loop: leading distill round, initial training on the full
// dataset, then per iteration a fresh distill round, D_t assembly, and a
// training step. Writes datasets, model snapshots, and a manifest under
// run_dir; emits len(tau_schedule)+1 records (the initial stage is t=0).
// With resume set, stages already marked done in the manifest are loaded
// from their artifacts instead of recomputed.
std::vector<IterationRecord> run_hybrid_schedule(const Dataset& ds, const RewardModelInterface& rm,
                                                 const TrainerFactory& trainer,
                                                 const GeneratorInterface& gen,
                                                 const JudgeBackend& judge,
                                                 const PipelineConfig& cfg,
                                                 const ScheduleOptions& opts = {});

}  // namespace rlab
