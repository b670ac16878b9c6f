#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rlab/core.hpp"
#include "rlab/judge.hpp"
#include "rlab/quality.hpp"
#include "rlab/integration.hpp"

// Self-distillation rounds: score samples, derive per-sample repetition
// penalties, generate penalty-controlled reasoning chains, verify answers
// with the judge, and revise chains that conclude wrongly.

namespace rlab {

struct Generation {
  std::string think;
  std::string final_response;
  int chain_tokens = 0;
};

struct GeneratorInterface {
  virtual ~GeneratorInterface() = default;
  // penalty divides the logits of already-emitted tokens, so larger values
  // shorten chains; the chain is truncated at max_tokens.
  virtual Generation generate(const Sample& s, double penalty, int max_tokens) const = 0;
};

// Seeded stochastic template generator over a small filler vocabulary.
// Answers are correct with the configured per-sample probability (decided
// by hash, so reruns agree); exists to make the penalty->length coupling
// and the verify/revise loop testable without any real model.
class ToyGenerator : public GeneratorInterface {
 public:
  explicit ToyGenerator(uint64_t seed, double accuracy = 0.7)
      : seed_(seed), accuracy_(accuracy) {}
  Generation generate(const Sample& s, double penalty, int max_tokens) const override;

  // True when the toy will answer this sample correctly.
  bool answers_correctly(const Sample& s) const;

 private:
  uint64_t seed_;
  double accuracy_;
};

enum class DistillVerdict { KeptOriginal, Revised };

struct DistillRecord {
  std::string sample_id;
  double penalty_used = 1.0;
  DistillVerdict verdict = DistillVerdict::KeptOriginal;
  int chain_tokens = 0;
};

struct ScoreOptions {
  IntegrationMode integration = IntegrationMode::Judge;
  std::string base_dir = ".";  // image refs resolve against this
  int max_threads = 4;
  ClarityParams clarity;
  VtiaRuleWeights rule_weights;
};

// (sample id, error message) pairs for samples that could not be processed.
using FailureList = std::vector<std::pair<std::string, std::string>>;

struct ScoreResult {
  Dataset dataset;  // all input samples; failed ones keep their old bundle state
  FailureList failures;
};

// Fills ScoreBundles (clarity/necessity/text criteria/integration and the
// s_v/s_t/s_i aggregates) for samples lacking them. Already-scored samples
// pass through untouched.
ScoreResult score_dataset(const Dataset& ds, const JudgeBackend& judge,
                          const ScoreOptions& opts = {});

// Normalizes scores and writes s_*_hat plus penalty. Normalization runs
// per cfg.batch_size slice in dataset order, or over the whole dataset
// when global_stats is set. Throws if any sample is unscored.
Dataset apply_penalties(const Dataset& ds, const PipelineConfig& cfg, bool global_stats = false);

// Penalty-controlled generation for one sample. Requires 1 <= P <= cap.
Generation generate_with_penalty(const GeneratorInterface& gen, const Sample& s, double penalty,
                                 const PipelineConfig& cfg);

// Keeps the generated chain when the judge verifies the answer; otherwise
// swaps in the judge's revised chain and a gold-concluding answer line,
// re-verifies once, and flags meta["revision_failed"] if still wrong.
std::pair<Sample, DistillRecord> verify_and_revise(const Sample& s, const Generation& generated,
                                                   const JudgeBackend& judge,
                                                   double penalty_used = 1.0);

struct DistillResult {
  Dataset dataset;
  std::vector<DistillRecord> records;
  FailureList failures;
};

// One full round: score (if needed) -> penalties (if needed) -> generate ->
// verify/revise. Every input sample appears in the output exactly once, in
// input order; failed samples pass through unchanged and are listed.
DistillResult distill_round(const Dataset& ds, const GeneratorInterface& gen,
                            const JudgeBackend& judge, const PipelineConfig& cfg,
                            const ScoreOptions& opts = {});

// Sidecar serialization of DistillRecords (one JSON object per line).
std::string records_to_jsonl(const std::vector<DistillRecord>& records);

}  // namespace rlab
