#pragma once

#include <string>
#include <vector>

#include "rlab/core.hpp"

// Group-relative policy gradient at desk scale: a softmax policy over a
// fixed candidate-completion set per prompt, rule-based accuracy/format
// rewards, group-standardized advantages, and REINFORCE updates with an
// optional KL pull toward a reference policy.

namespace rlab {

// Per-prompt categorical policy over K candidate completions.
struct ToyPolicy {
  std::vector<std::vector<double>> logits;  // [prompt][candidate]

  static ToyPolicy uniform(int num_prompts, int k);
  int num_prompts() const { return static_cast<int>(logits.size()); }
  int k() const { return logits.empty() ? 0 : static_cast<int>(logits[0].size()); }

  // softmax(logits/temperature); sums to 1.
  std::vector<double> probs(int prompt, double temperature) const;
};

struct RolloutGroup {
  int prompt_index = 0;
  std::vector<int> completions;  // G sampled candidate indices
  std::vector<double> rewards;
  std::vector<double> advantages;
};

// 1 iff the completion has a non-empty think segment followed by an
// `Answer:` line with one balanced box.
int format_reward(const std::string& completion);

// 1 iff the boxed answer extracts and matches the gold after normalization.
int accuracy_reward(const std::string& completion, const std::string& gold);

// (r - mean)/std_pop per element; all zeros when the rewards are constant.
std::vector<double> group_advantages(const std::vector<double>& rewards);

// Prompts with fixed candidate completions; rewards are recomputed from
// the candidate text, so exactly the well-formed-and-correct ones pay.
struct CandidateTask {
  std::vector<std::string> prompts;
  std::vector<std::string> golds;
  std::vector<std::vector<std::string>> candidates;  // [prompt][K]
};

// Bundled arithmetic task: K candidates per prompt, exactly one of which
// is both correctly boxed and well-formatted (reward 2); candidate order
// is seed-shuffled per prompt.
CandidateTask make_arithmetic_task(int num_prompts = 16, int k = 8, uint64_t seed = 0);

// Same candidate construction over an existing dataset's question/gold
// pairs (used by the end-to-end pipeline).
CandidateTask task_from_dataset(const Dataset& ds, int k = 8, uint64_t seed = 0);

// Fixed-sample surrogate objective: sum over groups of
//   sum_i A_i * log pi(o_i | prompt)  -  kl_coeff * KL(pi || ref)
// Used by the finite-difference gradient check.
double grpo_objective(const ToyPolicy& policy, const ToyPolicy& ref,
                      const std::vector<RolloutGroup>& groups, const PipelineConfig& cfg,
                      double kl_coeff);

// One ascent step on grpo_objective's analytic gradient.
ToyPolicy grpo_step(const ToyPolicy& policy, const ToyPolicy& ref,
                    const std::vector<RolloutGroup>& groups, const PipelineConfig& cfg,
                    double kl_coeff);

struct GrpoOptions {
  int steps = 500;
  double kl_coeff = 0.01;
  uint64_t seed = 0;
};

struct GrpoStepMetrics {
  int step = 0;
  double mean_reward = 0.0;
  double mean_acc = 0.0;
  double mean_fmt = 0.0;
  double kl = 0.0;
  double mean_len = 0.0;  // mean token count of sampled completions
};

struct GrpoResult {
  ToyPolicy policy;
  std::vector<GrpoStepMetrics> metrics;
};

// Sample G completions per prompt, reward, standardize, step; repeat.
// Deterministic given opts.seed.
GrpoResult train_grpo(const CandidateTask& task, const PipelineConfig& cfg,
                      const GrpoOptions& opts = {});

// "step,mean_reward,mean_acc,mean_fmt,kl,mean_len" CSV.
std::string metrics_to_csv(const std::vector<GrpoStepMetrics>& metrics);

}  // namespace rlab
