#pragma once

#include <vector>

#include "rlab/core.hpp"

// Reasoning-length control: per-batch min-max normalization of the three
// quality scores and the repetition-penalty map
//
//   P = min(cap, exp(alpha * (1 - (s_v_hat + beta*s_t_hat + gamma*s_i_hat)
//                                 / (1 + beta + gamma))))
//
// Higher scores give lower P, which lets generations run longer.

namespace rlab {

struct NormalizedScores {
  double s_v_hat = 0.0;
  double s_t_hat = 0.0;
  double s_i_hat = 0.0;
};

// Channel-wise (x - min)/(max - min) over the batch; a constant channel
// maps everywhere to 0.5. Output order matches input order. Throws on an
// empty batch.
std::vector<NormalizedScores> normalize_scores(const std::vector<ScoreBundle>& batch);

double repetition_penalty(const NormalizedScores& n, const PipelineConfig& cfg);

}  // namespace rlab
