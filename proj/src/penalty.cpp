#include "rlab/penalty.hpp"

#include <algorithm>
#include <cmath>

namespace rlab {

namespace {

void normalize_channel(const std::vector<double>& xs, std::vector<double>& out) {
  auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  double lo = *lo_it, hi = *hi_it;
  out.resize(xs.size());
  if (hi == lo) {
    std::fill(out.begin(), out.end(), 0.5);
    return;
  }
  for (size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - lo) / (hi - lo);
}

}  // namespace

std::vector<NormalizedScores> normalize_scores(const std::vector<ScoreBundle>& batch) {
  if (batch.empty()) throw Error("cannot normalize an empty batch");
  std::vector<double> v(batch.size()), t(batch.size()), i(batch.size());
  for (size_t k = 0; k < batch.size(); ++k) {
    v[k] = batch[k].s_v;
    t[k] = batch[k].s_t;
    i[k] = batch[k].s_i;
  }
  std::vector<double> vh, th, ih;
  normalize_channel(v, vh);
  normalize_channel(t, th);
  normalize_channel(i, ih);
  std::vector<NormalizedScores> out(batch.size());
  for (size_t k = 0; k < batch.size(); ++k) out[k] = {vh[k], th[k], ih[k]};
  return out;
}

double repetition_penalty(const NormalizedScores& n, const PipelineConfig& cfg) {
  double weighted =
      (n.s_v_hat + cfg.beta * n.s_t_hat + cfg.gamma * n.s_i_hat) / (1.0 + cfg.beta + cfg.gamma);
  return std::min(cfg.penalty_cap, std::exp(cfg.alpha * (1.0 - weighted)));
}

}  // namespace rlab
