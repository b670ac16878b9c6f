#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rlab/core.hpp"

// Synthetic adapter-transfer lab: train a small MLP to map random "vision"
// features onto a substitute linear target space, then measure how well
// those weights carry over to a structurally similar reasoning space whose
// generating map differs by a controlled rotation-plus-perturbation.

namespace rlab {

// Row-major matrix, minimal on purpose: the only consumers are the
// two-layer adapter and its tests.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

Mat matmul(const Mat& x, const Mat& y);
double frobenius(const Mat& m);

struct SpaceConfig {
  int n = 256;          // feature rows
  int d_v = 32;         // vision dimension
  int d_l = 32;         // language dimension
  double noise = 0.01;  // target noise scale
  double similarity = 0.1;
  uint64_t seed = 0;
};

struct SyntheticSpaces {
  SpaceConfig cfg;
  Mat vision_feats;        // n x d_v
  Mat substitute_map;      // d_v x d_l
  Mat reasoning_map;       // substitute_map rotated + perturbed by similarity
  Mat substitute_targets;  // vision_feats * substitute_map + noise
  Mat reasoning_targets;   // vision_feats * reasoning_map + same noise draw
};

// Deterministic given cfg.seed. similarity 0 makes both maps (and hence
// both target matrices) bit-identical; the rotation and perturbation parts
// each get similarity/sqrt(2) of the Frobenius budget, so the total
// relative map difference equals similarity exactly.
SyntheticSpaces make_spaces(const SpaceConfig& cfg);

enum class TargetSpace { Substitute, Reasoning };

// d_v -> hidden -> d_l with tanh, trained by full-batch gradient descent
// on mean squared error with hand-derived gradients.
struct AdapterMLP {
  Mat w1;  // d_v x hidden
  std::vector<double> b1;
  Mat w2;  // hidden x d_l
  std::vector<double> b2;

  static AdapterMLP init(int d_v, int hidden, int d_l, uint64_t seed);
  Mat forward(const Mat& x) const;

  // Flat parameter views for the finite-difference gradient check.
  std::vector<double> flat_params() const;
  void set_flat_params(const std::vector<double>& p);
};

double mse_loss(const Mat& pred, const Mat& target);

// Analytic gradient of mse_loss(adapter.forward(x), target) in flat layout.
std::vector<double> loss_gradient(const AdapterMLP& adapter, const Mat& x, const Mat& target);

struct TrainResult {
  AdapterMLP adapter;
  std::vector<double> loss_curve;  // loss_curve[0] is the initial loss
};

constexpr double kAdapterDefaultLr = 5.0;
constexpr int kAdapterDefaultHidden = 64;

// Full-batch descent for `steps` steps; aborts with a diagnostic once the
// loss passes 1e6.
TrainResult train_adapter(const SyntheticSpaces& spaces, TargetSpace target,
                          const AdapterMLP& init, int steps, double lr = kAdapterDefaultLr);

struct TransferReport {
  double zero_shot_transferred = 0.0;  // reasoning-space loss of the pretrained adapter
  double zero_shot_fresh = 0.0;        // reasoning-space loss of a fresh init
  std::optional<double> finetuned_transferred;  // after `budget` steps from the pretrained weights
  std::optional<double> fresh_final;            // after the same budget from the fresh init
  int budget = 0;
  double similarity = 0.0;
};

// theta_pretrained must come from Substitute-space training. budget 0
// reports only the zero-shot entries.
TransferReport transfer_eval(const AdapterMLP& theta_pretrained, const SyntheticSpaces& spaces,
                             int budget, double lr = kAdapterDefaultLr);

std::string transfer_report_csv(const std::vector<TransferReport>& reports);

}  // namespace rlab
