#include "rlab/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rlab/hash.hpp"
#include "rlab/rng.hpp"

namespace rlab {

namespace {

Mat gaussian(int rows, int cols, double scale, Rng& rng) {
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.normal() * scale;
  return m;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

Mat matmul(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw Error("matmul shape mismatch");
  Mat out(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int k = 0; k < x.cols; ++k) {
      double v = x.at(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < y.cols; ++j) out.at(i, j) += v * y.at(k, j);
    }
  }
  return out;
}

double frobenius(const Mat& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

SyntheticSpaces make_spaces(const SpaceConfig& cfg) {
  if (cfg.n < 1 || cfg.d_v < 1 || cfg.d_l < 2) {
    throw Error("space dims must be positive (and d_l >= 2 for the rotation plane)");
  }
  if (cfg.similarity < 0.0 || cfg.similarity > 1.0) {
    throw Error("similarity must lie in [0,1]");
  }
  SyntheticSpaces sp;
  sp.cfg = cfg;
  Rng rng(hash_fields({"spaces", std::to_string(cfg.seed)}));
  sp.vision_feats = gaussian(cfg.n, cfg.d_v, 1.0, rng);
  sp.substitute_map = gaussian(cfg.d_v, cfg.d_l, 1.0 / std::sqrt(cfg.d_v), rng);

  sp.reasoning_map = sp.substitute_map;
  if (cfg.similarity > 0.0) {
    double total_budget = cfg.similarity * frobenius(sp.substitute_map);
    double part = total_budget / std::sqrt(2.0);

    // Rotation on a random output 2-plane. Rotating the column pair by phi
    // displaces it by 2*sin(phi/2)*||pair||, which is solved for phi.
    int ci = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.d_l)));
    int cj = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.d_l - 1)));
    if (cj >= ci) ++cj;
    double pair_sq = 0.0;
    for (int r = 0; r < cfg.d_v; ++r) {
      pair_sq += sp.substitute_map.at(r, ci) * sp.substitute_map.at(r, ci) +
                 sp.substitute_map.at(r, cj) * sp.substitute_map.at(r, cj);
    }
    double pair_norm = std::sqrt(pair_sq);
    double phi = 2.0 * std::asin(std::min(1.0, part / (2.0 * pair_norm)));
    double c = std::cos(phi), s = std::sin(phi);
    for (int r = 0; r < cfg.d_v; ++r) {
      double vi = sp.substitute_map.at(r, ci);
      double vj = sp.substitute_map.at(r, cj);
      sp.reasoning_map.at(r, ci) = c * vi + s * vj;
      sp.reasoning_map.at(r, cj) = -s * vi + c * vj;
    }

    // Perturbation orthogonalized against the rotation displacement, so the
    // two parts add in quadrature and the total relative difference is
    // exactly `similarity`.
    Mat rot_diff(cfg.d_v, cfg.d_l);
    for (size_t i = 0; i < rot_diff.a.size(); ++i) {
      rot_diff.a[i] = sp.reasoning_map.a[i] - sp.substitute_map.a[i];
    }
    Mat delta = gaussian(cfg.d_v, cfg.d_l, 1.0, rng);
    double proj = dot(delta.a, rot_diff.a) / std::max(1e-300, dot(rot_diff.a, rot_diff.a));
    for (size_t i = 0; i < delta.a.size(); ++i) delta.a[i] -= proj * rot_diff.a[i];
    double delta_norm = frobenius(delta);
    if (delta_norm > 0.0) {
      double scale = part / delta_norm;
      for (size_t i = 0; i < delta.a.size(); ++i) {
        sp.reasoning_map.a[i] += scale * delta.a[i];
      }
    }
  }

  sp.substitute_targets = matmul(sp.vision_feats, sp.substitute_map);
  sp.reasoning_targets = matmul(sp.vision_feats, sp.reasoning_map);
  // One shared noise draw keeps similarity=0 an exact target match.
  Mat noise = gaussian(cfg.n, cfg.d_l, cfg.noise, rng);
  for (size_t i = 0; i < noise.a.size(); ++i) {
    sp.substitute_targets.a[i] += noise.a[i];
    sp.reasoning_targets.a[i] += noise.a[i];
  }
  return sp;
}

AdapterMLP AdapterMLP::init(int d_v, int hidden, int d_l, uint64_t seed) {
  if (d_v < 1 || hidden < 1 || d_l < 1) throw Error("adapter dims must be positive");
  Rng rng(hash_fields({"adapter-init", std::to_string(seed)}));
  AdapterMLP m;
  m.w1 = gaussian(d_v, hidden, 1.0 / std::sqrt(d_v), rng);
  m.b1.assign(hidden, 0.0);
  m.w2 = gaussian(hidden, d_l, 1.0 / std::sqrt(hidden), rng);
  m.b2.assign(d_l, 0.0);
  return m;
}

Mat AdapterMLP::forward(const Mat& x) const {
  Mat h = matmul(x, w1);
  for (int i = 0; i < h.rows; ++i) {
    for (int j = 0; j < h.cols; ++j) h.at(i, j) = std::tanh(h.at(i, j) + b1[j]);
  }
  Mat y = matmul(h, w2);
  for (int i = 0; i < y.rows; ++i) {
    for (int j = 0; j < y.cols; ++j) y.at(i, j) += b2[j];
  }
  return y;
}

std::vector<double> AdapterMLP::flat_params() const {
  std::vector<double> p;
  p.reserve(w1.a.size() + b1.size() + w2.a.size() + b2.size());
  p.insert(p.end(), w1.a.begin(), w1.a.end());
  p.insert(p.end(), b1.begin(), b1.end());
  p.insert(p.end(), w2.a.begin(), w2.a.end());
  p.insert(p.end(), b2.begin(), b2.end());
  return p;
}

void AdapterMLP::set_flat_params(const std::vector<double>& p) {
  size_t need = w1.a.size() + b1.size() + w2.a.size() + b2.size();
  if (p.size() != need) throw Error("flat parameter size mismatch");
  size_t off = 0;
  std::copy(p.begin() + off, p.begin() + off + w1.a.size(), w1.a.begin());
  off += w1.a.size();
  std::copy(p.begin() + off, p.begin() + off + b1.size(), b1.begin());
  off += b1.size();
  std::copy(p.begin() + off, p.begin() + off + w2.a.size(), w2.a.begin());
  off += w2.a.size();
  std::copy(p.begin() + off, p.begin() + off + b2.size(), b2.begin());
}

double mse_loss(const Mat& pred, const Mat& target) {
  if (pred.rows != target.rows || pred.cols != target.cols) throw Error("loss shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < pred.a.size(); ++i) {
    double d = pred.a[i] - target.a[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.a.size());
}

std::vector<double> loss_gradient(const AdapterMLP& adapter, const Mat& x, const Mat& target) {
  // Forward, keeping the hidden activations.
  Mat h = matmul(x, adapter.w1);
  for (int i = 0; i < h.rows; ++i) {
    for (int j = 0; j < h.cols; ++j) h.at(i, j) = std::tanh(h.at(i, j) + adapter.b1[j]);
  }
  Mat y = matmul(h, adapter.w2);
  for (int i = 0; i < y.rows; ++i) {
    for (int j = 0; j < y.cols; ++j) y.at(i, j) += adapter.b2[j];
  }

  double inv = 2.0 / static_cast<double>(y.a.size());
  Mat dy(y.rows, y.cols);
  for (size_t i = 0; i < y.a.size(); ++i) dy.a[i] = inv * (y.a[i] - target.a[i]);

  // dW2 = H^T dY, db2 = column sums of dY
  Mat dw2(adapter.w2.rows, adapter.w2.cols);
  for (int i = 0; i < h.rows; ++i) {
    for (int k = 0; k < h.cols; ++k) {
      double hv = h.at(i, k);
      if (hv == 0.0) continue;
      for (int j = 0; j < dy.cols; ++j) dw2.at(k, j) += hv * dy.at(i, j);
    }
  }
  std::vector<double> db2(adapter.b2.size(), 0.0);
  for (int i = 0; i < dy.rows; ++i) {
    for (int j = 0; j < dy.cols; ++j) db2[j] += dy.at(i, j);
  }

  // dH = dY W2^T, through tanh: dZ = dH * (1 - h^2)
  Mat dz(h.rows, h.cols);
  for (int i = 0; i < dy.rows; ++i) {
    for (int j = 0; j < dy.cols; ++j) {
      double dv = dy.at(i, j);
      if (dv == 0.0) continue;
      for (int k = 0; k < h.cols; ++k) dz.at(i, k) += dv * adapter.w2.at(k, j);
    }
  }
  for (int i = 0; i < h.rows; ++i) {
    for (int k = 0; k < h.cols; ++k) {
      double hv = h.at(i, k);
      dz.at(i, k) *= (1.0 - hv * hv);
    }
  }

  // dW1 = X^T dZ, db1 = column sums of dZ
  Mat dw1(adapter.w1.rows, adapter.w1.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int k = 0; k < x.cols; ++k) {
      double xv = x.at(i, k);
      if (xv == 0.0) continue;
      for (int j = 0; j < dz.cols; ++j) dw1.at(k, j) += xv * dz.at(i, j);
    }
  }
  std::vector<double> db1(adapter.b1.size(), 0.0);
  for (int i = 0; i < dz.rows; ++i) {
    for (int j = 0; j < dz.cols; ++j) db1[j] += dz.at(i, j);
  }

  std::vector<double> g;
  g.reserve(dw1.a.size() + db1.size() + dw2.a.size() + db2.size());
  g.insert(g.end(), dw1.a.begin(), dw1.a.end());
  g.insert(g.end(), db1.begin(), db1.end());
  g.insert(g.end(), dw2.a.begin(), dw2.a.end());
  g.insert(g.end(), db2.begin(), db2.end());
  return g;
}

TrainResult train_adapter(const SyntheticSpaces& spaces, TargetSpace target,
                          const AdapterMLP& init, int steps, double lr) {
  if (steps < 0) throw Error("steps must be non-negative");
  const Mat& t =
      target == TargetSpace::Substitute ? spaces.substitute_targets : spaces.reasoning_targets;
  TrainResult result;
  result.adapter = init;
  result.loss_curve.push_back(mse_loss(result.adapter.forward(spaces.vision_feats), t));
  std::vector<double> params = result.adapter.flat_params();
  for (int step = 0; step < steps; ++step) {
    std::vector<double> g = loss_gradient(result.adapter, spaces.vision_feats, t);
    for (size_t i = 0; i < params.size(); ++i) params[i] -= lr * g[i];
    result.adapter.set_flat_params(params);
    double loss = mse_loss(result.adapter.forward(spaces.vision_feats), t);
    if (!(loss <= 1e6)) {
      throw Error("adapter training diverged at step " + std::to_string(step) + " (loss " +
                  std::to_string(loss) + "; lower the learning rate)");
    }
    result.loss_curve.push_back(loss);
  }
  return result;
}

TransferReport transfer_eval(const AdapterMLP& theta_pretrained, const SyntheticSpaces& spaces,
                             int budget, double lr) {
  if (budget < 0) throw Error("budget must be non-negative");
  TransferReport rep;
  rep.budget = budget;
  rep.similarity = spaces.cfg.similarity;

  AdapterMLP fresh = AdapterMLP::init(spaces.cfg.d_v, theta_pretrained.w1.cols, spaces.cfg.d_l,
                                      spaces.cfg.seed + 0x5eedf00d);
  rep.zero_shot_transferred =
      mse_loss(theta_pretrained.forward(spaces.vision_feats), spaces.reasoning_targets);
  rep.zero_shot_fresh = mse_loss(fresh.forward(spaces.vision_feats), spaces.reasoning_targets);
  if (budget > 0) {
    rep.finetuned_transferred =
        train_adapter(spaces, TargetSpace::Reasoning, theta_pretrained, budget, lr)
            .loss_curve.back();
    rep.fresh_final =
        train_adapter(spaces, TargetSpace::Reasoning, fresh, budget, lr).loss_curve.back();
  }
  return rep;
}

std::string transfer_report_csv(const std::vector<TransferReport>& reports) {
  std::string out =
      "similarity,budget,zero_shot_transferred,zero_shot_fresh,finetuned_transferred,fresh_final\n";
  char buf[200];
  for (const TransferReport& r : reports) {
    std::snprintf(buf, sizeof(buf), "%.10g,%d,%.10g,%.10g,", r.similarity, r.budget,
                  r.zero_shot_transferred, r.zero_shot_fresh);
    out += buf;
    if (r.finetuned_transferred.has_value()) {
      std::snprintf(buf, sizeof(buf), "%.10g,", *r.finetuned_transferred);
      out += buf;
    } else {
      out += ",";
    }
    if (r.fresh_final.has_value()) {
      std::snprintf(buf, sizeof(buf), "%.10g", *r.fresh_final);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace rlab
