#include "rlab/core.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include "rlab/hash.hpp"

namespace rlab {

void Dataset::append(Sample s) {
  if (find(s.id) != nullptr) {
    throw Error("duplicate sample id '" + s.id + "'");
  }
  samples.push_back(std::move(s));
}

const Sample* Dataset::find(const std::string& id) const {
  for (const auto& s : samples) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::vector<std::string> validate_config(const PipelineConfig& cfg) {
  std::vector<std::string> v;
  if (!(cfg.alpha > 0.0)) v.push_back("alpha must be > 0");
  if (cfg.beta < 0.0) v.push_back("beta must be >= 0");
  if (cfg.gamma < 0.0) v.push_back("gamma must be >= 0");
  if (cfg.penalty_cap < 1.0) v.push_back("penalty_cap must be >= 1");
  for (size_t i = 0; i < cfg.tau_schedule.size(); ++i) {
    int t = cfg.tau_schedule[i];
    if (t < 0 || t > 5) {
      v.push_back("tau_schedule values must lie in 0..5");
      break;
    }
  }
  for (size_t i = 1; i < cfg.tau_schedule.size(); ++i) {
    if (cfg.tau_schedule[i] <= cfg.tau_schedule[i - 1]) {
      v.push_back("tau_schedule must be strictly increasing");
      break;
    }
  }
  if (cfg.group_size < 2) v.push_back("group_size must be >= 2");
  if (!(cfg.rl_temperature > 0.0)) v.push_back("rl_temperature must be > 0");
  if (cfg.rl_learning_rate < 0.0) v.push_back("rl_learning_rate must be >= 0");
  if (cfg.max_completion_tokens < 1) v.push_back("max_completion_tokens must be >= 1");
  if (cfg.sft_context_length < 1) v.push_back("sft_context_length must be >= 1");
  if (cfg.weight_decay < 0.0) v.push_back("weight_decay must be >= 0");
  if (cfg.warmup_ratio < 0.0 || cfg.warmup_ratio > 1.0) v.push_back("warmup_ratio must lie in [0,1]");
  if (cfg.batch_size < 1) v.push_back("batch_size must be >= 1");
  return v;
}

void require_valid(const PipelineConfig& cfg) {
  auto violations = validate_config(cfg);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid config:";
  for (const auto& s : violations) os << "\n  - " << s;
  throw Error(os.str());
}

std::string render_completion(const Sample& s) {
  std::string out;
  if (s.think && !s.think->empty()) {
    out += "<think>";
    out += *s.think;
    out += "</think>\n";
  }
  if (s.final_response) out += *s.final_response;
  return out;
}

void for_each_parallel(size_t n, int max_threads, const std::function<void(size_t)>& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  size_t workers = std::min<size_t>({n, static_cast<size_t>(std::max(1, max_threads)),
                                     static_cast<size_t>(hw == 0 ? 1 : hw)});
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace rlab
