#include "rlab/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rlab/answers.hpp"
#include "rlab/hash.hpp"
#include "rlab/rng.hpp"

namespace rlab {

namespace {

std::vector<double> softmax_scaled(const std::vector<double>& z, double temperature) {
  double hi = *std::max_element(z.begin(), z.end()) / temperature;
  std::vector<double> p(z.size());
  double total = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] / temperature - hi);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

int sample_index(const std::vector<double>& probs, Rng& rng) {
  double draw = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (draw < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

int count_tokens(const std::string& text) {
  std::istringstream in(text);
  std::string w;
  int n = 0;
  while (in >> w) ++n;
  return n;
}

// True when text holds `<think>` before `</think>` with a non-empty body.
bool has_think_segment(const std::string& text) {
  size_t open = text.find("<think>");
  if (open == std::string::npos) return false;
  size_t close = text.find("</think>", open + 7);
  if (close == std::string::npos) return false;
  std::string body = trim(text.substr(open + 7, close - (open + 7)));
  return !body.empty();
}

// True when some line is `Answer:` followed by one balanced \boxed{...}.
bool has_answer_line(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string stripped = trim(line);
    if (stripped.rfind("Answer:", 0) != 0) continue;
    if (last_boxed_payload(stripped).has_value()) return true;
  }
  return false;
}

void check_shapes(const ToyPolicy& policy, const ToyPolicy& ref,
                  const std::vector<RolloutGroup>& groups) {
  if (ref.num_prompts() != policy.num_prompts() || ref.k() != policy.k()) {
    throw Error("reference policy shape differs from the current policy");
  }
  for (const RolloutGroup& g : groups) {
    if (g.prompt_index < 0 || g.prompt_index >= policy.num_prompts()) {
      throw Error("rollout group names prompt " + std::to_string(g.prompt_index) +
                  " outside the policy");
    }
    if (g.completions.size() != g.advantages.size()) {
      throw Error("rollout group lists differ in length");
    }
    for (int c : g.completions) {
      if (c < 0 || c >= policy.k()) throw Error("completion index outside the candidate set");
    }
  }
}

}  // namespace

ToyPolicy ToyPolicy::uniform(int num_prompts, int k) {
  if (num_prompts < 1 || k < 2) throw Error("policy needs at least 1 prompt and 2 candidates");
  ToyPolicy p;
  p.logits.assign(num_prompts, std::vector<double>(k, 0.0));
  return p;
}

std::vector<double> ToyPolicy::probs(int prompt, double temperature) const {
  return softmax_scaled(logits.at(prompt), temperature);
}

int format_reward(const std::string& completion) {
  return has_think_segment(completion) && has_answer_line(completion) ? 1 : 0;
}

int accuracy_reward(const std::string& completion, const std::string& gold) {
  if (gold.empty()) throw Error("accuracy reward needs a non-empty gold answer");
  std::optional<std::string> got = extract_answer(completion);
  return got.has_value() && answers_match(*got, gold) ? 1 : 0;
}

std::vector<double> group_advantages(const std::vector<double>& rewards) {
  size_t g = rewards.size();
  if (g < 2) throw Error("advantages need a group of at least 2");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(g);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(g);  // population variance
  std::vector<double> adv(g, 0.0);
  if (var == 0.0) return adv;
  double std_dev = std::sqrt(var);
  for (size_t i = 0; i < g; ++i) adv[i] = (rewards[i] - mean) / std_dev;
  return adv;
}

CandidateTask make_arithmetic_task(int num_prompts, int k, uint64_t seed) {
  if (num_prompts < 1 || k < 2) throw Error("task needs at least 1 prompt and 2 candidates");
  Rng rng(hash_fields({"arith-task", std::to_string(seed)}));
  Dataset ds;
  for (int p = 0; p < num_prompts; ++p) {
    long long a = static_cast<long long>(rng.below(50)) + 1;
    long long b = static_cast<long long>(rng.below(50)) + 1;
    Sample s;
    s.id = "arith-" + std::to_string(p);
    s.question = "Compute " + std::to_string(a) + " + " + std::to_string(b) + ".";
    s.gold_answer = std::to_string(a + b);
    ds.append(std::move(s));
  }
  return task_from_dataset(ds, k, seed);
}

CandidateTask task_from_dataset(const Dataset& ds, int k, uint64_t seed) {
  if (ds.samples.empty()) throw Error("cannot build a task from an empty dataset");
  if (k < 2) throw Error("task needs at least 2 candidates per prompt");
  CandidateTask task;
  for (const Sample& s : ds.samples) {
    if (s.gold_answer.empty()) throw Error("sample " + s.id + " lacks a gold answer");
    task.prompts.push_back(s.question);
    task.golds.push_back(s.gold_answer);

    const std::string& gold = s.gold_answer;
    std::string wrong1 = "wrong " + gold;  // extra token, never normalizes back to gold
    std::string wrong2 = "not " + gold;
    std::vector<std::string> cands;
    cands.push_back("<think>work through the statement step by step</think>\n" +
                    render_answer_line(gold));
    while (static_cast<int>(cands.size()) < k) {
      switch (cands.size() % 4) {
        case 1:
          cands.push_back("<think>a quick guess without checking</think>\n" +
                          render_answer_line(wrong1));
          break;
        case 2:
          cands.push_back(render_answer_line(wrong2));  // no think segment
          break;
        case 3:
          cands.push_back("<think>long detour that never lands on a final box</think>\nAnswer: " +
                          gold);
          break;
        default:
          cands.push_back("unable to solve this one");
          break;
      }
    }
    // Seed-shuffled so the rewarded candidate sits at a different index per
    // prompt; rewards are recomputed from text, so nothing tracks it.
    Rng rng(hash_fields({"task-shuffle", std::to_string(seed), s.id}));
    for (size_t i = cands.size(); i > 1; --i) {
      size_t j = rng.below(i);
      std::swap(cands[i - 1], cands[j]);
    }
    task.candidates.push_back(std::move(cands));
  }
  return task;
}

double grpo_objective(const ToyPolicy& policy, const ToyPolicy& ref,
                      const std::vector<RolloutGroup>& groups, const PipelineConfig& cfg,
                      double kl_coeff) {
  check_shapes(policy, ref, groups);
  double total = 0.0;
  for (const RolloutGroup& g : groups) {
    std::vector<double> p = policy.probs(g.prompt_index, cfg.rl_temperature);
    for (size_t i = 0; i < g.completions.size(); ++i) {
      total += g.advantages[i] * std::log(p[g.completions[i]]);
    }
    if (kl_coeff > 0.0) {
      std::vector<double> q = ref.probs(g.prompt_index, cfg.rl_temperature);
      total -= kl_coeff * kl_divergence(p, q);
    }
  }
  return total;
}

ToyPolicy grpo_step(const ToyPolicy& policy, const ToyPolicy& ref,
                    const std::vector<RolloutGroup>& groups, const PipelineConfig& cfg,
                    double kl_coeff) {
  check_shapes(policy, ref, groups);
  const double t = cfg.rl_temperature;
  ToyPolicy out = policy;
  for (const RolloutGroup& g : groups) {
    std::vector<double> p = policy.probs(g.prompt_index, t);
    std::vector<double> grad(p.size(), 0.0);
    // d/dz_k log pi(o) = (1/T)([k==o] - p_k)
    for (size_t i = 0; i < g.completions.size(); ++i) {
      double a = g.advantages[i];
      if (a == 0.0) continue;
      for (size_t k = 0; k < grad.size(); ++k) grad[k] -= a * p[k] / t;
      grad[g.completions[i]] += a / t;
    }
    if (kl_coeff > 0.0) {
      // d/dz_k KL(p||q) = (1/T) p_k (log(p_k/q_k) - KL)
      std::vector<double> q = ref.probs(g.prompt_index, t);
      double kl = kl_divergence(p, q);
      for (size_t k = 0; k < grad.size(); ++k) {
        grad[k] -= kl_coeff * p[k] * (std::log(p[k] / q[k]) - kl) / t;
      }
    }
    std::vector<double>& z = out.logits[g.prompt_index];
    for (size_t k = 0; k < z.size(); ++k) z[k] += cfg.rl_learning_rate * grad[k];
  }
  return out;
}

GrpoResult train_grpo(const CandidateTask& task, const PipelineConfig& cfg,
                      const GrpoOptions& opts) {
  require_valid(cfg);
  int num_prompts = static_cast<int>(task.prompts.size());
  if (num_prompts == 0) throw Error("task has no prompts");
  int k = static_cast<int>(task.candidates.at(0).size());

  GrpoResult result;
  result.policy = ToyPolicy::uniform(num_prompts, k);
  ToyPolicy ref = result.policy;
  Rng rng(hash_fields({"grpo", std::to_string(opts.seed)}));

  for (int step = 0; step < opts.steps; ++step) {
    std::vector<RolloutGroup> groups;
    groups.reserve(num_prompts);
    double sum_reward = 0.0, sum_acc = 0.0, sum_fmt = 0.0, sum_len = 0.0, sum_kl = 0.0;
    int draws = 0;
    for (int prompt = 0; prompt < num_prompts; ++prompt) {
      std::vector<double> p = result.policy.probs(prompt, cfg.rl_temperature);
      RolloutGroup g;
      g.prompt_index = prompt;
      for (int i = 0; i < cfg.group_size; ++i) {
        int pick = sample_index(p, rng);
        const std::string& text = task.candidates[prompt][pick];
        double acc = accuracy_reward(text, task.golds[prompt]);
        double fmt = format_reward(text);
        g.completions.push_back(pick);
        g.rewards.push_back(acc + fmt);
        sum_acc += acc;
        sum_fmt += fmt;
        sum_reward += acc + fmt;
        sum_len += count_tokens(text);
        ++draws;
      }
      g.advantages = group_advantages(g.rewards);
      sum_kl += kl_divergence(p, ref.probs(prompt, cfg.rl_temperature));
      groups.push_back(std::move(g));
    }
    result.policy = grpo_step(result.policy, ref, groups, cfg, opts.kl_coeff);
    GrpoStepMetrics m;
    m.step = step;
    m.mean_reward = sum_reward / draws;
    m.mean_acc = sum_acc / draws;
    m.mean_fmt = sum_fmt / draws;
    m.kl = sum_kl / num_prompts;
    m.mean_len = sum_len / draws;
    result.metrics.push_back(m);
  }
  return result;
}

std::string metrics_to_csv(const std::vector<GrpoStepMetrics>& metrics) {
  std::string out = "step,mean_reward,mean_acc,mean_fmt,kl,mean_len\n";
  char buf[160];
  for (const GrpoStepMetrics& m : metrics) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", m.step, m.mean_reward,
                  m.mean_acc, m.mean_fmt, m.kl, m.mean_len);
    out += buf;
  }
  return out;
}

}  // namespace rlab
