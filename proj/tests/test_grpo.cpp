#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rlab/answers.hpp"
#include "rlab/grpo.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

namespace {

// Random FD instance pieces.
ToyPolicy random_policy(int prompts, int k, Rng& rng) {
  ToyPolicy p = ToyPolicy::uniform(prompts, k);
  for (auto& row : p.logits)
    for (double& z : row) z = rng.uniform() * 2.0 - 1.0;
  return p;
}

std::vector<RolloutGroup> random_groups(int prompts, int k, int g, Rng& rng) {
  std::vector<RolloutGroup> groups;
  for (int p = 0; p < prompts; ++p) {
    RolloutGroup grp;
    grp.prompt_index = p;
    for (int i = 0; i < g; ++i) {
      grp.completions.push_back(static_cast<int>(rng.below(static_cast<uint64_t>(k))));
      grp.advantages.push_back(rng.uniform() * 2.0 - 1.0);
    }
    grp.rewards.assign(static_cast<size_t>(g), 0.0);
    groups.push_back(std::move(grp));
  }
  return groups;
}

}  // namespace

TEST_CASE("format reward wants a think segment plus a boxed answer line") {
  CHECK(format_reward("<think>steps</think>\nAnswer: \\boxed{4}") == 1);
  CHECK(format_reward("<think>  </think>\nAnswer: \\boxed{4}") == 0);   // empty think
  CHECK(format_reward("Answer: \\boxed{4}") == 0);                      // no think
  CHECK(format_reward("<think>steps</think>\nAnswer: 4") == 0);         // no box
  CHECK(format_reward("<think>steps</think>\nThe answer is \\boxed{4}") == 0);
  CHECK(format_reward("<think>steps</think>\n  Answer: \\boxed{4}  ") == 1);
  CHECK(format_reward("") == 0);
}

TEST_CASE("accuracy reward extracts and normalizes before comparing") {
  CHECK(accuracy_reward("Answer: \\boxed{42}", "42") == 1);
  CHECK(accuracy_reward("Answer: \\boxed{42.0}", "42") == 1);
  CHECK(accuracy_reward("Answer: \\boxed{41}", "42") == 0);
  CHECK(accuracy_reward("no box here", "42") == 0);
  CHECK(accuracy_reward("Answer: \\boxed{wrong 42}", "42") == 0);
  CHECK_THROWS_AS(accuracy_reward("Answer: \\boxed{1}", ""), Error);
}

TEST_CASE("group advantages standardize to mean 0, std 1") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> rewards;
    for (int i = 0; i < 8; ++i) rewards.push_back(rng.uniform() * 3.0);
    std::vector<double> adv = group_advantages(rewards);
    double mean = 0.0, var = 0.0;
    for (double a : adv) mean += a;
    mean /= adv.size();
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= adv.size();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-9);
  }
  std::vector<double> flat = group_advantages({2.0, 2.0, 2.0, 2.0});
  for (double a : flat) CHECK(a == 0.0);
  CHECK_THROWS_AS(group_advantages({1.0}), Error);
}

TEST_CASE("candidate tasks hold exactly one fully rewarded completion per prompt") {
  for (uint64_t seed : {0ULL, 1ULL, 7ULL}) {
    CandidateTask task = make_arithmetic_task(16, 8, seed);
    REQUIRE(task.prompts.size() == 16);
    REQUIRE(task.golds.size() == 16);
    REQUIRE(task.candidates.size() == 16);
    for (size_t p = 0; p < task.prompts.size(); ++p) {
      REQUIRE(task.candidates[p].size() == 8);
      int full = 0, correct = 0;
      for (const std::string& c : task.candidates[p]) {
        int acc = accuracy_reward(c, task.golds[p]);
        int fmt = format_reward(c);
        correct += acc;
        full += acc == 1 && fmt == 1;
      }
      CHECK(full == 1);
      CHECK(correct == 1);  // the winner is the only correctly boxed candidate
    }
  }
  // Winner position varies across prompts (the shuffle does something).
  CandidateTask task = make_arithmetic_task(16, 8, 3);
  std::vector<int> winner_at;
  for (size_t p = 0; p < task.prompts.size(); ++p)
    for (size_t c = 0; c < task.candidates[p].size(); ++c)
      if (accuracy_reward(task.candidates[p][c], task.golds[p])) winner_at.push_back((int)c);
  bool all_same = true;
  for (int w : winner_at) all_same &= w == winner_at[0];
  CHECK_FALSE(all_same);

  CHECK_THROWS_AS(make_arithmetic_task(0, 8, 0), Error);
  CHECK_THROWS_AS(make_arithmetic_task(4, 1, 0), Error);
}

TEST_CASE("task_from_dataset keeps question/gold pairing and validates input") {
  Dataset ds;
  for (int i = 0; i < 4; ++i) {
    Sample s;
    s.id = "t" + std::to_string(i);
    s.question = "Q" + std::to_string(i);
    s.gold_answer = std::to_string(10 + i);
    ds.append(s);
  }
  CandidateTask task = task_from_dataset(ds, 6, 2);
  REQUIRE(task.prompts.size() == 4);
  for (size_t p = 0; p < 4; ++p) {
    CHECK(task.prompts[p] == ds.samples[p].question);
    CHECK(task.golds[p] == ds.samples[p].gold_answer);
    CHECK(task.candidates[p].size() == 6);
  }
  Dataset empty;
  CHECK_THROWS_AS(task_from_dataset(empty, 6, 0), Error);
  Dataset no_gold = ds;
  no_gold.samples[2].gold_answer.clear();
  CHECK_THROWS_AS(task_from_dataset(no_gold, 6, 0), Error);
}

TEST_CASE("toy policy probabilities: normalization and temperature") {
  ToyPolicy p = ToyPolicy::uniform(2, 4);
  std::vector<double> u = p.probs(0, 1.0);
  for (double v : u) CHECK(v == doctest::Approx(0.25));

  p.logits[1] = {2.0, 0.0, -1.0, 0.5};
  std::vector<double> cold = p.probs(1, 0.5);
  std::vector<double> warm = p.probs(1, 4.0);
  double sum_c = 0.0, sum_w = 0.0;
  for (double v : cold) sum_c += v;
  for (double v : warm) sum_w += v;
  CHECK(sum_c == doctest::Approx(1.0));
  CHECK(sum_w == doctest::Approx(1.0));
  CHECK(cold[0] > warm[0]);        // low temperature sharpens the peak
  CHECK(warm[2] > cold[2]);        // and high temperature lifts the tail
  CHECK_THROWS_AS(ToyPolicy::uniform(0, 4), Error);
  CHECK_THROWS_AS(ToyPolicy::uniform(2, 1), Error);
}

TEST_CASE("one policy step matches finite differences of the objective") {
  PipelineConfig cfg;
  cfg.rl_learning_rate = 1.0;  // step delta then equals the gradient
  const double kl_coeff = 0.1;
  const double eps = 1e-5;
  Rng rng(2024);
  for (int inst = 0; inst < 10; ++inst) {
    int prompts = 3, k = 4;
    ToyPolicy policy = random_policy(prompts, k, rng);
    ToyPolicy ref = random_policy(prompts, k, rng);
    std::vector<RolloutGroup> groups = random_groups(prompts, k, 6, rng);

    ToyPolicy stepped = grpo_step(policy, ref, groups, cfg, kl_coeff);
    for (int p = 0; p < prompts; ++p) {
      for (int c = 0; c < k; ++c) {
        double analytic = stepped.logits[p][c] - policy.logits[p][c];
        ToyPolicy plus = policy, minus = policy;
        plus.logits[p][c] += eps;
        minus.logits[p][c] -= eps;
        double numeric = (grpo_objective(plus, ref, groups, cfg, kl_coeff) -
                          grpo_objective(minus, ref, groups, cfg, kl_coeff)) /
                         (2.0 * eps);
        CHECK(std::abs(analytic - numeric) < 1e-4);
      }
    }
  }
}

TEST_CASE("step and objective validate shapes") {
  PipelineConfig cfg;
  ToyPolicy policy = ToyPolicy::uniform(2, 4);
  ToyPolicy ref = ToyPolicy::uniform(3, 4);
  std::vector<RolloutGroup> none;
  CHECK_THROWS_AS(grpo_objective(policy, ref, none, cfg, 0.0), Error);

  ToyPolicy ref_ok = ToyPolicy::uniform(2, 4);
  RolloutGroup bad;
  bad.prompt_index = 5;
  bad.completions = {0};
  bad.advantages = {1.0};
  CHECK_THROWS_AS(grpo_step(policy, ref_ok, {bad}, cfg, 0.0), Error);
  bad.prompt_index = 0;
  bad.completions = {9};
  CHECK_THROWS_AS(grpo_step(policy, ref_ok, {bad}, cfg, 0.0), Error);
  bad.completions = {0, 1};  // length mismatch vs one advantage
  CHECK_THROWS_AS(grpo_step(policy, ref_ok, {bad}, cfg, 0.0), Error);
}

TEST_CASE("training starts near uniform and learns the rewarded candidate") {
  CandidateTask task = make_arithmetic_task(8, 8, 5);
  PipelineConfig cfg;
  cfg.rl_learning_rate = 0.1;
  GrpoOptions opts;
  opts.steps = 100;
  opts.seed = 5;
  GrpoResult res = train_grpo(task, cfg, opts);
  REQUIRE(res.metrics.size() == 100);
  CHECK(res.metrics.front().step == 0);
  CHECK(res.metrics.front().mean_acc < 0.4);   // ~1/8 under the uniform start
  CHECK(res.metrics.front().kl == 0.0);        // policy equals the reference
  CHECK(res.metrics.back().mean_acc > 0.8);
  CHECK(res.metrics.back().kl > 0.0);
  CHECK(res.metrics.back().mean_reward > res.metrics.front().mean_reward);

  // After training, the argmax candidate is the rewarded one for most prompts.
  int argmax_correct = 0;
  for (size_t p = 0; p < task.prompts.size(); ++p) {
    std::vector<double> probs = res.policy.probs(static_cast<int>(p), cfg.rl_temperature);
    size_t best = 0;
    for (size_t c = 1; c < probs.size(); ++c)
      if (probs[c] > probs[best]) best = c;
    argmax_correct += accuracy_reward(task.candidates[p][best], task.golds[p]);
  }
  CHECK(argmax_correct >= 7);

  GrpoResult rerun = train_grpo(task, cfg, opts);
  CHECK(rerun.policy.logits == res.policy.logits);
  CHECK(metrics_to_csv(rerun.metrics) == metrics_to_csv(res.metrics));

  GrpoOptions other = opts;
  other.seed = 6;
  GrpoResult differ = train_grpo(task, cfg, other);
  CHECK(differ.policy.logits != res.policy.logits);
}

TEST_CASE("metrics csv carries the expected header and one row per step") {
  std::vector<GrpoStepMetrics> ms(3);
  ms[0].step = 0;
  ms[1].step = 1;
  ms[2].step = 2;
  ms[2].mean_reward = 1.5;
  std::string csv = metrics_to_csv(ms);
  CHECK(csv.rfind("step,mean_reward,mean_acc,mean_fmt,kl,mean_len\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find("\n2,1.5,") != std::string::npos);
}
