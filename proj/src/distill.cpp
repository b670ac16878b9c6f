#include "rlab/distill.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "rlab/answers.hpp"
#include "rlab/penalty.hpp"
#include "rlab/hash.hpp"
#include "rlab/rng.hpp"

namespace rlab {

namespace {

struct VocabEntry {
  const char* word;
  double logit;
};

// Filler vocabulary. All base logits sit well above the end token's 0, so
// un-penalized chains run long; dividing emitted-word logits by P > 1
// shifts mass toward the end token and shortens the chain.
constexpr VocabEntry kVocab[] = {
    {"consider", 2.0}, {"therefore", 2.2}, {"because", 1.9}, {"compute", 2.1},
    {"observe", 1.8},  {"segment", 2.0},   {"value", 2.2},   {"apply", 1.9},
    {"reduce", 2.1},   {"combine", 1.8},   {"check", 2.0},   {"balance", 2.2},
    {"measure", 1.9},  {"compare", 2.1},   {"estimate", 1.8}, {"verify", 2.0},
};
constexpr int kVocabSize = static_cast<int>(std::size(kVocab));
constexpr double kEosLogit = 0.0;

std::string wrong_answer_for(const std::string& gold) {
  // Numeric golds get an off-by-one miss; anything else a marked variant.
  try {
    size_t used = 0;
    long long v = std::stoll(gold, &used);
    if (used == gold.size()) return std::to_string(v + 1);
  } catch (const std::exception&) {
  }
  return gold + " (alt)";
}

int count_tokens(const std::string& text) {
  std::istringstream in(text);
  std::string w;
  int n = 0;
  while (in >> w) ++n;
  return n;
}

}  // namespace

bool ToyGenerator::answers_correctly(const Sample& s) const {
  uint64_t h = hash_fields({std::to_string(seed_), s.id, "acc"});
  double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < accuracy_;
}

Generation ToyGenerator::generate(const Sample& s, double penalty, int max_tokens) const {
  Rng rng(hash_fields({std::to_string(seed_), s.id, "gen"}));
  bool emitted[kVocabSize] = {};
  std::vector<int> chain;
  for (int step = 0; step < max_tokens; ++step) {
    double weights[kVocabSize + 1];
    double total = 0.0;
    for (int i = 0; i < kVocabSize; ++i) {
      double logit = kVocab[i].logit;
      if (emitted[i]) logit = logit > 0 ? logit / penalty : logit * penalty;
      weights[i] = std::exp(logit);
      total += weights[i];
    }
    weights[kVocabSize] = std::exp(kEosLogit);
    total += weights[kVocabSize];
    double draw = rng.uniform() * total;
    int pick = kVocabSize;
    double acc = 0.0;
    for (int i = 0; i <= kVocabSize; ++i) {
      acc += weights[i];
      if (draw < acc) {
        pick = i;
        break;
      }
    }
    if (pick == kVocabSize) break;  // end token
    emitted[pick] = true;
    chain.push_back(pick);
  }

  Generation g;
  std::string think;
  for (size_t i = 0; i < chain.size(); ++i) {
    if (i > 0) think += ' ';
    think += kVocab[chain[i]].word;
  }
  if (think.empty()) think = "direct";  // a chain is always non-empty
  g.think = think;
  g.chain_tokens = static_cast<int>(chain.empty() ? 1 : chain.size());
  std::string answer = answers_correctly(s) ? s.gold_answer : wrong_answer_for(s.gold_answer);
  g.final_response = render_answer_line(answer);
  return g;
}

ScoreResult score_dataset(const Dataset& ds, const JudgeBackend& judge, const ScoreOptions& opts) {
  ScoreResult result;
  result.dataset = ds;
  result.dataset.provenance = "score";
  std::mutex fail_mu;
  for_each_parallel(ds.size(), opts.max_threads, [&](size_t i) {
    Sample& s = result.dataset.samples[i];
    if (s.scores.has_value()) return;
    try {
      VisionAssessment va = assess_vision(s, judge, opts.base_dir, opts.clarity);
      TextAssessment ta = assess_text(s, judge);
      double s_i = integration_score(s, opts.integration,
                                     opts.integration == IntegrationMode::Judge ? &judge : nullptr,
                                     opts.rule_weights);
      ScoreBundle b;
      b.clarity = va.clarity;
      b.necessity = va.necessity;
      b.question_quality = ta.question_quality;
      b.difficulty = ta.difficulty;
      b.reasoning_demand = ta.reasoning_demand;
      b.s_v = va.s_v;
      b.s_t = ta.s_t;
      b.s_i = s_i;
      s.scores = b;
    } catch (const std::exception& e) {
      std::lock_guard lk(fail_mu);
      result.failures.emplace_back(s.id, e.what());
    }
  });
  std::sort(result.failures.begin(), result.failures.end());
  return result;
}

Dataset apply_penalties(const Dataset& ds, const PipelineConfig& cfg, bool global_stats) {
  require_valid(cfg);
  Dataset out = ds;
  out.provenance = "penalty";
  for (const Sample& s : out.samples) {
    if (!s.scores.has_value()) {
      throw Error("sample " + s.id + " is unscored; run scoring first");
    }
  }
  size_t stride = global_stats ? out.size() : static_cast<size_t>(cfg.batch_size);
  for (size_t start = 0; start < out.size(); start += stride) {
    size_t end = std::min(out.size(), start + stride);
    std::vector<ScoreBundle> batch;
    batch.reserve(end - start);
    for (size_t i = start; i < end; ++i) batch.push_back(*out.samples[i].scores);
    std::vector<NormalizedScores> normed = normalize_scores(batch);
    for (size_t i = start; i < end; ++i) {
      ScoreBundle& b = *out.samples[i].scores;
      const NormalizedScores& n = normed[i - start];
      b.s_v_hat = n.s_v_hat;
      b.s_t_hat = n.s_t_hat;
      b.s_i_hat = n.s_i_hat;
      b.penalty = repetition_penalty(n, cfg);
    }
  }
  return out;
}

Generation generate_with_penalty(const GeneratorInterface& gen, const Sample& s, double penalty,
                                 const PipelineConfig& cfg) {
  if (!(penalty >= 1.0 && penalty <= cfg.penalty_cap)) {
    throw Error("penalty " + std::to_string(penalty) + " outside [1, cap] for sample " + s.id);
  }
  return gen.generate(s, penalty, cfg.max_completion_tokens);
}

std::pair<Sample, DistillRecord> verify_and_revise(const Sample& s, const Generation& generated,
                                                   const JudgeBackend& judge,
                                                   double penalty_used) {
  if (generated.final_response.empty()) {
    throw Error("generator produced an empty final response for sample " + s.id);
  }
  DistillRecord rec;
  rec.sample_id = s.id;
  rec.penalty_used = penalty_used;

  JudgeRequest verify;
  verify.kind = JudgeTask::VerifyAnswer;
  verify.candidate = generated.final_response;
  verify.gold = s.gold_answer;
  JudgeVerdict v = judge_call(verify, judge);

  Sample out = s;
  if (v.correct.value_or(false)) {
    rec.verdict = DistillVerdict::KeptOriginal;
    out.think = generated.think;
    out.final_response = generated.final_response;
    rec.chain_tokens = generated.chain_tokens;
    return {out, rec};
  }

  rec.verdict = DistillVerdict::Revised;
  Sample candidate = s;
  candidate.think = generated.think;
  candidate.final_response = generated.final_response;
  JudgeRequest revise;
  revise.kind = JudgeTask::ReviseReasoning;
  revise.question = s.question;
  revise.candidate = render_completion(candidate);
  revise.gold = s.gold_answer;
  JudgeVerdict r = judge_call(revise, judge);
  if (!r.revised_think.has_value() || r.revised_think->empty()) {
    throw Error("judge returned no revision for sample " + s.id);
  }
  out.think = *r.revised_think;
  out.final_response = render_answer_line(s.gold_answer);
  rec.chain_tokens = count_tokens(*out.think);

  // Re-verify the revision once; a still-wrong chain is flagged, not dropped.
  JudgeRequest recheck;
  recheck.kind = JudgeTask::VerifyAnswer;
  recheck.candidate = *out.final_response;
  recheck.gold = s.gold_answer;
  JudgeVerdict v2 = judge_call(recheck, judge);
  if (!v2.correct.value_or(false)) out.meta["revision_failed"] = "true";
  return {out, rec};
}

DistillResult distill_round(const Dataset& ds, const GeneratorInterface& gen,
                            const JudgeBackend& judge, const PipelineConfig& cfg,
                            const ScoreOptions& opts) {
  require_valid(cfg);
  DistillResult result;

  bool needs_scoring = std::any_of(ds.samples.begin(), ds.samples.end(),
                                   [](const Sample& s) { return !s.scores.has_value(); });
  Dataset scored = ds;
  if (needs_scoring) {
    ScoreResult sr = score_dataset(ds, judge, opts);
    scored = std::move(sr.dataset);
    result.failures = std::move(sr.failures);
  }
  bool needs_penalty =
      std::any_of(scored.samples.begin(), scored.samples.end(), [](const Sample& s) {
        return s.scores.has_value() && !s.scores->penalty.has_value();
      });
  if (needs_penalty) {
    // Failed-to-score samples would poison normalization; penalize the
    // scored subset and merge back.
    Dataset scorable;
    std::vector<size_t> positions;
    for (size_t i = 0; i < scored.size(); ++i) {
      if (scored.samples[i].scores.has_value()) {
        scorable.append(scored.samples[i]);
        positions.push_back(i);
      }
    }
    if (!scorable.samples.empty()) {
      Dataset penalized = apply_penalties(scorable, cfg);
      for (size_t k = 0; k < positions.size(); ++k) {
        scored.samples[positions[k]] = penalized.samples[k];
      }
    }
  }

  result.dataset.provenance = "distill";
  result.dataset.samples.resize(scored.size());
  std::vector<std::optional<DistillRecord>> records(scored.size());
  std::mutex fail_mu;
  for_each_parallel(scored.size(), opts.max_threads, [&](size_t i) {
    const Sample& s = scored.samples[i];
    if (!s.scores.has_value() || !s.scores->penalty.has_value()) {
      result.dataset.samples[i] = s;  // already reported as a scoring failure
      return;
    }
    try {
      double penalty = *s.scores->penalty;
      Generation g = generate_with_penalty(gen, s, penalty, cfg);
      auto [updated, rec] = verify_and_revise(s, g, judge, penalty);
      result.dataset.samples[i] = std::move(updated);
      records[i] = rec;
    } catch (const std::exception& e) {
      result.dataset.samples[i] = s;
      std::lock_guard lk(fail_mu);
      result.failures.emplace_back(s.id, e.what());
    }
  });
  for (auto& rec : records) {
    if (rec.has_value()) result.records.push_back(std::move(*rec));
  }
  std::sort(result.failures.begin(), result.failures.end());
  return result;
}

std::string records_to_jsonl(const std::vector<DistillRecord>& records) {
  std::string out;
  for (const DistillRecord& r : records) {
    nlohmann::json j;
    j["sample_id"] = r.sample_id;
    j["penalty_used"] = r.penalty_used;
    j["verdict"] = r.verdict == DistillVerdict::KeptOriginal ? "kept_original" : "revised";
    j["chain_tokens"] = r.chain_tokens;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace rlab
