#include "rlab/curate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "rlab/answers.hpp"
#include "rlab/hash.hpp"
#include "rlab/jsonl.hpp"
#include "rlab/manifest.hpp"
#include "rlab/rng.hpp"

namespace rlab {

using nlohmann::json;

namespace {

// Toy SFT learning-rate schedule: a higher rate for the initial stage and
// the first iteration, reduced 5x for later iterations.
constexpr double kToyLrStage1 = 2.0;
constexpr double kToyLrFirstIteration = 2.0;
constexpr double kToyLrLater = 0.4;

std::vector<double> softmax(const std::vector<double>& z) {
  double hi = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - hi);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double hash_unit(std::initializer_list<std::string_view> fields) {
  return static_cast<double>(hash_fields(fields) >> 11) * 0x1.0p-53;
}

}  // namespace

int MockRewardModel::score(const Sample& s) const {
  auto it = s.meta.find("rm_score");
  if (it != s.meta.end()) {
    try {
      size_t used = 0;
      int v = std::stoi(it->second, &used);
      if (used != it->second.size() || v < 0 || v > 5) throw std::invalid_argument("range");
      return v;
    } catch (const std::exception&) {
      throw Error("sample " + s.id + ": meta rm_score must be an integer 0..5, got '" +
                  it->second + "'");
    }
  }
  return static_cast<int>(hash_fields({"rm", std::to_string(seed_), s.id, s.question}) % 6);
}

ToySftModel::ToySftModel(uint64_t seed) : seed_(seed) {}

int ToySftModel::class_index(const std::string& gold) const {
  std::string c = normalize_answer(gold);
  for (size_t i = 0; i < canon_.size(); ++i) {
    if (canon_[i] == c) return static_cast<int>(i);
  }
  return -1;
}

std::string ToySftModel::respond(const Sample& s) const {
  if (answers_.empty()) {
    return "<think>no training yet</think>\n" + render_answer_line("unknown");
  }
  std::vector<double> row(answers_.size(), 0.0);
  auto it = sample_logits_.find(s.id);
  if (it != sample_logits_.end()) {
    std::copy(it->second.begin(), it->second.end(), row.begin());
  }
  std::vector<double> p = softmax(row);
  Rng rng(hash_fields({"respond", std::to_string(seed_), std::to_string(generation_), s.id}));
  double draw = rng.uniform();
  size_t pick = p.size() - 1;
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (draw < acc) {
      pick = i;
      break;
    }
  }
  return "<think>recall the trained association</think>\n" + render_answer_line(answers_[pick]);
}

double ToySftModel::gold_probability(const Sample& s) const {
  int target = class_index(s.gold_answer);
  if (target < 0) return 0.0;
  std::vector<double> row(answers_.size(), 0.0);
  auto it = sample_logits_.find(s.id);
  if (it != sample_logits_.end()) {
    std::copy(it->second.begin(), it->second.end(), row.begin());
  }
  return softmax(row)[static_cast<size_t>(target)];
}

std::unique_ptr<ModelInterface> ToySftModel::train(const Dataset& ds, double learning_rate) const {
  auto out = std::make_unique<ToySftModel>(*this);
  out->generation_ = generation_ + 1;
  for (const Sample& s : ds.samples) {
    if (s.gold_answer.empty()) throw Error("sample " + s.id + " lacks a gold answer");
    if (out->class_index(s.gold_answer) < 0) {
      out->answers_.push_back(s.gold_answer);
      out->canon_.push_back(normalize_answer(s.gold_answer));
    }
  }
  // One epoch: nudge each sample's row toward its gold class.
  for (const Sample& s : ds.samples) {
    std::vector<double>& row = out->sample_logits_[s.id];
    row.resize(out->answers_.size(), 0.0);
    std::vector<double> p = softmax(row);
    int target = out->class_index(s.gold_answer);
    for (size_t k = 0; k < row.size(); ++k) {
      double indicator = static_cast<int>(k) == target ? 1.0 : 0.0;
      row[k] += learning_rate * (indicator - p[k]);
    }
  }
  return out;
}

std::string ToySftModel::snapshot() const {
  json j;
  j["kind"] = "toy_sft";
  j["seed"] = seed_;
  j["generation"] = generation_;
  j["answers"] = answers_;
  j["canon"] = canon_;
  j["sample_logits"] = sample_logits_;
  return j.dump();
}

std::unique_ptr<ToySftModel> ToySftModel::restore(const std::string& snapshot) {
  json j;
  try {
    j = json::parse(snapshot);
    if (j.at("kind").get<std::string>() != "toy_sft") throw Error("not a toy_sft snapshot");
    auto m = std::make_unique<ToySftModel>(j.at("seed").get<uint64_t>());
    m->generation_ = j.at("generation").get<int>();
    m->answers_ = j.at("answers").get<std::vector<std::string>>();
    m->canon_ = j.at("canon").get<std::vector<std::string>>();
    m->sample_logits_ = j.at("sample_logits").get<std::map<std::string, std::vector<double>>>();
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("bad model snapshot: ") + e.what());
  }
}

std::string FixedAccuracyModel::respond(const Sample& s) const {
  if (hits(s)) return "<think>solve directly</think>\n" + render_answer_line(s.gold_answer);
  return "<think>solve directly</think>\n" + render_answer_line("wrong " + s.gold_answer);
}

std::unique_ptr<ModelInterface> FixedAccuracyModel::train(const Dataset&, double) const {
  return std::make_unique<FixedAccuracyModel>(*this);
}

std::string FixedAccuracyModel::snapshot() const {
  json j;
  j["kind"] = "fixed_accuracy";
  j["seed"] = seed_;
  j["accuracy"] = accuracy_;
  return j.dump();
}

bool FixedAccuracyModel::hits(const Sample& s) const {
  return hash_unit({"fixedacc", std::to_string(seed_), s.id}) < accuracy_;
}

json iteration_record_to_json(const IterationRecord& r) {
  json j;
  j["t"] = r.t;
  j["tau"] = r.tau;
  j["d_rm_size"] = r.d_rm_size;
  j["error_size"] = r.error_size;
  j["d_t_size"] = r.d_t_size;
  j["learning_rate"] = r.learning_rate;
  j["metrics"] = r.metrics;
  return j;
}

IterationRecord iteration_record_from_json(const json& j) {
  IterationRecord r;
  try {
    r.t = j.at("t").get<int>();
    r.tau = j.at("tau").get<int>();
    r.d_rm_size = j.at("d_rm_size").get<size_t>();
    r.error_size = j.at("error_size").get<size_t>();
    r.d_t_size = j.at("d_t_size").get<size_t>();
    r.learning_rate = j.at("learning_rate").get<double>();
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    throw Error(std::string("bad iteration record: ") + e.what());
  }
  return r;
}

Dataset filter_by_reward(const Dataset& ds, const RewardModelInterface& rm, int tau) {
  if (tau < 0 || tau > 5) throw Error("tau must lie in 0..5, got " + std::to_string(tau));
  Dataset out;
  out.provenance = "rm_filter_tau" + std::to_string(tau);
  for (const Sample& s : ds.samples) {
    int sc = rm.score(s);
    if (sc < 0 || sc > 5) throw Error("reward model returned " + std::to_string(sc));
    if (sc >= tau) {
      Sample kept = s;
      kept.rm_score = sc;
      out.append(std::move(kept));
    }
  }
  return out;
}

Dataset error_set(const Dataset& ds, const ModelInterface& model,
                  std::vector<std::string>* failure_log) {
  Dataset out;
  out.provenance = "error_set";
  for (const Sample& s : ds.samples) {
    if (s.gold_answer.empty()) throw Error("sample " + s.id + " lacks a gold answer");
    bool wrong;
    try {
      std::string reply = model.respond(s);
      std::optional<std::string> got = extract_answer(reply);
      wrong = !got.has_value() || !answers_match(*got, s.gold_answer);
    } catch (const std::exception& e) {
      wrong = true;
      if (failure_log != nullptr) failure_log->push_back(s.id + ": " + e.what());
    }
    if (wrong) out.append(s);
  }
  return out;
}

std::pair<Dataset, IterationRecord> build_iteration_dataset(const Dataset& ds,
                                                            const RewardModelInterface& rm,
                                                            const ModelInterface& model_prev,
                                                            int t, const PipelineConfig& cfg,
                                                            const Dataset* rm_source) {
  if (t < 1 || t > static_cast<int>(cfg.tau_schedule.size())) {
    throw Error("iteration index " + std::to_string(t) + " outside the tau schedule");
  }
  int tau = cfg.tau_schedule[static_cast<size_t>(t) - 1];
  Dataset d_rm = filter_by_reward(rm_source != nullptr ? *rm_source : ds, rm, tau);
  Dataset errors = error_set(ds, model_prev);

  std::map<std::string, int> rm_scores;
  std::set<std::string> keep;
  for (const Sample& s : d_rm.samples) {
    rm_scores[s.id] = *s.rm_score;
    keep.insert(s.id);
  }
  for (const Sample& s : errors.samples) keep.insert(s.id);

  Dataset out;
  out.provenance = "iteration_" + std::to_string(t);
  for (const Sample& s : ds.samples) {
    if (keep.count(s.id) == 0) continue;
    Sample c = s;
    auto it = rm_scores.find(s.id);
    if (it != rm_scores.end()) c.rm_score = it->second;
    out.append(std::move(c));
  }

  IterationRecord rec;
  rec.t = t;
  rec.tau = tau;
  rec.d_rm_size = d_rm.size();
  rec.error_size = errors.size();
  rec.d_t_size = out.size();
  return {std::move(out), rec};
}

TrainerFactory make_toy_trainer_factory(uint64_t seed) {
  TrainerFactory f;
  f.fresh = [seed]() -> std::unique_ptr<ModelInterface> {
    return std::make_unique<ToySftModel>(seed);
  };
  f.restore = [](const std::string& snapshot) -> std::unique_ptr<ModelInterface> {
    return ToySftModel::restore(snapshot);
  };
  return f;
}

std::vector<IterationRecord> run_hybrid_schedule(const Dataset& ds, const RewardModelInterface& rm,
                                                 const TrainerFactory& trainer,
                                                 const GeneratorInterface& gen,
                                                 const JudgeBackend& judge,
                                                 const PipelineConfig& cfg,
                                                 const ScheduleOptions& opts) {
  namespace fs = std::filesystem;
  require_valid(cfg);
  fs::create_directories(opts.run_dir);
  const std::string manifest_path = opts.run_dir + "/manifest.json";

  RunManifest man;
  std::string data_hash = to_hex(dataset_hash(ds));
  if (opts.resume && fs::exists(manifest_path)) {
    man = RunManifest::load(manifest_path);
    auto it = man.input_hashes.find("data");
    if (it == man.input_hashes.end() || it->second != data_hash) {
      throw Error("resume refused: input dataset differs from the manifest's");
    }
  } else {
    man.command_line = "run_hybrid_schedule";
    man.config = cfg;
    man.input_hashes["data"] = data_hash;
  }

  // The injected failure (a test hook for resume coverage) fires between
  // stages, after the finished stage's status hit disk.
  int completed = 0;
  auto checkpoint = [&](const std::string& name) {
    ++completed;
    if (opts.fail_after_stages >= 0 && completed >= opts.fail_after_stages) {
      throw Error("injected stage failure after " + name);
    }
  };
  auto finish = [&](const std::string& name, std::vector<std::string> artifacts,
                    std::map<std::string, std::string> hashes) {
    man.finish_stage(name, std::move(artifacts), std::move(hashes));
    man.save(manifest_path);
  };

  auto run_distill = [&](const std::string& stage, Dataset& current) {
    std::string artifact = stage + ".jsonl";
    std::string path = opts.run_dir + "/" + artifact;
    if (man.stage_done(stage)) {
      const StageStatus* st = man.find_stage(stage);
      if (!st->artifacts.empty()) current = load_dataset(path);
      checkpoint(stage);
      return;
    }
    man.begin_stage(stage);
    man.save(manifest_path);
    try {
      DistillResult dr = distill_round(current, gen, judge, cfg, opts.score);
      if (!dr.failures.empty()) {
        throw Error("distill round failed for " + std::to_string(dr.failures.size()) +
                    " samples (first: " + dr.failures.front().first + ": " +
                    dr.failures.front().second + ")");
      }
      current = std::move(dr.dataset);
      save_dataset(current, path);
      write_file_atomic(opts.run_dir + "/" + stage + ".records.jsonl",
                        records_to_jsonl(dr.records));
      finish(stage, {artifact, stage + ".records.jsonl"},
             {{"dataset", to_hex(dataset_hash(current))}});
    } catch (const Error&) {
      man.fail_stage(stage, "distill round aborted");
      man.save(manifest_path);
      throw;
    }
    checkpoint(stage);
  };

  Dataset original = ds;
  Dataset current = ds;

  // Leading distill round (skippable when the caller already refreshed).
  if (opts.initial_round_done) {
    if (!man.stage_done("distill_0")) {
      man.begin_stage("distill_0");
      finish("distill_0", {}, {{"dataset", data_hash}, {"note", "provided by caller"}});
    }
    checkpoint("distill_0");
  } else {
    run_distill("distill_0", current);
  }

  // Initial training over the full dataset.
  std::unique_ptr<ModelInterface> model;
  const double lr_stage1 = kToyLrStage1 * opts.sft_lr_scale;
  if (man.stage_done("stage1_train")) {
    model = trainer.restore(slurp_file(opts.run_dir + "/stage1_model.json"));
  } else {
    man.begin_stage("stage1_train");
    man.save(manifest_path);
    try {
      model = trainer.fresh()->train(current, lr_stage1);
      std::string snap = model->snapshot();
      write_file_atomic(opts.run_dir + "/stage1_model.json", snap);
      IterationRecord rec;
      rec.t = 0;
      rec.tau = 0;
      rec.d_rm_size = current.size();
      rec.error_size = 0;
      rec.d_t_size = current.size();
      rec.learning_rate = lr_stage1;
      rec.metrics["train_accuracy"] =
          1.0 - static_cast<double>(error_set(current, *model).size()) / current.size();
      man.records.push_back(iteration_record_to_json(rec));
      finish("stage1_train", {"stage1_model.json"}, {{"model", to_hex(fnv1a64(snap))}});
    } catch (const Error& e) {
      man.fail_stage("stage1_train", e.what());
      man.save(manifest_path);
      throw;
    }
  }
  checkpoint("stage1_train");

  const int T = static_cast<int>(cfg.tau_schedule.size());
  for (int t = 1; t <= T; ++t) {
    run_distill("distill_" + std::to_string(t), current);

    std::string stage = "iter_" + std::to_string(t);
    std::string model_artifact = "model_" + std::to_string(t) + ".json";
    if (man.stage_done(stage)) {
      model = trainer.restore(slurp_file(opts.run_dir + "/" + model_artifact));
      checkpoint(stage);
      continue;
    }
    man.begin_stage(stage);
    man.save(manifest_path);
    try {
      auto [d_t, rec] = build_iteration_dataset(current, rm, *model, t, cfg,
                                                opts.rm_on_original ? &original : nullptr);
      double lr = (t == 1 ? kToyLrFirstIteration : kToyLrLater) * opts.sft_lr_scale;
      model = model->train(d_t, lr);
      rec.learning_rate = lr;
      rec.metrics["train_accuracy"] =
          1.0 - static_cast<double>(error_set(current, *model).size()) / current.size();
      std::string d_artifact = "d_" + std::to_string(t) + ".jsonl";
      save_dataset(d_t, opts.run_dir + "/" + d_artifact);
      std::string snap = model->snapshot();
      write_file_atomic(opts.run_dir + "/" + model_artifact, snap);
      man.records.push_back(iteration_record_to_json(rec));
      finish(stage, {d_artifact, model_artifact},
             {{"dataset", to_hex(dataset_hash(d_t))}, {"model", to_hex(fnv1a64(snap))}});
    } catch (const Error& e) {
      man.fail_stage(stage, e.what());
      man.save(manifest_path);
      throw;
    }
    checkpoint(stage);
  }

  std::vector<IterationRecord> records;
  for (const json& j : man.records) records.push_back(iteration_record_from_json(j));
  return records;
}

}  // namespace rlab
