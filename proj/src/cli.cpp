#include "rlab/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlab/adapter.hpp"
#include "rlab/core.hpp"
#include "rlab/curate.hpp"
#include "rlab/distill.hpp"
#include "rlab/grpo.hpp"
#include "rlab/hash.hpp"
#include "rlab/jsonl.hpp"
#include "rlab/judge.hpp"
#include "rlab/manifest.hpp"

namespace fs = std::filesystem;

namespace rlab {
namespace {

// The bundled candidate policies need a desk-scale step size; the config
// default learning rate targets full-scale fine-tuning and moves a
// 16-way softmax by nothing measurable.
constexpr double kPipelineRlLr = 0.05;

std::unique_ptr<JudgeBackend> make_judge(const std::string& kind, uint64_t seed) {
  if (kind == "mock") return std::make_unique<MockJudge>(seed);
  if (kind == "http") return std::make_unique<HttpJudge>(http_options_from_env());
  throw Error("unknown judge backend '" + kind + "' (expected mock or http)");
}

IntegrationMode parse_integration(const std::string& mode) {
  if (mode == "judge") return IntegrationMode::Judge;
  if (mode == "local") return IntegrationMode::LocalRules;
  throw Error("unknown integration mode '" + mode + "' (expected judge or local)");
}

std::string failures_to_jsonl(const FailureList& failures) {
  std::string out;
  for (const auto& [id, message] : failures) {
    nlohmann::json j;
    j["id"] = id;
    j["error"] = message;
    out += j.dump() + "\n";
  }
  return out;
}

std::string default_base_dir(const std::string& input_path) {
  fs::path parent = fs::path(input_path).parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

std::string join_args(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

struct ConfigArgs {
  std::string path;
  std::optional<uint64_t> seed;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.path, "flat JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the config seed");
}

PipelineConfig resolve_config(const ConfigArgs& args) {
  PipelineConfig cfg;
  if (!args.path.empty()) cfg = load_config(args.path);
  if (args.seed) cfg.seed = *args.seed;
  require_valid(cfg);
  return cfg;
}

void print_records_table(const std::vector<IterationRecord>& records, std::ostream& os) {
  os << "   t  tau   |D_rm|  |E_prev|    |D_t|       lr  train_acc\n";
  for (const auto& r : records) {
    double acc = r.metrics.count("train_accuracy") ? r.metrics.at("train_accuracy") : 0.0;
    char line[160];
    std::snprintf(line, sizeof line, "%4d %4d %8zu %9zu %8zu %8.3g %10.3f\n", r.t, r.tau,
                  r.d_rm_size, r.error_size, r.d_t_size, r.learning_rate, acc);
    os << line;
  }
}

// ---- SVG helpers for `report --plot` ----

std::string fmt_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string svg_text(double x, double y, const std::string& anchor, const std::string& text) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                "text-anchor=\"%s\" fill=\"#333\">%s</text>\n",
                x, y, anchor.c_str(), text.c_str());
  return buf;
}

std::string chart_frame(int w, int h, int ml, int mr, int mt, int mb, const std::string& title) {
  char buf[512];
  std::string svg;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n<rect width=\"%d\" height=\"%d\" fill=\"#ffffff\"/>\n",
                w, h, w, h, w, h);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"#333\"/>\n"
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"#333\"/>\n",
                ml, h - mb, w - mr, h - mb, ml, mt, ml, h - mb);
  svg += buf;
  svg += svg_text(w / 2.0, 22, "middle", title);
  return svg;
}

std::string line_chart_svg(const std::vector<double>& ys, const std::string& title,
                           const std::string& x_label) {
  const int w = 640, h = 360, ml = 60, mr = 20, mt = 40, mb = 44;
  double lo = *std::min_element(ys.begin(), ys.end());
  double hi = *std::max_element(ys.begin(), ys.end());
  if (hi - lo < 1e-12) hi = lo + 1.0;
  auto xmap = [&](size_t i) {
    double t = ys.size() < 2 ? 0.5 : static_cast<double>(i) / (ys.size() - 1);
    return ml + (w - ml - mr) * t;
  };
  auto ymap = [&](double v) { return h - mb - (h - mt - mb) * (v - lo) / (hi - lo); };

  std::string svg = chart_frame(w, h, ml, mr, mt, mb, title);
  svg += svg_text(ml - 8, ymap(lo) + 4, "end", fmt_num(lo));
  svg += svg_text(ml - 8, ymap(hi) + 4, "end", fmt_num(hi));
  svg += svg_text(ml, h - 10, "middle", "0");
  svg += svg_text(w - mr, h - 10, "middle", std::to_string(ys.size() - 1));
  svg += svg_text(w / 2.0, h - 10, "middle", x_label);
  svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (size_t i = 0; i < ys.size(); ++i) {
    if (i) svg += ' ';
    char pt[48];
    std::snprintf(pt, sizeof pt, "%.1f,%.1f", xmap(i), ymap(ys[i]));
    svg += pt;
  }
  svg += "\"/>\n</svg>\n";
  return svg;
}

std::string histogram_svg(const std::vector<double>& values, int bins, double lo, double hi,
                          const std::string& title, const std::string& x_label) {
  const int w = 640, h = 360, ml = 60, mr = 20, mt = 40, mb = 44;
  std::vector<int> counts(static_cast<size_t>(bins), 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    counts[static_cast<size_t>(b)]++;
  }
  int peak = *std::max_element(counts.begin(), counts.end());
  if (peak == 0) peak = 1;

  std::string svg = chart_frame(w, h, ml, mr, mt, mb, title);
  double bw = static_cast<double>(w - ml - mr) / bins;
  for (int b = 0; b < bins; ++b) {
    double bh = (h - mt - mb) * counts[static_cast<size_t>(b)] / static_cast<double>(peak);
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"#2ca02c\" "
                  "stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n",
                  ml + b * bw, h - mb - bh, bw, bh);
    svg += buf;
  }
  svg += svg_text(ml - 8, h - mb + 4, "end", "0");
  svg += svg_text(ml - 8, mt + 4, "end", std::to_string(peak));
  svg += svg_text(ml, h - 10, "middle", fmt_num(lo));
  svg += svg_text(w - mr, h - 10, "middle", fmt_num(hi));
  svg += svg_text(w / 2.0, h - 10, "middle", x_label);
  svg += "</svg>\n";
  return svg;
}

// ---- subcommands ----

struct ScoreArgs {
  std::string in, out;
  std::string base_dir;
  std::string judge = "mock";
  std::string integration = "judge";
  int threads = 4;
  ConfigArgs cfg;
};

int cmd_score(const ScoreArgs& a) {
  PipelineConfig cfg = resolve_config(a.cfg);
  Dataset ds = load_dataset(a.in);
  ScoreOptions opts;
  opts.base_dir = a.base_dir.empty() ? default_base_dir(a.in) : a.base_dir;
  opts.max_threads = a.threads;
  opts.integration = parse_integration(a.integration);
  auto judge = make_judge(a.judge, cfg.seed);

  ScoreResult res = score_dataset(ds, *judge, opts);
  Dataset scored;
  scored.provenance = res.dataset.provenance;
  for (const auto& s : res.dataset.samples)
    if (s.scores) scored.samples.push_back(s);
  save_dataset(scored, a.out);
  std::cout << "scored " << scored.size() << "/" << ds.size() << " samples -> " << a.out << "\n";

  if (!res.failures.empty()) {
    std::string sidecar = a.out + ".failures.jsonl";
    write_file_atomic(sidecar, failures_to_jsonl(res.failures));
    std::cerr << res.failures.size() << " sample(s) failed scoring; see " << sidecar << "\n";
    return 2;
  }
  return 0;
}

struct PenaltyArgs {
  std::string in, out;
  std::optional<double> alpha, beta, gamma, cap;
  std::optional<int> batch;
  bool global_stats = false;
  ConfigArgs cfg;
};

int cmd_penalty(const PenaltyArgs& a) {
  PipelineConfig cfg = resolve_config(a.cfg);
  if (a.alpha) cfg.alpha = *a.alpha;
  if (a.beta) cfg.beta = *a.beta;
  if (a.gamma) cfg.gamma = *a.gamma;
  if (a.cap) cfg.penalty_cap = *a.cap;
  if (a.batch) cfg.batch_size = *a.batch;
  require_valid(cfg);

  Dataset ds = load_dataset(a.in);
  Dataset out = apply_penalties(ds, cfg, a.global_stats);
  save_dataset(out, a.out);
  std::cout << "penalties written for " << out.size() << " samples -> " << a.out << "\n";
  return 0;
}

std::string distill_records_path(const std::string& out) {
  std::string base = out;
  const std::string ext = ".jsonl";
  if (base.size() > ext.size() && base.compare(base.size() - ext.size(), ext.size(), ext) == 0)
    base.resize(base.size() - ext.size());
  return base + ".distill.jsonl";
}

struct DistillArgs {
  std::string in, out;
  std::string base_dir;
  std::string judge = "mock";
  std::string integration = "judge";
  double accuracy = 0.7;
  int threads = 4;
  ConfigArgs cfg;
};

int cmd_distill(const DistillArgs& a) {
  PipelineConfig cfg = resolve_config(a.cfg);
  Dataset ds = load_dataset(a.in);
  ToyGenerator gen(cfg.seed, a.accuracy);
  auto judge = make_judge(a.judge, cfg.seed);
  ScoreOptions opts;
  opts.base_dir = a.base_dir.empty() ? default_base_dir(a.in) : a.base_dir;
  opts.max_threads = a.threads;
  opts.integration = parse_integration(a.integration);

  DistillResult res = distill_round(ds, gen, *judge, cfg, opts);
  save_dataset(res.dataset, a.out);
  std::string records = distill_records_path(a.out);
  write_file_atomic(records, records_to_jsonl(res.records));
  size_t revised = 0;
  for (const auto& r : res.records)
    if (r.verdict == DistillVerdict::Revised) ++revised;
  std::cout << "distilled " << res.records.size() << " samples (" << revised << " revised) -> "
            << a.out << " + " << records << "\n";

  if (!res.failures.empty()) {
    std::string sidecar = a.out + ".failures.jsonl";
    write_file_atomic(sidecar, failures_to_jsonl(res.failures));
    std::cerr << res.failures.size() << " sample(s) failed; see " << sidecar << "\n";
    return 2;
  }
  return 0;
}

struct CurateArgs {
  std::string data;
  std::string run_dir = "curate_run";
  std::optional<int> iters;
  std::vector<int> tau;
  bool resume = false;
  bool rm_on_original = false;
  double accuracy = 0.7;
  std::string judge = "mock";
  int threads = 4;
  int inject_fail_after = -1;
  ConfigArgs cfg;
};

int cmd_curate(const CurateArgs& a) {
  PipelineConfig cfg = resolve_config(a.cfg);
  if (!a.tau.empty()) cfg.tau_schedule = a.tau;
  if (a.iters && *a.iters != static_cast<int>(cfg.tau_schedule.size()))
    throw Error("--iters " + std::to_string(*a.iters) + " does not match the tau schedule length " +
                std::to_string(cfg.tau_schedule.size()));
  require_valid(cfg);

  Dataset ds = load_dataset(a.data);
  MockRewardModel rm(cfg.seed);
  TrainerFactory trainer = make_toy_trainer_factory(cfg.seed);
  ToyGenerator gen(cfg.seed, a.accuracy);
  auto judge = make_judge(a.judge, cfg.seed);

  ScheduleOptions opts;
  opts.run_dir = a.run_dir;
  opts.resume = a.resume;
  opts.rm_on_original = a.rm_on_original;
  opts.fail_after_stages = a.inject_fail_after;
  opts.score.base_dir = default_base_dir(a.data);
  opts.score.max_threads = a.threads;

  auto records = run_hybrid_schedule(ds, rm, trainer, gen, *judge, cfg, opts);
  std::cout << "curation complete: " << records.size() << " iteration records in " << a.run_dir
            << "\n";
  print_records_table(records, std::cout);
  return 0;
}

struct GrpoArgs {
  int steps = 500;
  std::optional<int> group;
  std::optional<double> temp;
  std::optional<double> lr;
  double kl = 0.01;
  int prompts = 16;
  int k = 8;
  std::string out;
  ConfigArgs cfg;
};

int cmd_grpo_train(const GrpoArgs& a) {
  PipelineConfig cfg = resolve_config(a.cfg);
  if (a.group) cfg.group_size = *a.group;
  if (a.temp) cfg.rl_temperature = *a.temp;
  if (a.lr) cfg.rl_learning_rate = *a.lr;
  require_valid(cfg);

  CandidateTask task = make_arithmetic_task(a.prompts, a.k, cfg.seed);
  GrpoOptions opts;
  opts.steps = a.steps;
  opts.kl_coeff = a.kl;
  opts.seed = cfg.seed;
  GrpoResult res = train_grpo(task, cfg, opts);

  fs::create_directories(a.out);
  std::string csv_path = (fs::path(a.out) / "metrics.csv").string();
  write_file_atomic(csv_path, metrics_to_csv(res.metrics));
  if (!res.metrics.empty()) {
    const auto& last = res.metrics.back();
    char line[200];
    std::snprintf(line, sizeof line,
                  "step %d: mean_reward %.4f  mean_acc %.4f  mean_fmt %.4f  kl %.5f\n", last.step,
                  last.mean_reward, last.mean_acc, last.mean_fmt, last.kl);
    std::cout << line;
  }
  std::cout << "metrics -> " << csv_path << "\n";
  return 0;
}

struct AdapterArgs {
  int n = 256;
  int dv = 32, dl = 32, hidden = kAdapterDefaultHidden;
  double similarity = 0.1;
  int budget = 200;
  int seeds = 5;
  double noise = 0.01;
  int train_steps = 2000;
  double lr = kAdapterDefaultLr;
  std::string out;
  ConfigArgs cfg;
};

int cmd_adapter_sim(const AdapterArgs& a) {
  PipelineConfig cfg = resolve_config(a.cfg);
  std::vector<TransferReport> reports;
  int transferred_wins = 0;
  for (int i = 0; i < a.seeds; ++i) {
    SpaceConfig sc;
    sc.n = a.n;
    sc.d_v = a.dv;
    sc.d_l = a.dl;
    sc.noise = a.noise;
    sc.similarity = a.similarity;
    sc.seed = cfg.seed + static_cast<uint64_t>(i);
    SyntheticSpaces spaces = make_spaces(sc);
    AdapterMLP init = AdapterMLP::init(a.dv, a.hidden, a.dl, sc.seed);
    TrainResult pre = train_adapter(spaces, TargetSpace::Substitute, init, a.train_steps, a.lr);
    TransferReport rep = transfer_eval(pre.adapter, spaces, a.budget, a.lr);
    if (rep.finetuned_transferred && rep.fresh_final &&
        *rep.finetuned_transferred <= *rep.fresh_final)
      ++transferred_wins;
    reports.push_back(rep);
  }

  std::string csv = transfer_report_csv(reports);
  std::cout << csv;
  if (a.budget > 0)
    std::cout << "transferred-weights run matched or beat the fresh run in " << transferred_wins
              << "/" << a.seeds << " seeds at budget " << a.budget << "\n";
  if (!a.out.empty()) {
    write_file_atomic(a.out, csv);
    std::cout << "csv -> " << a.out << "\n";
  }
  return 0;
}

struct PipelineArgs {
  std::string data;
  std::string out;
  bool resume = false;
  bool rm_on_original = false;
  double accuracy = 0.7;
  std::string judge = "mock";
  int threads = 4;
  int grpo_steps = 100;
  int inject_fail_after = -1;
  std::string command_line;
  ConfigArgs cfg;
};

int cmd_pipeline(const PipelineArgs& a) {
  PipelineConfig cfg = resolve_config(a.cfg);
  Dataset data = load_dataset(a.data);
  fs::create_directories(a.out);
  const std::string man_path = (fs::path(a.out) / "manifest.json").string();
  const std::string data_hash = to_hex(dataset_hash(data));

  RunManifest man;
  if (a.resume && fs::exists(man_path)) {
    man = RunManifest::load(man_path);
    if (man.input_hashes.count("data") == 0 || man.input_hashes.at("data") != data_hash)
      throw Error("resume refused: input dataset changed since the original run");
    if (!(man.config == cfg))
      throw Error("resume refused: config changed since the original run");
  } else {
    man.command_line = a.command_line;
    man.config = cfg;
    man.input_hashes["data"] = data_hash;
  }

  auto rel = [&](const std::string& name) { return (fs::path(a.out) / name).string(); };
  int completed = 0;
  auto checkpoint = [&](const std::string& name) {
    ++completed;
    if (a.inject_fail_after == completed)
      throw Error("injected stage failure after " + name);
  };

  auto judge = make_judge(a.judge, cfg.seed);
  ScoreOptions sopts;
  sopts.base_dir = default_base_dir(a.data);
  sopts.max_threads = a.threads;

  // ---- score
  Dataset scored;
  if (man.stage_done("score")) {
    scored = load_dataset(rel("scored.jsonl"));
  } else {
    man.begin_stage("score");
    man.save(man_path);
    try {
      ScoreResult res = score_dataset(data, *judge, sopts);
      if (!res.failures.empty()) {
        std::string sidecar = rel("scored.failures.jsonl");
        write_file_atomic(sidecar, failures_to_jsonl(res.failures));
        man.fail_stage("score", std::to_string(res.failures.size()) + " sample(s) failed scoring");
        man.save(man_path);
        std::cerr << res.failures.size() << " sample(s) failed scoring; see " << sidecar << "\n";
        return 2;
      }
      scored = res.dataset;
      save_dataset(scored, rel("scored.jsonl"));
      man.finish_stage("score", {"scored.jsonl"}, {{"dataset", to_hex(dataset_hash(scored))}});
      man.save(man_path);
    } catch (const Error& e) {
      man.fail_stage("score", e.what());
      man.save(man_path);
      throw;
    }
  }
  checkpoint("score");

  // ---- penalty
  Dataset penalized;
  if (man.stage_done("penalty")) {
    penalized = load_dataset(rel("penalized.jsonl"));
  } else {
    man.begin_stage("penalty");
    man.save(man_path);
    try {
      penalized = apply_penalties(scored, cfg, /*global_stats=*/false);
      save_dataset(penalized, rel("penalized.jsonl"));
      man.finish_stage("penalty", {"penalized.jsonl"},
                       {{"dataset", to_hex(dataset_hash(penalized))}});
      man.save(man_path);
    } catch (const Error& e) {
      man.fail_stage("penalty", e.what());
      man.save(man_path);
      throw;
    }
  }
  checkpoint("penalty");

  // ---- distill (the round whose output feeds curation as-is)
  Dataset distilled;
  if (man.stage_done("distill")) {
    distilled = load_dataset(rel("distilled.jsonl"));
  } else {
    man.begin_stage("distill");
    man.save(man_path);
    try {
      ToyGenerator gen(cfg.seed, a.accuracy);
      DistillResult res = distill_round(penalized, gen, *judge, cfg, sopts);
      if (!res.failures.empty())
        throw Error(std::to_string(res.failures.size()) +
                    " sample(s) failed the distill round (first: " + res.failures[0].second + ")");
      distilled = res.dataset;
      save_dataset(distilled, rel("distilled.jsonl"));
      write_file_atomic(rel("distilled.distill.jsonl"), records_to_jsonl(res.records));
      man.finish_stage("distill", {"distilled.jsonl", "distilled.distill.jsonl"},
                       {{"dataset", to_hex(dataset_hash(distilled))}});
      man.save(man_path);
    } catch (const Error& e) {
      man.fail_stage("distill", e.what());
      man.save(man_path);
      throw;
    }
  }
  checkpoint("distill");

  // ---- curate (nested schedule with its own manifest under curate/)
  if (!man.stage_done("curate")) {
    man.begin_stage("curate");
    man.save(man_path);
    try {
      MockRewardModel rm(cfg.seed);
      TrainerFactory trainer = make_toy_trainer_factory(cfg.seed);
      ToyGenerator gen(cfg.seed, a.accuracy);
      ScheduleOptions copts;
      copts.run_dir = rel("curate");
      copts.resume = a.resume;
      copts.rm_on_original = a.rm_on_original;
      copts.initial_round_done = true;  // the distill stage above already refreshed the chains
      copts.score = sopts;
      auto records = run_hybrid_schedule(distilled, rm, trainer, gen, *judge, cfg, copts);
      man.records = nlohmann::json::array();
      for (const auto& r : records) man.records.push_back(iteration_record_to_json(r));
      man.finish_stage("curate", {"curate/manifest.json"},
                       {{"records", to_hex(fnv1a64(man.records.dump()))}});
      man.save(man_path);
    } catch (const Error& e) {
      man.fail_stage("curate", e.what());
      man.save(man_path);
      throw;
    }
  }
  checkpoint("curate");

  // ---- grpo over the top-threshold slice of the distilled set
  if (!man.stage_done("grpo")) {
    man.begin_stage("grpo");
    man.save(man_path);
    try {
      MockRewardModel rm(cfg.seed);
      int tau_final = cfg.tau_schedule.empty() ? 0 : cfg.tau_schedule.back();
      Dataset rl_pool = filter_by_reward(distilled, rm, tau_final);
      if (rl_pool.samples.empty()) rl_pool = distilled;
      CandidateTask task = task_from_dataset(rl_pool, cfg.group_size, cfg.seed);
      PipelineConfig rl_cfg = cfg;
      rl_cfg.rl_learning_rate = kPipelineRlLr;
      GrpoOptions gopts;
      gopts.steps = a.grpo_steps;
      gopts.seed = cfg.seed;
      GrpoResult res = train_grpo(task, rl_cfg, gopts);
      std::string csv = metrics_to_csv(res.metrics);
      write_file_atomic(rel("grpo_metrics.csv"), csv);
      man.finish_stage("grpo", {"grpo_metrics.csv"}, {{"metrics", to_hex(fnv1a64(csv))}});
      man.save(man_path);
    } catch (const Error& e) {
      man.fail_stage("grpo", e.what());
      man.save(man_path);
      throw;
    }
  }
  checkpoint("grpo");

  std::cout << "pipeline complete: " << man_path << "\nmanifest content hash: "
            << man.content_hash() << "\n";
  return 0;
}

struct ReportArgs {
  std::string run;
  bool plot = false;
};

std::vector<double> csv_column(const std::string& text, size_t col) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    size_t start = 0;
    for (size_t c = 0; c < col; ++c) {
      size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        start = std::string::npos;
        break;
      }
      start = comma + 1;
    }
    if (start == std::string::npos) continue;
    out.push_back(std::stod(line.substr(start)));
  }
  return out;
}

int cmd_report(const ReportArgs& a) {
  const std::string man_path = (fs::path(a.run) / "manifest.json").string();
  if (!fs::exists(man_path)) throw Error("no manifest at " + man_path);
  RunManifest man = RunManifest::load(man_path);

  std::cout << "run: " << a.run << "\ncommand: " << man.command_line
            << "\ncontent hash: " << man.content_hash() << "\n\nstages:\n";
  std::cout << "  name          status    ms       artifacts\n";
  for (const auto& st : man.stages) {
    int64_t ms = (st.finished_ms > 0 && st.started_ms > 0) ? st.finished_ms - st.started_ms : 0;
    std::string arts;
    for (size_t i = 0; i < st.artifacts.size(); ++i) {
      if (i) arts += ", ";
      arts += st.artifacts[i];
    }
    char line[512];
    std::snprintf(line, sizeof line, "  %-13s %-9s %-8lld %s\n", st.name.c_str(),
                  st.status.c_str(), static_cast<long long>(ms), arts.c_str());
    std::cout << line;
    if (!st.error.empty()) std::cout << "      error: " << st.error << "\n";
  }

  if (!man.records.empty()) {
    std::vector<IterationRecord> records;
    for (const auto& j : man.records) records.push_back(iteration_record_from_json(j));
    std::cout << "\niteration records:\n";
    print_records_table(records, std::cout);
  }

  if (a.plot) {
    // reward curve from whichever metrics CSV the run produced
    bool plotted = false;
    for (const char* name : {"grpo_metrics.csv", "metrics.csv"}) {
      fs::path csv = fs::path(a.run) / name;
      if (!fs::exists(csv)) continue;
      std::vector<double> rewards = csv_column(slurp_file(csv.string()), 1);
      if (rewards.empty()) continue;
      std::string out = (fs::path(a.run) / "reward_curve.svg").string();
      write_file_atomic(out, line_chart_svg(rewards, "mean reward per step", "step"));
      std::cout << "plot -> " << out << "\n";
      plotted = true;
      break;
    }
    if (!plotted) std::cout << "no metrics CSV found; reward curve skipped\n";

    fs::path pen = fs::path(a.run) / "penalized.jsonl";
    if (fs::exists(pen)) {
      Dataset ds = load_dataset(pen.string());
      std::vector<double> penalties;
      for (const auto& s : ds.samples)
        if (s.scores && s.scores->penalty) penalties.push_back(*s.scores->penalty);
      if (!penalties.empty()) {
        double hi = std::max(2.0, *std::max_element(penalties.begin(), penalties.end()));
        std::string out = (fs::path(a.run) / "penalty_histogram.svg").string();
        write_file_atomic(out,
                          histogram_svg(penalties, 20, 1.0, hi, "repetition penalties", "penalty"));
        std::cout << "plot -> " << out << "\n";
      }
    } else {
      std::cout << "no penalized.jsonl found; penalty histogram skipped\n";
    }
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"adaptive-length distillation, curation, and policy-training toolkit"};
  app.require_subcommand(1);

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "fill per-sample quality scores on a JSONL dataset");
  score->add_option("--in", sa.in, "input dataset (JSONL)")->required();
  score->add_option("--out", sa.out, "output dataset path")->required();
  score->add_option("--base-dir", sa.base_dir, "directory image refs resolve against");
  score->add_option("--judge", sa.judge, "judge backend")->check(CLI::IsMember({"mock", "http"}));
  score->add_option("--integration", sa.integration, "integration scorer")
      ->check(CLI::IsMember({"judge", "local"}));
  score->add_option("--threads", sa.threads, "max worker threads");
  add_config_flags(score, sa.cfg);

  PenaltyArgs pa;
  auto* penalty =
      app.add_subcommand("penalty", "normalize scores and write repetition penalties");
  penalty->add_option("--in", pa.in, "scored dataset (JSONL)")->required();
  penalty->add_option("--out", pa.out, "output dataset path")->required();
  penalty->add_option("--alpha", pa.alpha, "penalty exponent scale");
  penalty->add_option("--beta", pa.beta, "text-score weight");
  penalty->add_option("--gamma", pa.gamma, "integration-score weight");
  penalty->add_option("--cap", pa.cap, "penalty ceiling");
  penalty->add_option("--batch", pa.batch, "normalization batch size");
  penalty->add_flag("--global-stats", pa.global_stats,
                    "normalize over the whole dataset instead of per batch");
  add_config_flags(penalty, pa.cfg);

  DistillArgs da;
  auto* distill =
      app.add_subcommand("distill", "one penalty-controlled generate/verify/revise round");
  distill->add_option("--in", da.in, "input dataset (JSONL)")->required();
  distill->add_option("--out", da.out, "output dataset path")->required();
  distill->add_option("--base-dir", da.base_dir, "directory image refs resolve against");
  distill->add_option("--judge", da.judge, "judge backend")
      ->check(CLI::IsMember({"mock", "http"}));
  distill->add_option("--integration", da.integration, "integration scorer")
      ->check(CLI::IsMember({"judge", "local"}));
  distill->add_option("--accuracy", da.accuracy, "toy generator accuracy")
      ->check(CLI::Range(0.0, 1.0));
  distill->add_option("--threads", da.threads, "max worker threads");
  add_config_flags(distill, da.cfg);

  CurateArgs ca;
  auto* curate = app.add_subcommand("curate", "staged training loop with reward-thresholded data");
  curate->add_option("--data", ca.data, "input dataset (JSONL)")->required();
  curate->add_option("--out", ca.run_dir, "run directory");
  curate->add_option("--iters", ca.iters, "iteration count (must match the tau schedule)");
  curate->add_option("--tau", ca.tau, "comma-separated reward thresholds")->delimiter(',');
  curate->add_flag("--resume", ca.resume, "resume from the run directory's manifest");
  curate->add_flag("--rm-on-original", ca.rm_on_original,
                   "threshold the original dataset instead of refreshed chains");
  curate->add_option("--accuracy", ca.accuracy, "toy generator accuracy")
      ->check(CLI::Range(0.0, 1.0));
  curate->add_option("--judge", ca.judge, "judge backend")->check(CLI::IsMember({"mock", "http"}));
  curate->add_option("--threads", ca.threads, "max worker threads");
  curate->add_option("--inject-fail-after", ca.inject_fail_after)->group("");
  add_config_flags(curate, ca.cfg);

  GrpoArgs ga;
  auto* grpo = app.add_subcommand("grpo-train", "group-relative policy training on a bundled task");
  grpo->add_option("--steps", ga.steps, "training steps")->check(CLI::PositiveNumber);
  grpo->add_option("--group", ga.group, "rollout group size G");
  grpo->add_option("--temp", ga.temp, "sampling temperature");
  grpo->add_option("--lr", ga.lr, "policy learning rate");
  grpo->add_option("--kl", ga.kl, "KL coefficient toward the reference policy");
  grpo->add_option("--prompts", ga.prompts, "task prompt count")->check(CLI::PositiveNumber);
  grpo->add_option("--k", ga.k, "candidate completions per prompt");
  grpo->add_option("--out", ga.out, "run directory")->required();
  add_config_flags(grpo, ga.cfg);

  AdapterArgs aa;
  auto* adapter =
      app.add_subcommand("adapter-sim", "synthetic adapter-transfer study across seeds");
  adapter->add_option("--n", aa.n, "feature rows")->check(CLI::PositiveNumber);
  adapter->add_option("--dv", aa.dv, "vision dimension")->check(CLI::PositiveNumber);
  adapter->add_option("--dl", aa.dl, "language dimension")->check(CLI::PositiveNumber);
  adapter->add_option("--hidden", aa.hidden, "adapter hidden width")->check(CLI::PositiveNumber);
  adapter->add_option("--similarity", aa.similarity, "relative map difference in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  adapter->add_option("--budget", aa.budget, "fine-tuning steps after transfer")
      ->check(CLI::NonNegativeNumber);
  adapter->add_option("--seeds", aa.seeds, "number of seeds")->check(CLI::PositiveNumber);
  adapter->add_option("--noise", aa.noise, "target noise scale");
  adapter->add_option("--train-steps", aa.train_steps, "substitute-space pretraining steps")
      ->check(CLI::PositiveNumber);
  adapter->add_option("--lr", aa.lr, "gradient-descent learning rate");
  adapter->add_option("--out", aa.out, "write the CSV here as well");
  add_config_flags(adapter, aa.cfg);

  PipelineArgs pla;
  pla.command_line = join_args(argc, argv);
  auto* pipeline =
      app.add_subcommand("pipeline", "score -> penalty -> distill -> curate -> policy training");
  pipeline->add_option("--data", pla.data, "input dataset (JSONL)")->required();
  pipeline->add_option("--out", pla.out, "run directory")->required();
  pipeline->add_flag("--resume", pla.resume, "resume from the run directory's manifest");
  pipeline->add_flag("--rm-on-original", pla.rm_on_original,
                     "threshold the original dataset instead of refreshed chains");
  pipeline->add_option("--accuracy", pla.accuracy, "toy generator accuracy")
      ->check(CLI::Range(0.0, 1.0));
  pipeline->add_option("--judge", pla.judge, "judge backend")
      ->check(CLI::IsMember({"mock", "http"}));
  pipeline->add_option("--threads", pla.threads, "max worker threads");
  pipeline->add_option("--grpo-steps", pla.grpo_steps, "policy training steps")
      ->check(CLI::PositiveNumber);
  pipeline->add_option("--inject-fail-after", pla.inject_fail_after)->group("");
  add_config_flags(pipeline, pla.cfg);

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "print a run directory's manifest and records");
  report->add_option("--run", ra.run, "run directory")->required();
  report->add_flag("--plot", ra.plot, "write SVG charts (reward curve, penalty histogram)");

  int rc = 0;
  score->callback([&] { rc = cmd_score(sa); });
  penalty->callback([&] { rc = cmd_penalty(pa); });
  distill->callback([&] { rc = cmd_distill(da); });
  curate->callback([&] { rc = cmd_curate(ca); });
  grpo->callback([&] { rc = cmd_grpo_train(ga); });
  adapter->callback([&] { rc = cmd_adapter_sim(aa); });
  pipeline->callback([&] { rc = cmd_pipeline(pla); });
  report->callback([&] { rc = cmd_report(ra); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

}  // namespace rlab
