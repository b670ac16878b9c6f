#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <set>
#include <vector>

#include "rlab/core.hpp"
#include "rlab/hash.hpp"
#include "rlab/jsonl.hpp"
#include "rlab/rng.hpp"

using namespace rlab;
namespace fs = std::filesystem;

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("incremental hashing equals one-shot hashing") {
  Fnv1a h;
  h.update("hello ");
  h.update("world");
  CHECK(h.digest() == fnv1a64("hello world"));
}

TEST_CASE("hash_fields separates fields") {
  CHECK(hash_fields({"ab", "c"}) != hash_fields({"a", "bc"}));
  CHECK(hash_fields({"ab", "c"}) != hash_fields({"ab", "c", ""}));
  CHECK(hash_fields({"x"}) == hash_fields({"x"}));
}

TEST_CASE("to_hex is 16 lowercase hex digits") {
  CHECK(to_hex(0) == "0000000000000000");
  CHECK(to_hex(0xdeadbeefULL) == "00000000deadbeef");
}

TEST_CASE("rng is deterministic per seed and seed-sensitive") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  bool differs = false;
  Rng a2(42);
  for (int i = 0; i < 100; ++i)
    if (a2.next_u64() != c.next_u64()) differs = true;
  CHECK(differs);
}

TEST_CASE("rng uniform lies in [0,1) and below(n) in [0,n)") {
  Rng r(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.05);  // spread sanity
  CHECK(hi > 0.95);
  std::set<uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    uint64_t v = r.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("rng normal has roughly standard moments") {
  Rng r(11);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    sum += x;
    sq += x * x;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("dataset append rejects duplicate ids, find locates") {
  Dataset ds;
  Sample s;
  s.id = "a";
  s.question = "q";
  s.gold_answer = "1";
  ds.append(s);
  CHECK_THROWS_AS(ds.append(s), Error);
  CHECK(ds.find("a") != nullptr);
  CHECK(ds.find("b") == nullptr);
}

TEST_CASE("default config is valid; broken fields are reported") {
  PipelineConfig cfg;
  CHECK(validate_config(cfg).empty());
  CHECK(cfg.tau_schedule == std::vector<int>{2, 3, 4, 5});

  cfg.alpha = 0.0;
  CHECK_FALSE(validate_config(cfg).empty());
  cfg = PipelineConfig{};
  cfg.tau_schedule = {3, 2};
  CHECK_FALSE(validate_config(cfg).empty());
  cfg.tau_schedule = {2, 9};
  CHECK_FALSE(validate_config(cfg).empty());
  cfg = PipelineConfig{};
  cfg.group_size = 1;
  CHECK_THROWS_AS(require_valid(cfg), Error);
}

TEST_CASE("render_completion wraps think and appends the final response") {
  Sample s;
  s.think = "step one";
  s.final_response = "Answer: \\boxed{4}";
  CHECK(render_completion(s) == "<think>step one</think>\nAnswer: \\boxed{4}");
  s.think.reset();
  CHECK(render_completion(s) == "Answer: \\boxed{4}");
}

TEST_CASE("for_each_parallel covers every index exactly once") {
  for (int threads : {1, 4}) {
    const size_t n = 257;
    std::vector<std::atomic<int>> hits(n);
    for_each_parallel(n, threads, [&](size_t i) { hits[i].fetch_add(1); });
    for (size_t i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
  }
}

static Sample make_full_sample() {
  Sample s;
  s.id = "s1";
  s.image_ref = "img/x.pgm";
  s.question = "What is 2 + 2?";
  s.gold_answer = "4";
  s.think = "add them";
  s.final_response = "Answer: \\boxed{4}";
  s.meta["caption"] = "two pairs";
  ScoreBundle b;
  b.clarity = 0.5;
  b.necessity = 3;
  b.question_quality = 4;
  b.difficulty = 2;
  b.reasoning_demand = 1;
  b.s_v = 2.75;
  b.s_t = 7.0 / 3.0;
  b.s_i = 2.0;
  b.s_v_hat = 0.5;
  b.penalty = 1.5;
  s.scores = b;
  s.rm_score = 4;
  return s;
}

TEST_CASE("jsonl round-trips every field and is byte-stable") {
  Dataset ds;
  ds.append(make_full_sample());
  Sample bare;
  bare.id = "s2";
  bare.question = "q";
  bare.gold_answer = "0";
  ds.append(bare);

  std::string text = dataset_to_jsonl(ds);
  Dataset back = dataset_from_jsonl(text);
  CHECK(back == ds);
  CHECK(dataset_to_jsonl(back) == text);
  CHECK(dataset_hash(back) == dataset_hash(ds));

  Dataset mutated = ds;
  mutated.samples[1].gold_answer = "1";
  CHECK(dataset_hash(mutated) != dataset_hash(ds));
}

TEST_CASE("jsonl loading rejects garbage") {
  CHECK_THROWS_AS(dataset_from_jsonl("not json\n"), Error);
  CHECK_THROWS_AS(dataset_from_jsonl("{\"id\":\"a\"}\n"), Error);  // missing keys
  CHECK_THROWS_AS(load_dataset("/nonexistent/nope.jsonl"), Error);
}

TEST_CASE("config json round-trip and unknown-key rejection") {
  PipelineConfig cfg;
  cfg.alpha = 0.9;
  cfg.tau_schedule = {1, 4};
  cfg.seed = 99;
  nlohmann::json j = config_to_json(cfg);
  PipelineConfig back = config_from_json(j, "<test>");
  CHECK(back == cfg);

  j["surprise"] = 1;
  CHECK_THROWS_AS(config_from_json(j, "<test>"), Error);

  fs::path p = fs::temp_directory_path() / "rlab_cfg_roundtrip.json";
  save_config(cfg, p.string());
  CHECK(load_config(p.string()) == cfg);
  fs::remove(p);
}

TEST_CASE("write_file_atomic replaces content completely") {
  fs::path p = fs::temp_directory_path() / "rlab_atomic.txt";
  write_file_atomic(p.string(), "first version, long content here");
  write_file_atomic(p.string(), "v2");
  CHECK(slurp_file(p.string()) == "v2");
  fs::remove(p);
}
