#include <doctest.h>

#include <cmath>
#include <vector>

#include "rlab/penalty.hpp"
#include "rlab/rng.hpp"

using namespace rlab;

static ScoreBundle bundle(double sv, double st, double si) {
  ScoreBundle b;
  b.s_v = sv;
  b.s_t = st;
  b.s_i = si;
  return b;
}

TEST_CASE("normalization is per-channel min-max in input order") {
  std::vector<ScoreBundle> batch = {bundle(0, 5, 2), bundle(5, 0, 2), bundle(2.5, 2.5, 2)};
  auto n = normalize_scores(batch);
  REQUIRE(n.size() == 3);
  CHECK(n[0].s_v_hat == doctest::Approx(0.0));
  CHECK(n[1].s_v_hat == doctest::Approx(1.0));
  CHECK(n[2].s_v_hat == doctest::Approx(0.5));
  CHECK(n[0].s_t_hat == doctest::Approx(1.0));
  CHECK(n[1].s_t_hat == doctest::Approx(0.0));
  // constant channel degenerates to 0.5 everywhere
  for (const auto& x : n) CHECK(x.s_i_hat == doctest::Approx(0.5));
}

TEST_CASE("normalization rejects an empty batch") {
  CHECK_THROWS_AS(normalize_scores({}), Error);
}

TEST_CASE("normalized values stay in [0,1] with extremes attained") {
  Rng r(17);
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = 2 + r.below(30);
    std::vector<ScoreBundle> batch;
    for (size_t i = 0; i < n; ++i)
      batch.push_back(bundle(r.uniform() * 5, r.uniform() * 5, r.uniform() * 5));
    auto out = normalize_scores(batch);
    double lo = 2.0, hi = -1.0;
    for (const auto& x : out) {
      CHECK(x.s_v_hat >= 0.0);
      CHECK(x.s_v_hat <= 1.0);
      lo = std::min(lo, x.s_v_hat);
      hi = std::max(hi, x.s_v_hat);
    }
    CHECK(lo == doctest::Approx(0.0));
    CHECK(hi == doctest::Approx(1.0));
  }
}

TEST_CASE("penalty anchors with the default config") {
  PipelineConfig cfg;
  CHECK(repetition_penalty({1.0, 1.0, 1.0}, cfg) == 1.0);
  CHECK(repetition_penalty({0.0, 0.0, 0.0}, cfg) == 2.0);
  CHECK(repetition_penalty({0.5, 0.5, 0.5}, cfg) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("penalty honors the cap") {
  PipelineConfig cfg;
  cfg.alpha = 10.0;  // exp(10) >> cap
  CHECK(repetition_penalty({0.0, 0.0, 0.0}, cfg) == 2.0);
  cfg.penalty_cap = 1.25;
  CHECK(repetition_penalty({0.0, 0.0, 0.0}, cfg) == 1.25);
}

TEST_CASE("penalty weights the channels by beta and gamma") {
  PipelineConfig cfg;
  cfg.beta = 3.0;
  cfg.gamma = 0.0;
  // weighted mean = (sv + 3*st)/4; st dominates
  double p_low_st = repetition_penalty({1.0, 0.0, 0.0}, cfg);
  double p_high_st = repetition_penalty({0.0, 1.0, 0.0}, cfg);
  CHECK(p_high_st < p_low_st);
  // gamma 0 makes s_i irrelevant
  CHECK(repetition_penalty({0.2, 0.7, 0.0}, cfg) ==
        doctest::Approx(repetition_penalty({0.2, 0.7, 1.0}, cfg)));
}

TEST_CASE("penalty is monotone non-increasing in every channel and bounded") {
  PipelineConfig cfg;
  Rng r(23);
  for (int i = 0; i < 1000; ++i) {
    NormalizedScores a{r.uniform(), r.uniform(), r.uniform()};
    NormalizedScores b = a;
    switch (r.below(3)) {
      case 0: b.s_v_hat = std::min(1.0, a.s_v_hat + r.uniform() * (1 - a.s_v_hat)); break;
      case 1: b.s_t_hat = std::min(1.0, a.s_t_hat + r.uniform() * (1 - a.s_t_hat)); break;
      default: b.s_i_hat = std::min(1.0, a.s_i_hat + r.uniform() * (1 - a.s_i_hat)); break;
    }
    double pa = repetition_penalty(a, cfg);
    double pb = repetition_penalty(b, cfg);
    CHECK(pb <= pa + 1e-15);
    CHECK(pa >= 1.0);
    CHECK(pa <= cfg.penalty_cap);
  }
}
