#include <doctest.h>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rlab/integration.hpp"

using namespace rlab;
namespace fs = std::filesystem;

namespace {

// Independent counting oracle: substring search over a space-normalized
// copy of the question, instead of the library's token-vector walk.
struct OracleCounter {
  std::string hay;

  explicit OracleCounter(const std::string& q) {
    std::string raw;
    for (char ch : q) {
      unsigned char c = static_cast<unsigned char>(ch);
      raw += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : ' ';
    }
    hay = " ";
    bool prev_space = true;
    for (char c : raw) {
      if (c == ' ') {
        if (!prev_space) {
          hay += ' ';
          prev_space = true;
        }
      } else {
        hay += c;
        prev_space = false;
      }
    }
    if (hay.back() != ' ') hay += ' ';
  }

  int count(const std::string& phrase) const {
    std::string needle = " " + phrase + " ";
    int n = 0;
    for (size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1))
      ++n;
    return n;
  }

  int count_any(const std::vector<std::string>& phrases) const {
    int n = 0;
    for (const auto& p : phrases) n += count(p);
    return n;
  }
};

PatternFeatures oracle_scan(const std::string& q, const std::vector<std::string>& lexicon) {
  static const std::vector<std::string> kTriggers = {"still", "again", "stop", "manage to",
                                                     "know that"};
  static const std::vector<std::string> kMulti = {
      "both", "several", "many",    "multiple", "these",  "those",   "them",
      "pair", "group",   "between", "beside",   "behind", "above",   "below",
      "left", "right",   "nearest", "closest",  "objects", "items",  "shapes"};
  static const std::vector<std::string> kCoupling = {"image",    "picture", "figure", "diagram",
                                                     "photo",    "shown",   "graph",  "chart",
                                                     "depicted", "scene"};
  OracleCounter c(q);
  PatternFeatures f;
  int why_how = c.count("why") + c.count("how");
  f.causal_connectives = why_how + (why_how > 0 ? c.count_any(kTriggers) : 0);
  int what_where = c.count("what") + c.count("where");
  f.simple_interrogatives = c.count("the") > 0 ? what_where : 0;
  f.multi_object_refs = c.count_any(kMulti);
  f.domain_terms = c.count_any(lexicon);
  f.text_visual_coupling = c.count_any(kCoupling) > 0;
  return f;
}

bool same(const PatternFeatures& a, const PatternFeatures& b) {
  return a.causal_connectives == b.causal_connectives &&
         a.simple_interrogatives == b.simple_interrogatives &&
         a.multi_object_refs == b.multi_object_refs && a.domain_terms == b.domain_terms &&
         a.text_visual_coupling == b.text_visual_coupling;
}

}  // namespace

TEST_CASE("pattern scan on hand-checked questions") {
  auto f = lexical_pattern_scan("Why does the ball still roll?", builtin_lexicon());
  CHECK(f.causal_connectives == 2);  // why + trigger "still"
  CHECK(f.simple_interrogatives == 0);
  CHECK_FALSE(f.text_visual_coupling);

  f = lexical_pattern_scan("What is the time?", builtin_lexicon());
  CHECK(f.causal_connectives == 0);
  CHECK(f.simple_interrogatives == 1);

  f = lexical_pattern_scan("What color", builtin_lexicon());
  CHECK(f.simple_interrogatives == 0);  // no definite article

  f = lexical_pattern_scan("How many objects lie between the two shapes shown in the image?",
                           builtin_lexicon());
  CHECK(f.causal_connectives == 1);
  CHECK(f.multi_object_refs == 4);  // many, objects, between, shapes
  CHECK(f.text_visual_coupling);

  // "still" alone is not causal without why/how
  f = lexical_pattern_scan("The wheel is still.", builtin_lexicon());
  CHECK(f.causal_connectives == 0);

  // word boundaries: "whyever"/"showner" must not count
  f = lexical_pattern_scan("Whyever the showner left", builtin_lexicon());
  CHECK(f.causal_connectives == 0);
  CHECK_FALSE(f.text_visual_coupling);

  // multi-word lexicon term
  f = lexical_pattern_scan("Is 7 a prime number?", builtin_lexicon());
  CHECK(f.domain_terms == 1);

  CHECK_THROWS_AS(lexical_pattern_scan("", builtin_lexicon()), Error);
}

TEST_CASE("pattern scan agrees with the substring oracle on a 200-question corpus") {
  const std::vector<std::string> lead = {"Why",   "How",       "What",        "Where",
                                         "Count", "Determine", "Explain why", "Explain"};
  const std::vector<std::string> mid = {"does the",  "do these", "is a",     "are both",
                                        "would many", "can the",  "did them", "might several"};
  const std::vector<std::string> obj = {"triangle", "triangles",          "circuit diagram",
                                        "numbers",  "prime number",       "shapes in the image",
                                        "items",    "group of electrons"};
  const std::vector<std::string> tail = {"still balance",        "change again",
                                         "stop moving",          "relate to the chart",
                                         "sum to ten",           "appear in the picture",
                                         "hold, you know that",  "manage to align"};
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    std::string q = lead[i % 8] + " " + mid[(i / 8) % 8] + " " + obj[(i / 3) % 8] + " " +
                    tail[(i / 5) % 8] + "?";
    PatternFeatures got = lexical_pattern_scan(q, builtin_lexicon());
    PatternFeatures want = oracle_scan(q, builtin_lexicon());
    INFO("question: " << q);
    CHECK(same(got, want));
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("integration map respects caps, clamps, and monotonicity") {
  PatternFeatures none;
  CHECK(integration_from_features(none) == doctest::Approx(2.0));  // bare baseline

  PatternFeatures maxed;
  maxed.causal_connectives = 50;
  maxed.multi_object_refs = 50;
  maxed.domain_terms = 50;
  CHECK(integration_from_features(maxed) == doctest::Approx(5.0));  // capped then clamped

  PatternFeatures simple_only;
  simple_only.simple_interrogatives = 9;
  CHECK(integration_from_features(simple_only) == doctest::Approx(0.0));  // floor clamp

  PatternFeatures f;
  f.causal_connectives = 1;
  double base = integration_from_features(f);
  f.multi_object_refs = 1;
  double more = integration_from_features(f);
  CHECK(more >= base);
  f.simple_interrogatives = 1;
  CHECK(integration_from_features(f) <= more);
}

TEST_CASE("integration_score modes") {
  Sample s;
  s.id = "v";
  s.question = "Why do both gears still mesh in the diagram?";

  struct Nine : JudgeBackend {
    JudgeVerdict call(const JudgeRequest& req) const override {
      REQUIRE(req.kind == JudgeTask::Integration);
      JudgeVerdict v;
      v.scores["integration"] = 9;  // judge_call clamps this
      return v;
    }
  } judge;
  CHECK(integration_score(s, IntegrationMode::Judge, &judge) == doctest::Approx(5.0));
  CHECK_THROWS_AS(integration_score(s, IntegrationMode::Judge, nullptr), Error);

  // LocalRules: why + still trigger (capped at 2), both + diagram coupling
  double local = integration_score(s, IntegrationMode::LocalRules);
  CHECK(local == doctest::Approx(5.0));  // 2 + 2*2 + 1*1 = 7 -> clamp 5
}

TEST_CASE("lexicon file parsing and the shipped lexicon") {
  fs::path p = fs::temp_directory_path() / "rlab_lexicon.txt";
  {
    std::ofstream f(p);
    f << "# comment line\n"
      << "  Angle  \n"
      << "prime NUMBER # trailing note\n"
      << "\n"
      << "slope\n";
  }
  auto terms = load_lexicon(p.string());
  REQUIRE(terms.size() == 3);
  CHECK(terms[0] == "angle");
  CHECK(terms[1] == "prime number");
  CHECK(terms[2] == "slope");
  fs::remove(p);

  CHECK_THROWS_AS(load_lexicon("/nonexistent/lexicon.txt"), Error);

  auto shipped = load_lexicon((fs::path(RLAB_REPO_DIR) / "data" / "lexicon.txt").string());
  CHECK(shipped == builtin_lexicon());
}
