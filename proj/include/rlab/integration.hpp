#pragma once

#include <string>
#include <vector>

#include "rlab/core.hpp"
#include "rlab/judge.hpp"

// Vision-text integration analysis. Produces the integration score s_i,
// either directly from the judge or from local lexical pattern rules.

namespace rlab {

struct PatternFeatures {
  int causal_connectives = 0;     // why/how, boosted by presupposition triggers
  int simple_interrogatives = 0;  // what/where with a definite article
  int multi_object_refs = 0;      // plural/spatial reference words
  int domain_terms = 0;           // lexicon hits
  bool text_visual_coupling = false;
};

enum class IntegrationMode { Judge, LocalRules };

// Coefficients for the LocalRules linear map. Only monotonicity (up in
// causal/multi/domain, down in simple) is contractual; the numbers are
// tunable.
struct VtiaRuleWeights {
  double causal = 2.0;
  int causal_cap = 2;
  double multi_object = 1.0;
  int multi_object_cap = 2;
  double domain = 1.0;
  int domain_cap = 1;
  double simple = 1.0;  // subtracted
  int simple_cap = 2;
  double baseline = 2.0;
};

// Lexicon files: one lowercase term per line, '#' comments allowed.
std::vector<std::string> load_lexicon(const std::string& path);
const std::vector<std::string>& builtin_lexicon();

// Case-insensitive word-boundary scan; no judge involved.
PatternFeatures lexical_pattern_scan(const std::string& question,
                                     const std::vector<std::string>& lexicon);

// LocalRules map: clamp(0, 5, baseline + causal*min(cap,..) + ... - simple*min(cap,..)).
double integration_from_features(const PatternFeatures& f, const VtiaRuleWeights& w = {});

// Judge mode asks for the 0..5 integration verdict; LocalRules mode scans
// the question against the built-in lexicon.
double integration_score(const Sample& s, IntegrationMode mode,
                         const JudgeBackend* judge = nullptr, const VtiaRuleWeights& w = {});

}  // namespace rlab
