#include "rlab/integration.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "rlab/answers.hpp"

namespace rlab {

namespace {

std::vector<std::string> tokenize_lower(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

std::vector<std::string> split_phrase(const std::string& phrase) {
  std::istringstream in(phrase);
  std::vector<std::string> parts;
  std::string w;
  while (in >> w) parts.push_back(w);
  return parts;
}

// Occurrences of a word-boundary phrase inside the token stream.
int count_phrase(const std::vector<std::string>& words, const std::vector<std::string>& phrase) {
  if (phrase.empty() || words.size() < phrase.size()) return 0;
  int count = 0;
  for (size_t i = 0; i + phrase.size() <= words.size(); ++i) {
    bool match = true;
    for (size_t j = 0; j < phrase.size(); ++j) {
      if (words[i + j] != phrase[j]) {
        match = false;
        break;
      }
    }
    if (match) ++count;
  }
  return count;
}

int count_any(const std::vector<std::string>& words, const std::vector<std::string>& needles) {
  int count = 0;
  for (const auto& n : needles) count += count_phrase(words, split_phrase(n));
  return count;
}

// Placeholder presupposition triggers; a deliberately small stand-in list.
const std::vector<std::string>& trigger_words() {
  static const std::vector<std::string> kTriggers = {"still", "again", "stop", "manage to",
                                                     "know that"};
  return kTriggers;
}

const std::vector<std::string>& multi_object_words() {
  static const std::vector<std::string> kWords = {
      "both",  "several", "many",   "multiple", "these", "those",  "them",
      "pair",  "group",   "between", "beside",  "behind", "above",  "below",
      "left",  "right",   "nearest", "closest", "objects", "items", "shapes"};
  return kWords;
}

const std::vector<std::string>& coupling_words() {
  static const std::vector<std::string> kWords = {"image",   "picture", "figure", "diagram",
                                                  "photo",   "shown",   "graph",  "chart",
                                                  "depicted", "scene"};
  return kWords;
}

}  // namespace

const std::vector<std::string>& builtin_lexicon() {
  // Math/physics/chemistry terms; users may supply their own file instead.
  static const std::vector<std::string> kLexicon = {
      "angle",        "triangle",   "equation",     "integral",  "derivative",
      "theorem",      "polynomial", "fraction",     "probability", "matrix",
      "vector",       "geometry",   "algebra",      "perimeter", "radius",
      "diameter",     "hypotenuse", "quadratic",    "logarithm", "exponent",
      "prime number", "slope",      "median",       "ratio",     "velocity",
      "acceleration", "momentum",   "friction",     "voltage",   "current",
      "resistance",   "circuit",    "wavelength",   "frequency", "photon",
      "molecule",     "atom",       "electron",     "ion",       "acid",
      "reaction",     "catalyst",   "isotope",      "entropy",   "gradient"};
  return kLexicon;
}

std::vector<std::string> load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon: " + path);
  std::vector<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string term = trim(line);
    if (term.empty()) continue;
    std::transform(term.begin(), term.end(), term.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    terms.push_back(term);
  }
  return terms;
}

PatternFeatures lexical_pattern_scan(const std::string& question,
                                     const std::vector<std::string>& lexicon) {
  if (question.empty()) throw Error("cannot scan an empty question");
  std::vector<std::string> words = tokenize_lower(question);
  PatternFeatures f;

  int why_how = count_any(words, {"why", "how"});
  f.causal_connectives = why_how;
  if (why_how > 0) f.causal_connectives += count_any(words, trigger_words());

  // Straightforward lookups: what/where paired with a definite article.
  int what_where = count_any(words, {"what", "where"});
  bool definite = count_phrase(words, {"the"}) > 0;
  f.simple_interrogatives = definite ? what_where : 0;

  f.multi_object_refs = count_any(words, multi_object_words());
  f.domain_terms = count_any(words, lexicon);
  f.text_visual_coupling = count_any(words, coupling_words()) > 0;
  return f;
}

double integration_from_features(const PatternFeatures& f, const VtiaRuleWeights& w) {
  double raw = w.baseline + w.causal * std::min(w.causal_cap, f.causal_connectives) +
               w.multi_object * std::min(w.multi_object_cap, f.multi_object_refs) +
               w.domain * std::min(w.domain_cap, f.domain_terms) -
               w.simple * std::min(w.simple_cap, f.simple_interrogatives);
  return std::clamp(raw, 0.0, 5.0);
}

double integration_score(const Sample& s, IntegrationMode mode, const JudgeBackend* judge,
                         const VtiaRuleWeights& w) {
  if (mode == IntegrationMode::Judge) {
    if (judge == nullptr) throw Error("judge mode requires a backend");
    JudgeRequest req;
    req.kind = JudgeTask::Integration;
    req.question = s.question;
    if (s.image_ref) req.image_desc = *s.image_ref;
    JudgeVerdict v = judge_call(req, *judge);
    return static_cast<double>(v.scores.at("integration"));
  }
  return integration_from_features(lexical_pattern_scan(s.question, builtin_lexicon()), w);
}

}  // namespace rlab
