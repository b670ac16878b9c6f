#include "rlab/judge.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "rlab/answers.hpp"
#include "rlab/hash.hpp"

namespace rlab {

const char* task_name(JudgeTask t) {
  switch (t) {
    case JudgeTask::TextProperties: return "text_properties";
    case JudgeTask::Necessity: return "necessity";
    case JudgeTask::Integration: return "integration";
    case JudgeTask::VerifyAnswer: return "verify_answer";
    case JudgeTask::ReviseReasoning: return "revise_reasoning";
  }
  return "unknown";
}

void validate_request(const JudgeRequest& req) {
  auto need = [&](const std::optional<std::string>& field, const char* name) {
    if (!field || field->empty()) {
      throw Error(std::string("judge request '") + task_name(req.kind) + "' requires field '" + name + "'");
    }
  };
  if (req.question.empty() && req.kind != JudgeTask::VerifyAnswer) {
    throw Error(std::string("judge request '") + task_name(req.kind) + "' requires a question");
  }
  switch (req.kind) {
    case JudgeTask::VerifyAnswer:
      need(req.candidate, "candidate");
      need(req.gold, "gold");
      break;
    case JudgeTask::ReviseReasoning:
      need(req.candidate, "candidate");
      need(req.gold, "gold");
      break;
    default:
      break;
  }
}

JudgeVerdict judge_call(const JudgeRequest& req, const JudgeBackend& backend) {
  validate_request(req);
  JudgeVerdict v = backend.call(req);
  for (auto& [criterion, score] : v.scores) {
    score = std::clamp(score, 0, 5);
  }
  return v;
}

// ---- mock ----

namespace {

int hashed_score(uint64_t seed, const JudgeRequest& req, const char* criterion) {
  std::string payload = req.question;
  if (req.image_desc) payload += "\x1f" + *req.image_desc;
  uint64_t h = hash_fields({payload, criterion, std::to_string(seed)});
  return static_cast<int>(h % 6);
}

}  // namespace

JudgeVerdict MockJudge::call(const JudgeRequest& req) const {
  JudgeVerdict v;
  std::ostringstream raw;
  raw << "mock/" << task_name(req.kind) << " seed=" << seed_;
  switch (req.kind) {
    case JudgeTask::TextProperties:
      v.scores["question_quality"] = hashed_score(seed_, req, "question_quality");
      v.scores["difficulty"] = hashed_score(seed_, req, "difficulty");
      v.scores["reasoning_demand"] = hashed_score(seed_, req, "reasoning_demand");
      break;
    case JudgeTask::Necessity:
      v.scores["necessity"] = hashed_score(seed_, req, "necessity");
      break;
    case JudgeTask::Integration:
      v.scores["integration"] = hashed_score(seed_, req, "integration");
      break;
    case JudgeTask::VerifyAnswer: {
      std::string candidate = extract_answer(*req.candidate).value_or(*req.candidate);
      v.correct = answers_match(candidate, *req.gold);
      raw << " candidate=" << candidate;
      break;
    }
    case JudgeTask::ReviseReasoning:
      v.revised_think =
          "Re-deriving the result step by step: the earlier chain reaches an unsupported "
          "conclusion, and reworking the final step shows the answer is " +
          *req.gold;
      break;
  }
  v.raw = raw.str();
  return v;
}

// ---- strict reply layout parsing ----

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::map<std::string, std::string> parse_kv_lines(const std::string& content) {
  std::map<std::string, std::string> kv;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = lower(trim(line.substr(0, colon)));
    std::string value = trim(line.substr(colon + 1));
    if (!key.empty() && !value.empty()) kv[key] = value;
  }
  return kv;
}

int parse_score_value(const std::string& value, const std::string& key, const std::string& raw) {
  try {
    size_t used = 0;
    int v = std::stoi(value, &used);
    (void)used;
    return v;
  } catch (const std::exception&) {
    throw Error("judge reply has non-integer score for '" + key + "'; raw reply:\n" + raw);
  }
}

}  // namespace

JudgeVerdict parse_judge_reply(JudgeTask t, const std::string& content) {
  JudgeVerdict v;
  v.raw = content;
  if (t == JudgeTask::ReviseReasoning) {
    std::string chain = trim(content);
    if (chain.empty()) throw Error("judge reply carries no revised chain; raw reply:\n" + content);
    v.revised_think = chain;
    return v;
  }
  auto kv = parse_kv_lines(content);
  auto need = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw Error(std::string("judge reply misses field '") + key + "'; raw reply:\n" + content);
    }
    return it->second;
  };
  switch (t) {
    case JudgeTask::TextProperties:
      for (const char* key : {"question_quality", "difficulty", "reasoning_demand"}) {
        v.scores[key] = parse_score_value(need(key), key, content);
      }
      break;
    case JudgeTask::Necessity:
      v.scores["necessity"] = parse_score_value(need("necessity"), "necessity", content);
      break;
    case JudgeTask::Integration:
      v.scores["integration"] = parse_score_value(need("integration"), "integration", content);
      break;
    case JudgeTask::VerifyAnswer: {
      std::string ans = lower(need("correct"));
      if (ans == "yes" || ans == "true") v.correct = true;
      else if (ans == "no" || ans == "false") v.correct = false;
      else throw Error("judge reply has non-yes/no 'correct' field; raw reply:\n" + content);
      break;
    }
    case JudgeTask::ReviseReasoning:
      break;
  }
  return v;
}

}  // namespace rlab
