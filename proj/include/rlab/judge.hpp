#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "rlab/core.hpp"

namespace rlab {

enum class JudgeTask { TextProperties, Necessity, Integration, VerifyAnswer, ReviseReasoning };

const char* task_name(JudgeTask t);

struct JudgeRequest {
  JudgeTask kind = JudgeTask::TextProperties;
  std::string question;
  std::optional<std::string> image_desc;
  std::optional<std::string> candidate;  // chain or full response under review
  std::optional<std::string> gold;
};

struct JudgeVerdict {
  std::map<std::string, int> scores;  // criterion -> 0..5
  std::optional<bool> correct;
  std::optional<std::string> revised_think;
  std::string raw;  // transcript for debugging / error surfacing
};

struct JudgeBackend {
  virtual ~JudgeBackend() = default;
  virtual JudgeVerdict call(const JudgeRequest& req) const = 0;
};

// Throws when payload fields required by req.kind are missing.
void validate_request(const JudgeRequest& req);

// Validates, delegates to the backend, clamps integer scores to 0..5.
JudgeVerdict judge_call(const JudgeRequest& req, const JudgeBackend& backend);

// Fully deterministic offline judge. Criterion scores are derived from a
// stable hash of the payload text and the seed; VerifyAnswer compares
// normalized answers; ReviseReasoning emits a template chain that ends
// with the gold answer.
class MockJudge : public JudgeBackend {
 public:
  explicit MockJudge(uint64_t seed = 0) : seed_(seed) {}
  JudgeVerdict call(const JudgeRequest& req) const override;
  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
};

// ---- HTTP chat-completion backend ----

struct HttpJudgeOptions {
  std::string url;    // e.g. http://host:port/v1/chat/completions
  std::string token;  // bearer token, may be empty
  std::string model;
  int max_attempts = 3;
  int backoff_ms = 100;
  int max_inflight = 4;
  double timeout_s = 30.0;
  std::string cache_dir;  // empty disables the on-disk response cache
};

// Reads RLAB_JUDGE_URL, RLAB_JUDGE_TOKEN, RLAB_JUDGE_MODEL.
HttpJudgeOptions http_options_from_env();

class HttpJudge : public JudgeBackend {
 public:
  explicit HttpJudge(HttpJudgeOptions opts);
  ~HttpJudge() override;
  JudgeVerdict call(const JudgeRequest& req) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---- prompt templates (versioned fixtures, v1) ----

// Embedded template text for a task; data/prompts/ ships the same text.
const std::string& prompt_template(JudgeTask t);
std::string prompt_template_filename(JudgeTask t);

// Fills the {question}/{image}/{candidate}/{gold} placeholders.
std::string render_prompt(const JudgeRequest& req);

// Parses a judge reply in the strict `criterion: value` layout for the
// given task. Throws Error (carrying the raw content) on violations.
JudgeVerdict parse_judge_reply(JudgeTask t, const std::string& content);

}  // namespace rlab
