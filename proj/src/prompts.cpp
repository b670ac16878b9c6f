#include "rlab/judge.hpp"

namespace rlab {

// v1 templates. The same text ships under data/prompts/ so deployments can
// inspect and fork them; a unit test keeps file and embedded copies in sync.

namespace {

const std::string kTextPropertiesV1 = R"(You are grading one question for a training-data pipeline.

Question:
{question}

Rate the question on three criteria, each as an integer from 0 (worst) to 5 (best):
- question_quality: grammatical validity and semantic coherence.
- difficulty: conceptual complexity and the domain knowledge required.
- reasoning_demand: how many inference hops a correct solution needs.

Reply with exactly three lines, one `criterion: score` pair per line, and nothing else:
question_quality: <0-5>
difficulty: <0-5>
reasoning_demand: <0-5>
)";

const std::string kNecessityV1 = R"(You are grading how much a question depends on its image.

Question:
{question}

Image (description or attachment):
{image}

Imagine ablating the image away: could the question still be answered from the text alone?
Score image necessity as an integer from 0 (text is fully self-sufficient) to 5 (the answer
is unrecoverable without the image).

Reply with exactly one line and nothing else:
necessity: <0-5>
)";

const std::string kIntegrationV1 = R"(You are grading how deeply a question requires fusing visual and textual information.

Question:
{question}

Image (description or attachment):
{image}

High-integration questions show causal connectives ("why"/"how") with presupposition
triggers, multiple-object or spatial references, and domain-specific terminology.
Low-integration questions are direct identification queries ("what"/"where" with definite
articles) with minimal text-image dependence.

Reply with exactly one line and nothing else:
integration: <0-5>
)";

const std::string kVerifyAnswerV1 = R"(You are checking whether a model response reaches the reference answer.

Reference answer:
{gold}

Model response:
{candidate}

Judge only the final answer, ignoring the reasoning style. Accept trivially equivalent
forms (case, surrounding whitespace, "7.0" vs "7").

Reply with exactly one line and nothing else:
correct: <yes|no>
)";

const std::string kReviseReasoningV1 = R"(A reasoning chain below ends in the wrong conclusion. Rewrite it so the steps are sound
and the conclusion matches the reference answer.

Question:
{question}

Reference answer:
{gold}

Faulty chain:
{candidate}

Reply with only the revised reasoning chain, no markers or commentary, ending with the
reference answer.
)";

void replace_all(std::string& text, const std::string& key, const std::string& value) {
  size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
}

}  // namespace

const std::string& prompt_template(JudgeTask t) {
  switch (t) {
    case JudgeTask::TextProperties: return kTextPropertiesV1;
    case JudgeTask::Necessity: return kNecessityV1;
    case JudgeTask::Integration: return kIntegrationV1;
    case JudgeTask::VerifyAnswer: return kVerifyAnswerV1;
    case JudgeTask::ReviseReasoning: return kReviseReasoningV1;
  }
  return kTextPropertiesV1;
}

std::string prompt_template_filename(JudgeTask t) {
  return std::string(task_name(t)) + "_v1.txt";
}

std::string render_prompt(const JudgeRequest& req) {
  std::string text = prompt_template(req.kind);
  replace_all(text, "{question}", req.question);
  replace_all(text, "{image}", req.image_desc.value_or("(no image provided)"));
  replace_all(text, "{candidate}", req.candidate.value_or(""));
  replace_all(text, "{gold}", req.gold.value_or(""));
  return text;
}

}  // namespace rlab
