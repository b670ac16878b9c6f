#pragma once

#include <optional>
#include <string>

namespace rlab {

// Answer extraction over the `Answer: \boxed{...}` response convention.
// The extractor returns the content of the last balanced \boxed{...} on a
// line beginning with `Answer:`; if no such line has a box, it falls back
// to the last balanced \boxed{...} anywhere; absent when none exists.
// Payload whitespace is trimmed. Brace balancing counts raw braces only.
std::optional<std::string> extract_answer(const std::string& response);

// Last balanced \boxed payload in a piece of text, no Answer-line rule.
std::optional<std::string> last_boxed_payload(const std::string& text);

// Canonical comparison form: trimmed, internal whitespace collapsed,
// ASCII-lowercased; strings that parse fully as plain decimal numbers are
// reduced to a canonical numeric form ("7.0" -> "7", "0.50" -> "0.5",
// "+3" -> "3", "-0" -> "0", ".5" -> "0.5").
std::string normalize_answer(const std::string& s);

// True when lhs and rhs normalize to the same string.
bool answers_match(const std::string& lhs, const std::string& rhs);

// "Answer: \boxed{a}"
std::string render_answer_line(const std::string& answer);

std::string trim(const std::string& s);

}  // namespace rlab
