#include "rlab/answers.hpp"

#include <cctype>
#include <sstream>

namespace rlab {

namespace {

constexpr const char* kBoxed = "\\boxed{";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Payload of the balanced box starting at the '{' (position of "\boxed{" +
// 7). Returns nullopt when braces never close.
std::optional<std::string> read_balanced(const std::string& text, size_t brace_pos) {
  int depth = 0;
  for (size_t i = brace_pos; i < text.size(); ++i) {
    if (text[i] == '{') {
      ++depth;
    } else if (text[i] == '}') {
      --depth;
      if (depth == 0) return text.substr(brace_pos + 1, i - brace_pos - 1);
    }
  }
  return std::nullopt;
}

std::optional<std::string> last_payload_in(const std::string& text) {
  std::optional<std::string> found;
  size_t pos = 0;
  while ((pos = text.find(kBoxed, pos)) != std::string::npos) {
    size_t brace = pos + 6;  // index of '{'
    if (auto payload = read_balanced(text, brace)) found = std::move(payload);
    pos = brace + 1;
  }
  return found;
}

bool is_answer_line(const std::string& line) {
  size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  return line.compare(i, 7, "Answer:") == 0;
}

// Full-string decimal-number parse: [+-]? digits [. digits?] | [+-]? . digits
bool parse_decimal(const std::string& s, bool* negative, std::string* int_part, std::string* frac_part) {
  size_t i = 0;
  *negative = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    *negative = (s[i] == '-');
    ++i;
  }
  std::string ip, fp;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ip += s[i++];
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) fp += s[i++];
  }
  if (i != s.size()) return false;
  if (ip.empty() && fp.empty()) return false;
  *int_part = std::move(ip);
  *frac_part = std::move(fp);
  return true;
}

std::string canonical_number(bool negative, std::string int_part, std::string frac_part) {
  size_t nz = int_part.find_first_not_of('0');
  int_part = (nz == std::string::npos) ? "" : int_part.substr(nz);
  size_t last = frac_part.find_last_not_of('0');
  frac_part = (last == std::string::npos) ? "" : frac_part.substr(0, last + 1);
  if (int_part.empty()) int_part = "0";
  std::string out = int_part;
  if (!frac_part.empty()) out += "." + frac_part;
  if (negative && out != "0") out = "-" + out;
  return out;
}

}  // namespace

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::optional<std::string> last_boxed_payload(const std::string& text) {
  auto p = last_payload_in(text);
  if (p) return trim(*p);
  return std::nullopt;
}

std::optional<std::string> extract_answer(const std::string& response) {
  std::optional<std::string> answer_line_payload;
  std::istringstream in(response);
  std::string line;
  while (std::getline(in, line)) {
    if (!is_answer_line(line)) continue;
    if (auto payload = last_payload_in(line)) answer_line_payload = std::move(payload);
  }
  if (answer_line_payload) return trim(*answer_line_payload);
  return last_boxed_payload(response);
}

std::string normalize_answer(const std::string& s) {
  // Trim, collapse whitespace runs, lowercase.
  std::string collapsed;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !collapsed.empty()) collapsed += ' ';
    pending_space = false;
    collapsed += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  bool negative = false;
  std::string int_part, frac_part;
  if (parse_decimal(collapsed, &negative, &int_part, &frac_part)) {
    return canonical_number(negative, std::move(int_part), std::move(frac_part));
  }
  return collapsed;
}

bool answers_match(const std::string& lhs, const std::string& rhs) {
  return normalize_answer(lhs) == normalize_answer(rhs);
}

std::string render_answer_line(const std::string& answer) {
  return "Answer: \\boxed{" + answer + "}";
}

}  // namespace rlab
