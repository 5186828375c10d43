#pragma once

// Final-answer extraction from reasoning text. Answers live inside a LaTeX
// \boxed{...} command; trajectories without one (or with an empty box) have
// no extractable answer and end up in the null cluster.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aero {

/// Trims leading/trailing whitespace and collapses internal whitespace runs
/// to a single space.
inline std::string normalize_answer(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool in_space = false;
  for (char c : raw) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (ws) {
      in_space = !out.empty();
      continue;
    }
    if (in_space) out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  return out;
}

namespace detail {

struct BoxedSpan {
  std::size_t content_begin;
  std::size_t content_end;  // exclusive
};

// Scans `text` for balanced \boxed{...} spans. Nested spans inside an outer
// box are not reported at this level; the caller recurses into the content.
// Escaped braces (\{, \}) do not affect nesting depth.
inline std::vector<BoxedSpan> top_level_boxed_spans(std::string_view text) {
  static constexpr std::string_view kTag = "\\boxed{";
  std::vector<BoxedSpan> spans;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t hit = text.find(kTag, pos);
    if (hit == std::string_view::npos) break;
    std::size_t begin = hit + kTag.size();
    int depth = 1;
    std::size_t i = begin;
    bool balanced = false;
    while (i < text.size()) {
      char c = text[i];
      if (c == '\\' && i + 1 < text.size() && (text[i + 1] == '{' || text[i + 1] == '}')) {
        i += 2;
        continue;
      }
      if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          spans.push_back({begin, i});
          balanced = true;
          pos = i + 1;
          break;
        }
      }
      ++i;
    }
    if (!balanced) pos = begin;  // unbalanced span: keep scanning past the tag
  }
  return spans;
}

}  // namespace detail

/// Extracts the final answer from a reasoning body: the content of the last
/// \boxed{...} span, descending into nested boxes so the innermost content
/// wins. Taking the last span means a correction that boxes a value in its
/// thinking section and another in its final-answer section resolves to the
/// final one. Returns nullopt when no balanced box exists or the box is
/// empty after normalization.
inline std::optional<std::string> extract_boxed_answer(std::string_view body) {
  std::string_view scope = body;
  while (true) {
    auto spans = detail::top_level_boxed_spans(scope);
    if (spans.empty()) {
      if (scope.data() == body.data() && scope.size() == body.size()) return std::nullopt;
      std::string answer = normalize_answer(scope);
      if (answer.empty()) return std::nullopt;
      return answer;
    }
    const auto& last = spans.back();
    scope = scope.substr(last.content_begin, last.content_end - last.content_begin);
  }
}

}  // namespace aero
