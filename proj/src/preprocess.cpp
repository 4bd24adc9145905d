#include <algorithm>

#include "rexcl/classify.hpp"

namespace rexcl {

namespace detail {
extern const std::string_view kStopwordResource;
}

std::string_view stopword_resource() { return detail::kStopwordResource; }

const std::set<std::string, std::less<>>& stopwords() {
  static const auto words = [] {
    std::set<std::string, std::less<>> out;
    const std::string_view text = detail::kStopwordResource;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      const auto line = trim(text.substr(start, nl - start));
      if (!line.empty() && line.front() != '#') out.emplace(line);
      start = nl + 1;
    }
    return out;
  }();
  return words;
}

const std::set<std::string, std::less<>>& retained_words() {
  static const std::set<std::string, std::less<>> words = {
      "not",   "no",    "never",  "shall",     "should",  "must",  "may",
      "might", "will",  "would",  "can",       "cannot",  "could", "shouldn't",
      "mustn't", "won't", "can't", "don't",    "doesn't"};
  return words;
}

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Typographic punctuation emitted by document converters. Single quotes map
// to the ASCII apostrophe so "shouldn’t" and "shouldn't" agree.
struct TypographicMark {
  std::string_view utf8;
  std::string_view replacement;
};
constexpr TypographicMark kTypographic[] = {
    {"\xE2\x80\x98", "'"}, {"\xE2\x80\x99", "'"}, {"\xE2\x80\x9C", ""},
    {"\xE2\x80\x9D", ""},  {"\xE2\x80\x93", ""},  {"\xE2\x80\x94", ""},
    {"\xE2\x80\xA6", ""},  {"\xC2\xAB", ""},      {"\xC2\xBB", ""},
};

std::string clean_token(std::string_view raw) {
  std::string token;
  token.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    bool matched = false;
    for (const auto& mark : kTypographic) {
      if (raw.substr(i, mark.utf8.size()) == mark.utf8) {
        token += mark.replacement;
        i += mark.utf8.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    const auto c = static_cast<unsigned char>(raw[i]);
    if (c == '_' || c == '\'' || !is_ascii_punct(c)) {
      token.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    }
    ++i;
  }
  const auto b = token.find_first_not_of('\'');
  if (b == std::string::npos) return {};
  const auto e = token.find_last_not_of('\'');
  return token.substr(b, e - b + 1);
}

}  // namespace

TokenSeq preprocess(std::string_view text) {
  TokenSeq tokens;
  const auto& stop = stopwords();
  const auto& keep = retained_words();
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    std::string token = clean_token(text.substr(start, i - start));
    if (token.empty()) continue;
    if (stop.contains(token) && !keep.contains(token)) continue;
    tokens.push_back(std::move(token));
  }
  return tokens;
}

}  // namespace rexcl
