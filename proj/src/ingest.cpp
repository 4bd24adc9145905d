#include "rexcl/ingest.hpp"

#include <array>
#include <regex>

namespace rexcl {

namespace {

constexpr std::size_t kMaxDottedComponents = 6;
constexpr std::size_t kMaxComponentDigits = 9;

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t'; }

bool is_page_comment(std::string_view line) {
  static const std::regex kPageComment(R"(^\s*<!--\s*page:\s*\d+\s*-->\s*$)");
  return std::regex_match(line.begin(), line.end(), kPageComment);
}

std::vector<std::string> split_lines(std::string_view chunk) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < chunk.size()) {
    const std::size_t nl = chunk.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(chunk.substr(start));
      break;
    }
    lines.emplace_back(chunk.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

// Returns the heading remainder when `rest` starts with whitespace followed by
// non-blank text.
std::optional<std::string> heading_after(std::string_view rest) {
  if (rest.empty() || !is_space(rest.front())) return std::nullopt;
  const std::string_view heading = trim(rest);
  if (heading.empty()) return std::nullopt;
  return std::string(heading);
}

std::optional<SectionTitle> parse_dotted(std::string_view line) {
  SectionPath path;
  std::size_t i = 0;
  while (true) {
    const std::size_t begin = i;
    while (i < line.size() && is_digit(line[i])) ++i;
    const std::size_t digits = i - begin;
    if (digits == 0 || digits > kMaxComponentDigits) return std::nullopt;
    path.push_back(std::stoi(std::string(line.substr(begin, digits))));
    if (path.size() > kMaxDottedComponents) return std::nullopt;
    if (i < line.size() && line[i] == '.' && i + 1 < line.size() && is_digit(line[i + 1])) {
      ++i;
      continue;
    }
    break;
  }
  std::string raw(line.substr(0, i));
  if (i < line.size() && line[i] == '.') ++i;  // tolerated trailing dot
  auto heading = heading_after(line.substr(i));
  if (!heading) return std::nullopt;
  return SectionTitle{std::move(raw), std::move(path), std::move(*heading), false};
}

std::optional<SectionTitle> parse_lettered(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == 'I' || line[i] == 'V' || line[i] == 'X')) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
    const int value = roman_value(line.substr(0, i));
    if (value > 0) {
      if (auto heading = heading_after(line.substr(i + 1))) {
        return SectionTitle{std::string(line.substr(0, i)), {value}, std::move(*heading), false};
      }
    }
  }
  if (line.size() >= 2 && line[0] >= 'A' && line[0] <= 'Z' && (line[1] == '.' || line[1] == ')')) {
    if (auto heading = heading_after(line.substr(2))) {
      return SectionTitle{std::string(1, line[0]), {line[0] - 'A' + 1}, std::move(*heading), false};
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(SourceMode mode) {
  return mode == SourceMode::kMarkdown ? "md" : "txt";
}

std::optional<SourceMode> parse_source_mode(std::string_view name) {
  if (name == "md" || name == "markdown" || name == "MARKDOWN") return SourceMode::kMarkdown;
  if (name == "txt" || name == "plaintext" || name == "PLAINTEXT") return SourceMode::kPlaintext;
  return std::nullopt;
}

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    static constexpr std::array<std::uint32_t, 5> kMin = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

int roman_value(std::string_view numeral) {
  static constexpr std::array<std::string_view, 10> kUnits = {
      "", "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"};
  std::size_t tens = 0;
  while (tens < numeral.size() && tens < 3 && numeral[tens] == 'X') ++tens;
  const std::string_view rest = numeral.substr(tens);
  for (std::size_t u = 0; u < kUnits.size(); ++u) {
    if (kUnits[u] == rest) {
      const int value = static_cast<int>(tens * 10 + u);
      return value;
    }
  }
  return 0;
}

PagedDocument read_paged(std::string_view input, SourceMode mode, std::string doc_id) {
  if (!is_valid_utf8(input)) throw Error(ErrorCode::kDecode, "input is not valid UTF-8");
  if (input.empty()) throw Error(ErrorCode::kStructure, "input contains no pages");

  std::string text;
  text.reserve(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i] == '\r' && i + 1 < input.size() && input[i + 1] == '\n') continue;
    text.push_back(input[i]);
  }

  PagedDocument doc{std::move(doc_id), {{}}, mode};
  bool first_line = true;
  std::size_t start = 0;
  while (true) {
    const std::size_t ff = text.find('\f', start);
    const std::string_view chunk =
        std::string_view(text).substr(start, ff == std::string::npos ? std::string::npos : ff - start);
    for (auto& line : split_lines(chunk)) {
      if (mode == SourceMode::kMarkdown && is_page_comment(line)) {
        // A leading marker names the first page rather than closing it.
        if (!first_line) doc.pages.emplace_back();
      } else {
        doc.pages.back().push_back(std::move(line));
      }
      first_line = false;
    }
    if (ff == std::string::npos) break;
    doc.pages.emplace_back();
    first_line = false;
    start = ff + 1;
  }
  return doc;
}

std::string serialize_paged(const PagedDocument& doc) {
  std::string out;
  for (std::size_t p = 0; p < doc.pages.size(); ++p) {
    if (doc.source_mode == SourceMode::kMarkdown) {
      out += "<!-- page: " + std::to_string(p + 1) + " -->\n";
    } else if (p > 0) {
      out.push_back('\f');
    }
    for (const auto& line : doc.pages[p]) {
      out += line;
      out.push_back('\n');
    }
  }
  return out;
}

std::vector<TextUnit> to_units(const PagedDocument& doc) {
  std::vector<TextUnit> units;
  const bool markdown = doc.source_mode == SourceMode::kMarkdown;
  for (std::size_t p = 0; p < doc.pages.size(); ++p) {
    const auto& page = doc.pages[p];
    int retained = 0;
    for (const auto& line : page) retained += is_blank(line) ? 0 : 1;
    int index = 0;
    for (const auto& line : page) {
      if (is_blank(line)) continue;
      TextUnit unit;
      unit.text = line;
      unit.page = static_cast<int>(p) + 1;
      unit.line_index = index++;
      unit.page_line_count = retained;
      if (markdown) {
        std::size_t hashes = 0;
        while (hashes < line.size() && line[hashes] == '#') ++hashes;
        if (hashes > 0 && hashes < line.size() && is_space(line[hashes])) {
          unit.md_heading_depth = static_cast<int>(hashes);
        }
        unit.is_table_row = !line.empty() && line.front() == '|';
      }
      units.push_back(std::move(unit));
    }
  }
  return units;
}

std::optional<SectionTitle> parse_numbered_title(std::string_view line) {
  line = trim(line);
  if (line.empty()) return std::nullopt;
  if (is_digit(line.front())) return parse_dotted(line);
  if (line.front() >= 'A' && line.front() <= 'Z') return parse_lettered(line);
  return std::nullopt;
}

std::optional<SectionTitle> detect_title_plaintext(const TextUnit& unit) {
  return parse_numbered_title(unit.text);
}

}  // namespace rexcl
