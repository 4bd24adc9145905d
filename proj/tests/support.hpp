#pragma once

// Fixtures shared by the unit tests and the acceptance runner.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rexcl/core.hpp"
#include "rexcl/ingest.hpp"

namespace rexcl::testing {

inline TextUnit unit(std::string text, int page = 1, int line = 0, int count = 1, int depth = 0) {
  TextUnit u;
  u.text = std::move(text);
  u.page = page;
  u.line_index = line;
  u.page_line_count = count;
  u.md_heading_depth = depth;
  return u;
}

// Markdown units on one page with heading depth derived from the '#' run.
inline std::vector<TextUnit> md_units(const std::vector<std::string>& lines) {
  PagedDocument doc{"T", {lines}, SourceMode::kMarkdown};
  return to_units(doc);
}

// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("rexcl-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Strings with the characters that break naive CSV/YAML writers.
inline std::string nasty_string(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "a", "Z", "0", "7", " ", ",", "\"", "'", "\n", "\r\n", ":", "- ", "#", "&", "*", "!", "|", ">",
      "{", "}", "[", "]", "%", "@", "`", "\t", "null", "true", "~", "yes", "1.0", "0x1F", "ü", "漢",
      "—", "€", "\\", "  ", "---", "..."};
  std::string s;
  const int n = static_cast<int>(rng() % 12);
  for (int i = 0; i < n; ++i) s += pieces[rng() % pieces.size()];
  return s;
}

// A valid random row table: a mix of TITLE and TEXT rows in any review state.
inline std::vector<RequirementRow> random_rows(std::mt19937_64& rng, int max_rows = 12) {
  std::vector<RequirementRow> rows;
  const int n = static_cast<int>(rng() % static_cast<std::uint64_t>(max_rows + 1));
  for (int i = 0; i < n; ++i) {
    RequirementRow r;
    r.object_identifier = make_row_identifier("DOC", i + 1);
    std::vector<int> path;
    const int depth = 1 + static_cast<int>(rng() % 5);
    for (int d = 0; d < depth; ++d) path.push_back(static_cast<int>(rng() % 40));
    r.object_number = render_number(path);
    r.object_level = depth;
    r.kind = rng() % 3 == 0 ? RowKind::kTitle : RowKind::kText;
    std::string content = nasty_string(rng);
    if (is_blank(content)) content = "x" + content;
    (r.kind == RowKind::kTitle ? r.object_heading : r.object_text) = content;
    if (rng() % 4 != 0) {
      r.object_type = kAllClassLabels[rng() % 4];
      const int pick = static_cast<int>(rng() % 4);
      if (pick == 0) r.confidence = 1.0;
      else if (pick == 1) r.confidence = 0.0;
      else if (pick == 2) r.confidence = static_cast<double>(rng() % 1000001) / 1e6;
      else r.confidence = std::ldexp(static_cast<double>(rng() >> 11), -53);
      const int state = static_cast<int>(rng() % 3);
      if (state == 1) r.review_state = ReviewState::kConfirmed;
      if (state == 2) {
        r.review_state = ReviewState::kCorrected;
        r.corrected_type = r.object_type;
      }
    }
    validate_row(r);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace rexcl::testing
