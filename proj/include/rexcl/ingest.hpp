#pragma once

// Builds the line-level intermediate representation from converter output:
// markdown (optionally with page-break comments) or form-feed paged text.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rexcl/core.hpp"

namespace rexcl {

enum class SourceMode { kMarkdown, kPlaintext };

std::string_view to_string(SourceMode mode);
/// Accepts "md"/"markdown" and "txt"/"plaintext".
std::optional<SourceMode> parse_source_mode(std::string_view name);

struct PagedDocument {
  std::string doc_id;
  std::vector<std::vector<std::string>> pages;
  SourceMode source_mode = SourceMode::kMarkdown;

  bool operator==(const PagedDocument&) const = default;
};

/// Splits UTF-8 text into pages. Form feeds delimit pages in both modes; in
/// markdown mode a line `<!-- page: N -->` does too. Delimiters are consumed.
/// Throws Error(kDecode) on invalid UTF-8, Error(kStructure) on empty input.
PagedDocument read_paged(std::string_view input, SourceMode mode, std::string doc_id = {});

/// Inverse of read_paged up to line-ending normalization.
std::string serialize_paged(const PagedDocument& doc);

std::vector<TextUnit> to_units(const PagedDocument& doc);

/// Parses "<number> <heading>" where the number is dotted-decimal (at most
/// six components, trailing '.' tolerated), a roman numeral I..XXXIX or a
/// single capital letter, the latter two followed by '.' or ')'.
std::optional<SectionTitle> parse_numbered_title(std::string_view line);

std::optional<SectionTitle> detect_title_plaintext(const TextUnit& unit);

bool is_valid_utf8(std::string_view s);

/// Roman numeral value for canonical forms I..XXXIX, otherwise 0.
int roman_value(std::string_view numeral);

}  // namespace rexcl
