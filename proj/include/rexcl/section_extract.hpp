#pragma once

// Section title parsing, text-to-section assignment and the numbered row table.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rexcl/core.hpp"
#include "rexcl/ingest.hpp"

namespace rexcl {

/// Heading label of the tuple that collects units preceding the first title.
inline constexpr std::string_view kPreambleHeading = "(preamble)";

/// For markdown headings: strips the '#' run and parses an optional number.
/// Unnumbered headings come back synthesized with an empty path.
std::optional<SectionTitle> parse_section_title_md(const TextUnit& unit);

/// Scans units in order; every title opens a tuple and every other unit is
/// appended to the open tuple. Synthesized titles get the parent path (by
/// heading depth) extended with the next free sibling ordinal.
ExtractionResult assemble(std::span<const TextUnit> units, SourceMode mode,
                          std::string doc_id = {});

/// One TITLE row per tuple followed by one TEXT row per text, numbered by
/// extending the section number with the 1-based text position. Throws
/// Error(kNumbering) when two titles share a canonical path.
std::vector<RequirementRow> to_rows(const ExtractionResult& extraction);

}  // namespace rexcl
