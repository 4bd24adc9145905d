#pragma once

// Interchange formats for the row table: CSV for spreadsheet and requirement
// tool import, JSON and YAML for programmatic consumers.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rexcl/core.hpp"

namespace rexcl {

enum class ExportFormat { kCsv, kJson, kYaml };

std::string_view to_string(ExportFormat format);
std::optional<ExportFormat> parse_export_format(std::string_view name);
std::string_view content_type(ExportFormat format);

/// Leading six columns are the interchange layout; Confidence and Review State
/// follow so that a CSV round trip is lossless.
inline constexpr std::string_view kCsvColumns[] = {
    "Object Identifier", "Object Number", "Object Heading", "Object Text",
    "Object Level",      "Object Type",   "Confidence",     "Review State"};
inline constexpr std::size_t kCsvRequiredColumns = 6;

/// UTF-8 without BOM, LF line endings, byte-deterministic.
std::string write_rows(std::span<const RequirementRow> rows, ExportFormat format);

/// Throws Error(kParse) naming the line/field on schema mismatches.
std::vector<RequirementRow> read_rows(std::string_view bytes, ExportFormat format);

}  // namespace rexcl
