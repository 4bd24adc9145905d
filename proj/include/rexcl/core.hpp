#pragma once

// Shared domain types: text units, section tuples and the row schema that
// every stage of the extraction/classification pipeline exchanges.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rexcl {

enum class ErrorCode {
  kInvalidArgument,
  kDecode,
  kStructure,
  kState,
  kNumbering,
  kClassification,
  kParse,
  kNotFound,
  kUndefinedCorrelation,
  kUnsupportedMedia,
  kIo,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// One non-blank line of the intermediate representation.
struct TextUnit {
  std::string text;
  int page = 1;             // 1-based
  int line_index = 0;       // 0-based, counts retained (non-blank) lines only
  int page_line_count = 1;  // retained lines on this page
  int md_heading_depth = 0; // leading '#' run followed by a space
  bool is_table_row = false;

  bool operator==(const TextUnit&) const = default;
};

using SectionPath = std::vector<int>;

struct SectionTitle {
  std::string raw_label;      // "1.1", "IV", "A"; empty when synthesized
  SectionPath canonical_path; // empty only between parsing and assembly
  std::string heading;
  bool synthesized = false;

  bool operator==(const SectionTitle&) const = default;
};

struct SectionTuple {
  SectionTitle title;
  std::vector<std::string> texts;

  bool operator==(const SectionTuple&) const = default;
};

struct ExtractionResult {
  std::string doc_id;
  std::vector<SectionTuple> tuples;
  std::vector<TextUnit> removed_units;

  bool operator==(const ExtractionResult&) const = default;
};

enum class ClassLabel : std::uint8_t { kHeader, kInfo, kFuncReq, kNonFuncReq };
inline constexpr int kNumClassLabels = 4;
inline constexpr ClassLabel kAllClassLabels[kNumClassLabels] = {
    ClassLabel::kHeader, ClassLabel::kInfo, ClassLabel::kFuncReq, ClassLabel::kNonFuncReq};

std::string_view to_string(ClassLabel label);
std::optional<ClassLabel> parse_class_label(std::string_view name);

enum class RowKind : std::uint8_t { kTitle, kText };
std::string_view to_string(RowKind kind);
std::optional<RowKind> parse_row_kind(std::string_view name);

enum class ReviewState : std::uint8_t { kUnreviewed, kConfirmed, kCorrected };
std::string_view to_string(ReviewState state);
std::optional<ReviewState> parse_review_state(std::string_view name);

/// A row of the deployment table. Invariants are checked by validate_row().
struct RequirementRow {
  std::string object_identifier;
  std::string object_number;
  std::string object_heading;
  std::string object_text;
  int object_level = 1;
  RowKind kind = RowKind::kText;
  std::optional<ClassLabel> object_type;
  std::optional<double> confidence;
  ReviewState review_state = ReviewState::kUnreviewed;
  std::optional<ClassLabel> corrected_type;

  bool operator==(const RequirementRow&) const = default;
};

/// Throws Error(kInvalidArgument) naming the first broken invariant.
void validate_row(const RequirementRow& row);

struct FinalOutput {
  std::string doc_id;
  std::vector<RequirementRow> rows;

  bool operator==(const FinalOutput&) const = default;
};

/// Joins path components with '.'. Components must be non-negative.
std::string render_number(std::span<const int> path);

/// Inverse of render_number on canonical input ("1.2.3" -> {1,2,3}).
SectionPath parse_number(std::string_view number);

/// Number of dot-separated components of a dotted-decimal number.
int object_level(std::string_view number);

/// "<doc_id>-R<ordinal, zero padded to 5 digits>".
std::string make_row_identifier(std::string_view doc_id, int ordinal);

// String helpers shared across modules (ASCII-only case mapping).
std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool is_blank(std::string_view s);

}  // namespace rexcl
