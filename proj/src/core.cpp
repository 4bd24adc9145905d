#include "rexcl/core.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace rexcl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDecode: return "decode_error";
    case ErrorCode::kStructure: return "structure_error";
    case ErrorCode::kState: return "state_error";
    case ErrorCode::kNumbering: return "numbering_error";
    case ErrorCode::kClassification: return "classification_error";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kUndefinedCorrelation: return "undefined_correlation";
    case ErrorCode::kUnsupportedMedia: return "unsupported_media_type";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

namespace {

constexpr std::array<std::string_view, kNumClassLabels> kLabelNames = {
    "HEADER", "INFO", "FUNC_REQ", "NON_FUNC_REQ"};

}  // namespace

std::string_view to_string(ClassLabel label) {
  return kLabelNames[static_cast<std::size_t>(label)];
}

std::optional<ClassLabel> parse_class_label(std::string_view name) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == name) return static_cast<ClassLabel>(i);
  }
  return std::nullopt;
}

std::string_view to_string(RowKind kind) {
  return kind == RowKind::kTitle ? "TITLE" : "TEXT";
}

std::optional<RowKind> parse_row_kind(std::string_view name) {
  if (name == "TITLE") return RowKind::kTitle;
  if (name == "TEXT") return RowKind::kText;
  return std::nullopt;
}

std::string_view to_string(ReviewState state) {
  switch (state) {
    case ReviewState::kUnreviewed: return "UNREVIEWED";
    case ReviewState::kConfirmed: return "CONFIRMED";
    case ReviewState::kCorrected: return "CORRECTED";
  }
  return "UNREVIEWED";
}

std::optional<ReviewState> parse_review_state(std::string_view name) {
  if (name == "UNREVIEWED") return ReviewState::kUnreviewed;
  if (name == "CONFIRMED") return ReviewState::kConfirmed;
  if (name == "CORRECTED") return ReviewState::kCorrected;
  return std::nullopt;
}

std::string render_number(std::span<const int> path) {
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "render_number: empty path");
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "render_number: negative component " + std::to_string(path[i]));
    }
    if (i > 0) out.push_back('.');
    out += std::to_string(path[i]);
  }
  return out;
}

SectionPath parse_number(std::string_view number) {
  if (number.empty()) throw Error(ErrorCode::kInvalidArgument, "empty section number");
  SectionPath path;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = number.find('.', start);
    const std::string_view part =
        number.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    int value = 0;
    const auto* first = part.data();
    const auto* last = part.data() + part.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (part.empty() || ec != std::errc{} || ptr != last || part.front() == '-' ||
        part.front() == '+') {
      throw Error(ErrorCode::kInvalidArgument,
                  "malformed section number '" + std::string(number) + "'");
    }
    path.push_back(value);
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return path;
}

int object_level(std::string_view number) {
  return static_cast<int>(parse_number(number).size());
}

std::string make_row_identifier(std::string_view doc_id, int ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", ordinal);
  std::string id(doc_id);
  id += "-R";
  id += buf;
  return id;
}

void validate_row(const RequirementRow& row) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument,
                "row '" + row.object_identifier + "': " + what);
  };
  if (row.object_identifier.empty()) fail("empty object_identifier");
  int level = 0;
  try {
    level = object_level(row.object_number);
  } catch (const Error&) {
    fail("malformed object_number '" + row.object_number + "'");
  }
  if (level != row.object_level) fail("object_level does not match object_number");
  if (row.kind == RowKind::kTitle) {
    if (row.object_heading.empty() || !row.object_text.empty()) {
      fail("TITLE rows carry a heading and no text");
    }
  } else if (row.object_text.empty() || !row.object_heading.empty()) {
    fail("TEXT rows carry text and no heading");
  }
  if ((row.review_state == ReviewState::kCorrected) != row.corrected_type.has_value()) {
    fail("corrected_type must be set exactly when review_state is CORRECTED");
  }
  if (row.corrected_type && row.object_type != row.corrected_type) {
    fail("object_type must equal corrected_type on corrected rows");
  }
  if (row.confidence && !(*row.confidence >= 0.0 && *row.confidence <= 1.0)) {
    fail("confidence outside [0,1]");
  }
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(kSpace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kSpace);
  return s.substr(b, e - b + 1);
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

}  // namespace rexcl
