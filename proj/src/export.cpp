#include "rexcl/export.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <map>

#include "rexcl/csv.hpp"
#include "rexcl/json_io.hpp"

namespace rexcl {

std::string_view to_string(ExportFormat format) {
  switch (format) {
    case ExportFormat::kCsv: return "csv";
    case ExportFormat::kJson: return "json";
    case ExportFormat::kYaml: return "yaml";
  }
  return "csv";
}

std::optional<ExportFormat> parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::kCsv;
  if (name == "json") return ExportFormat::kJson;
  if (name == "yaml" || name == "yml") return ExportFormat::kYaml;
  return std::nullopt;
}

std::string_view content_type(ExportFormat format) {
  switch (format) {
    case ExportFormat::kCsv: return "text/csv; charset=utf-8";
    case ExportFormat::kJson: return "application/json";
    case ExportFormat::kYaml: return "application/yaml";
  }
  return "application/octet-stream";
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return v;
}

void check_row(const RequirementRow& row, const std::string& where) {
  try {
    validate_row(row);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, where + ": " + e.what());
  }
}

// ---- CSV ------------------------------------------------------------------

std::string write_csv(std::span<const RequirementRow> rows) {
  std::string out = csv::format_record({std::begin(kCsvColumns), std::end(kCsvColumns)});
  for (const auto& r : rows) {
    out += csv::format_record({
        r.object_identifier,
        r.object_number,
        r.object_heading,
        r.object_text,
        std::to_string(r.object_level),
        r.object_type ? std::string(to_string(*r.object_type)) : std::string(),
        r.confidence ? format_double(*r.confidence) : std::string(),
        std::string(to_string(r.review_state)),
    });
  }
  return out;
}

std::vector<RequirementRow> read_csv(std::string_view bytes) {
  const auto records = csv::parse(bytes);
  if (records.empty()) throw Error(ErrorCode::kParse, "csv: missing header line");

  std::map<std::string, std::size_t, std::less<>> column;
  const auto& header = records.front().fields;
  for (std::size_t i = 0; i < header.size(); ++i) column.emplace(header[i], i);
  for (std::size_t c = 0; c < kCsvRequiredColumns; ++c) {
    if (!column.contains(kCsvColumns[c])) {
      throw Error(ErrorCode::kParse, "csv: missing column '" + std::string(kCsvColumns[c]) + "'");
    }
  }

  std::vector<RequirementRow> rows;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& rec = records[k];
    const std::string where = "csv line " + std::to_string(rec.line);
    if (rec.fields.size() != header.size()) {
      throw Error(ErrorCode::kParse, where + ": expected " + std::to_string(header.size()) +
                                         " fields, found " + std::to_string(rec.fields.size()));
    }
    auto get = [&](std::string_view name) -> const std::string* {
      auto it = column.find(name);
      return it == column.end() ? nullptr : &rec.fields[it->second];
    };
    auto bad = [&](std::string_view name, const std::string& value) {
      return Error(ErrorCode::kParse,
                   where + ", field '" + std::string(name) + "': invalid value '" + value + "'");
    };

    RequirementRow row;
    row.object_identifier = *get("Object Identifier");
    row.object_number = *get("Object Number");
    row.object_heading = *get("Object Heading");
    row.object_text = *get("Object Text");
    row.kind = row.object_heading.empty() ? RowKind::kText : RowKind::kTitle;
    const auto level = parse_int(*get("Object Level"));
    if (!level) throw bad("Object Level", *get("Object Level"));
    row.object_level = *level;
    if (const auto& type = *get("Object Type"); !type.empty()) {
      row.object_type = parse_class_label(type);
      if (!row.object_type) throw bad("Object Type", type);
    }
    if (const auto* conf = get("Confidence"); conf && !conf->empty()) {
      row.confidence = parse_double(*conf);
      if (!row.confidence) throw bad("Confidence", *conf);
    }
    if (const auto* state = get("Review State"); state && !state->empty()) {
      const auto parsed = parse_review_state(*state);
      if (!parsed) throw bad("Review State", *state);
      row.review_state = *parsed;
    }
    // Object Type already carries the human label on corrected rows.
    if (row.review_state == ReviewState::kCorrected) row.corrected_type = row.object_type;
    check_row(row, where);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- JSON -----------------------------------------------------------------

std::string write_json(std::span<const RequirementRow> rows) {
  Json j = Json::array();
  for (const auto& r : rows) j.push_back(r);
  return j.dump(2) + "\n";
}

std::vector<RequirementRow> read_json(std::string_view bytes) {
  const Json j = parse_json(bytes, "json rows");
  if (!j.is_array()) throw Error(ErrorCode::kParse, "json rows: expected a top-level array");
  std::vector<RequirementRow> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "json row " + std::to_string(i + 1);
    try {
      rows.push_back(j[i].get<RequirementRow>());
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    check_row(rows.back(), where);
  }
  return rows;
}

// ---- YAML -----------------------------------------------------------------

void emit_optional(YAML::Emitter& out, const char* key, const std::optional<std::string>& v) {
  out << YAML::Key << key << YAML::Value;
  if (v) {
    out << YAML::DoubleQuoted << *v;
  } else {
    out << YAML::Null;
  }
}

std::string write_yaml(std::span<const RequirementRow> rows) {
  YAML::Emitter out;
  out.SetIndent(2);
  out << YAML::BeginSeq;
  for (const auto& r : rows) {
    out << YAML::BeginMap;
    out << YAML::Key << "object_identifier" << YAML::Value << YAML::DoubleQuoted << r.object_identifier;
    out << YAML::Key << "object_number" << YAML::Value << YAML::DoubleQuoted << r.object_number;
    out << YAML::Key << "object_heading" << YAML::Value << YAML::DoubleQuoted << r.object_heading;
    out << YAML::Key << "object_text" << YAML::Value << YAML::DoubleQuoted << r.object_text;
    out << YAML::Key << "object_level" << YAML::Value << r.object_level;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(r.kind));
    emit_optional(out, "object_type",
                  r.object_type ? std::optional<std::string>(to_string(*r.object_type)) : std::nullopt);
    out << YAML::Key << "confidence" << YAML::Value;
    if (r.confidence) {
      out << format_double(*r.confidence);
    } else {
      out << YAML::Null;
    }
    out << YAML::Key << "review_state" << YAML::Value << std::string(to_string(r.review_state));
    emit_optional(out, "corrected_type",
                  r.corrected_type ? std::optional<std::string>(to_string(*r.corrected_type))
                                   : std::nullopt);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  if (!out.good()) throw Error(ErrorCode::kInvalidArgument, std::string("yaml: ") + out.GetLastError());
  return std::string(out.c_str()) + "\n";
}

std::vector<RequirementRow> read_yaml(std::string_view bytes) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(bytes));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParse, std::string("yaml: ") + e.what());
  }
  if (!root.IsSequence()) throw Error(ErrorCode::kParse, "yaml: expected a top-level sequence");

  std::vector<RequirementRow> rows;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const YAML::Node node = root[i];
    const std::string where = "yaml line " + std::to_string(node.Mark().line + 1);
    if (!node.IsMap()) throw Error(ErrorCode::kParse, where + ": expected a mapping");
    auto field = [&](const char* key) {
      const YAML::Node v = node[key];
      if (!v.IsDefined()) throw Error(ErrorCode::kParse, where + ": missing field '" + key + "'");
      return v;
    };
    auto scalar = [&](const char* key) {
      const YAML::Node v = field(key);
      if (!v.IsScalar()) throw Error(ErrorCode::kParse, where + ", field '" + key + "': expected a scalar");
      return v.Scalar();
    };
    auto bad = [&](const char* key, const std::string& value) {
      return Error(ErrorCode::kParse, where + ", field '" + key + "': invalid value '" + value + "'");
    };
    auto optional_label = [&](const char* key) -> std::optional<ClassLabel> {
      const YAML::Node v = field(key);
      if (v.IsNull()) return std::nullopt;
      const auto label = parse_class_label(scalar(key));
      if (!label) throw bad(key, scalar(key));
      return label;
    };

    RequirementRow row;
    row.object_identifier = scalar("object_identifier");
    row.object_number = scalar("object_number");
    row.object_heading = scalar("object_heading");
    row.object_text = scalar("object_text");
    const auto level = parse_int(scalar("object_level"));
    if (!level) throw bad("object_level", scalar("object_level"));
    row.object_level = *level;
    const auto kind = parse_row_kind(scalar("kind"));
    if (!kind) throw bad("kind", scalar("kind"));
    row.kind = *kind;
    row.object_type = optional_label("object_type");
    if (!field("confidence").IsNull()) {
      row.confidence = parse_double(scalar("confidence"));
      if (!row.confidence) throw bad("confidence", scalar("confidence"));
    }
    const auto state = parse_review_state(scalar("review_state"));
    if (!state) throw bad("review_state", scalar("review_state"));
    row.review_state = *state;
    row.corrected_type = optional_label("corrected_type");
    check_row(row, where);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string write_rows(std::span<const RequirementRow> rows, ExportFormat format) {
  for (const auto& r : rows) validate_row(r);
  switch (format) {
    case ExportFormat::kCsv: return write_csv(rows);
    case ExportFormat::kJson: return write_json(rows);
    case ExportFormat::kYaml: return write_yaml(rows);
  }
  return {};
}

std::vector<RequirementRow> read_rows(std::string_view bytes, ExportFormat format) {
  switch (format) {
    case ExportFormat::kCsv: return read_csv(bytes);
    case ExportFormat::kJson: return read_json(bytes);
    case ExportFormat::kYaml: return read_yaml(bytes);
  }
  return {};
}

}  // namespace rexcl
