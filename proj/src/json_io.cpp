#include "rexcl/json_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rexcl {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kParse, std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("field '") + key + "': " + e.what());
  }
}

template <typename Enum, typename Parser>
Enum get_enum(const Json& j, const char* key, Parser parse) {
  const auto name = get_as<std::string>(j, key);
  auto value = parse(name);
  if (!value) throw Error(ErrorCode::kParse, std::string("field '") + key + "': unknown value '" + name + "'");
  return *value;
}

std::optional<ClassLabel> get_optional_label(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (v.is_null()) return std::nullopt;
  return get_enum<ClassLabel>(j, key, parse_class_label);
}

}  // namespace

void to_json(Json& j, const TextUnit& u) {
  j = Json{{"text", u.text},
           {"page", u.page},
           {"line_index", u.line_index},
           {"page_line_count", u.page_line_count},
           {"md_heading_depth", u.md_heading_depth},
           {"is_table_row", u.is_table_row}};
}

void from_json(const Json& j, TextUnit& u) {
  u.text = get_as<std::string>(j, "text");
  u.page = get_as<int>(j, "page");
  u.line_index = get_as<int>(j, "line_index");
  u.page_line_count = get_as<int>(j, "page_line_count");
  u.md_heading_depth = get_as<int>(j, "md_heading_depth");
  u.is_table_row = get_as<bool>(j, "is_table_row");
}

void to_json(Json& j, const SectionTitle& t) {
  j = Json{{"raw_label", t.raw_label},
           {"canonical_path", t.canonical_path},
           {"heading", t.heading},
           {"synthesized", t.synthesized}};
}

void from_json(const Json& j, SectionTitle& t) {
  t.raw_label = get_as<std::string>(j, "raw_label");
  t.canonical_path = get_as<SectionPath>(j, "canonical_path");
  t.heading = get_as<std::string>(j, "heading");
  t.synthesized = get_as<bool>(j, "synthesized");
}

void to_json(Json& j, const SectionTuple& t) {
  j = Json{{"title", t.title}, {"texts", t.texts}};
}

void from_json(const Json& j, SectionTuple& t) {
  t.title = get_as<SectionTitle>(j, "title");
  t.texts = get_as<std::vector<std::string>>(j, "texts");
}

void to_json(Json& j, const ExtractionResult& r) {
  j = Json{{"doc_id", r.doc_id}, {"tuples", r.tuples}, {"removed_units", r.removed_units}};
}

void from_json(const Json& j, ExtractionResult& r) {
  r.doc_id = get_as<std::string>(j, "doc_id");
  r.tuples = get_as<std::vector<SectionTuple>>(j, "tuples");
  r.removed_units = get_as<std::vector<TextUnit>>(j, "removed_units");
}

void to_json(Json& j, const RequirementRow& r) {
  j = Json::object();
  j["object_identifier"] = r.object_identifier;
  j["object_number"] = r.object_number;
  j["object_heading"] = r.object_heading;
  j["object_text"] = r.object_text;
  j["object_level"] = r.object_level;
  j["kind"] = std::string(to_string(r.kind));
  j["object_type"] = r.object_type ? Json(std::string(to_string(*r.object_type))) : Json(nullptr);
  j["confidence"] = r.confidence ? Json(*r.confidence) : Json(nullptr);
  j["review_state"] = std::string(to_string(r.review_state));
  j["corrected_type"] =
      r.corrected_type ? Json(std::string(to_string(*r.corrected_type))) : Json(nullptr);
}

void from_json(const Json& j, RequirementRow& r) {
  r.object_identifier = get_as<std::string>(j, "object_identifier");
  r.object_number = get_as<std::string>(j, "object_number");
  r.object_heading = get_as<std::string>(j, "object_heading");
  r.object_text = get_as<std::string>(j, "object_text");
  r.object_level = get_as<int>(j, "object_level");
  r.kind = get_enum<RowKind>(j, "kind", parse_row_kind);
  r.object_type = get_optional_label(j, "object_type");
  const Json& conf = field(j, "confidence");
  if (conf.is_null()) {
    r.confidence.reset();
  } else if (conf.is_number()) {
    r.confidence = conf.get<double>();
  } else {
    throw Error(ErrorCode::kParse, "field 'confidence': expected number or null");
  }
  r.review_state = get_enum<ReviewState>(j, "review_state", parse_review_state);
  r.corrected_type = get_optional_label(j, "corrected_type");
}

void to_json(Json& j, const FinalOutput& f) {
  j = Json{{"doc_id", f.doc_id}, {"rows", f.rows}};
}

void from_json(const Json& j, FinalOutput& f) {
  f.doc_id = get_as<std::string>(j, "doc_id");
  f.rows = get_as<std::vector<RequirementRow>>(j, "rows");
}

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot create '" + tmp + "': " + std::strerror(errno));
  std::size_t off = 0;
  while (off < content.size()) {
    const ssize_t n = ::write(fd, content.data() + off, content.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(ErrorCode::kIo, "write to '" + tmp + "' failed: " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    throw Error(ErrorCode::kIo, "fsync of '" + tmp + "' failed: " + std::strerror(errno));
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    throw Error(ErrorCode::kIo, "rename to '" + path + "' failed: " + std::strerror(errno));
  }
}

}  // namespace rexcl
