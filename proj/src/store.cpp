#include "rexcl/store.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>

#include "rexcl/section_extract.hpp"

namespace fs = std::filesystem;

namespace rexcl {

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::kConfirm: return "CONFIRM";
    case ActionKind::kCorrect: return "CORRECT";
    case ActionKind::kEditText: return "EDIT_TEXT";
  }
  return "CONFIRM";
}

std::optional<ActionKind> parse_action_kind(std::string_view name) {
  if (name == "CONFIRM") return ActionKind::kConfirm;
  if (name == "CORRECT") return ActionKind::kCorrect;
  if (name == "EDIT_TEXT") return ActionKind::kEditText;
  return std::nullopt;
}

void to_json(Json& j, const AuditEvent& e) {
  j = Json{{"seq", e.seq},
           {"row_id", e.row_id},
           {"action", std::string(to_string(e.action))},
           {"old", e.old_value},
           {"new", e.new_value},
           {"timestamp", e.timestamp}};
}

void from_json(const Json& j, AuditEvent& e) {
  try {
    e.seq = j.at("seq").get<std::uint64_t>();
    e.row_id = j.at("row_id").get<std::string>();
    const auto action = parse_action_kind(j.at("action").get<std::string>());
    if (!action) throw Error(ErrorCode::kParse, "audit event: unknown action");
    e.action = *action;
    e.old_value = j.at("old").get<std::string>();
    e.new_value = j.at("new").get<std::string>();
    e.timestamp = j.at("timestamp").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("audit event: ") + ex.what());
  }
}

void to_json(Json& j, const StoredDocument& d) {
  j = Json{{"doc_id", d.doc_id},
           {"filename", d.filename},
           {"mode", std::string(to_string(d.mode))},
           {"source", d.source},
           {"units", d.units},
           {"extraction", d.extraction},
           {"rows", d.rows},
           {"extracted", d.extracted},
           {"classified", d.classified},
           {"baseline_rows", d.baseline_rows},
           {"baseline_audit_offset", d.baseline_audit_offset},
           {"audit", d.audit}};
}

void from_json(const Json& j, StoredDocument& d) {
  try {
    d.doc_id = j.at("doc_id").get<std::string>();
    d.filename = j.at("filename").get<std::string>();
    const auto mode = parse_source_mode(j.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::kParse, "stored document: unknown mode");
    d.mode = *mode;
    d.source = j.at("source").get<std::string>();
    d.units = j.at("units").get<std::vector<TextUnit>>();
    d.extraction = j.at("extraction").get<ExtractionResult>();
    d.rows = j.at("rows").get<std::vector<RequirementRow>>();
    d.extracted = j.at("extracted").get<bool>();
    d.classified = j.at("classified").get<bool>();
    d.baseline_rows = j.at("baseline_rows").get<std::vector<RequirementRow>>();
    d.baseline_audit_offset = j.at("baseline_audit_offset").get<std::size_t>();
    d.audit = j.at("audit").get<std::vector<AuditEvent>>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("stored document: ") + ex.what());
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

namespace {

std::size_t find_row(const std::vector<RequirementRow>& rows, std::string_view row_id) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].object_identifier == row_id) return i;
  }
  throw Error(ErrorCode::kNotFound, "unknown row '" + std::string(row_id) + "'");
}

// Mirrors an edited TEXT row into the extraction it was generated from.
void edit_extraction_text(ExtractionResult& extraction, std::size_t row_index, const std::string& text) {
  std::size_t k = 0;
  for (auto& tuple : extraction.tuples) {
    if (row_index == k) return;  // title row
    ++k;
    if (row_index < k + tuple.texts.size()) {
      tuple.texts[row_index - k] = text;
      return;
    }
    k += tuple.texts.size();
  }
}

void apply_event(std::vector<RequirementRow>& rows, ExtractionResult* extraction,
                 const AuditEvent& e) {
  const std::size_t i = find_row(rows, e.row_id);
  RequirementRow& row = rows[i];
  switch (e.action) {
    case ActionKind::kConfirm:
      row.review_state = ReviewState::kConfirmed;
      row.corrected_type.reset();
      break;
    case ActionKind::kCorrect: {
      const auto label = parse_class_label(e.new_value);
      if (!label) throw Error(ErrorCode::kParse, "audit event carries unknown label '" + e.new_value + "'");
      row.review_state = ReviewState::kCorrected;
      row.corrected_type = label;
      row.object_type = label;
      break;
    }
    case ActionKind::kEditText:
      row.object_text = e.new_value;
      if (extraction) edit_extraction_text(*extraction, i, e.new_value);
      break;
  }
}

}  // namespace

StoredDocument apply_correction(const StoredDocument& doc, std::string_view row_id,
                                const ReviewAction& action, std::string timestamp) {
  const std::size_t i = find_row(doc.rows, row_id);
  const RequirementRow& row = doc.rows[i];

  AuditEvent event;
  event.seq = doc.audit.size() + 1;
  event.row_id = std::string(row_id);
  event.action = action.kind;
  event.timestamp = std::move(timestamp);
  switch (action.kind) {
    case ActionKind::kConfirm:
      event.old_value = std::string(to_string(row.review_state));
      event.new_value = std::string(to_string(ReviewState::kConfirmed));
      break;
    case ActionKind::kCorrect:
      if (!action.label) throw Error(ErrorCode::kInvalidArgument, "CORRECT requires a label");
      if (row.object_type == action.label) {
        throw Error(ErrorCode::kInvalidArgument,
                    "row already carries label " + std::string(to_string(*action.label)) +
                        "; use CONFIRM");
      }
      event.old_value = row.object_type ? std::string(to_string(*row.object_type)) : "";
      event.new_value = std::string(to_string(*action.label));
      break;
    case ActionKind::kEditText:
      if (row.kind != RowKind::kText) {
        throw Error(ErrorCode::kInvalidArgument, "EDIT_TEXT applies to TEXT rows only");
      }
      if (is_blank(action.text)) throw Error(ErrorCode::kInvalidArgument, "EDIT_TEXT requires non-blank text");
      event.old_value = row.object_text;
      event.new_value = action.text;
      break;
  }

  StoredDocument next = doc;
  apply_event(next.rows, &next.extraction, event);
  validate_row(next.rows[i]);
  next.audit.push_back(std::move(event));
  return next;
}

std::vector<RequirementRow> replay_audit(const StoredDocument& doc) {
  std::vector<RequirementRow> rows = doc.baseline_rows;
  for (std::size_t k = doc.baseline_audit_offset; k < doc.audit.size(); ++k) {
    apply_event(rows, nullptr, doc.audit[k]);
  }
  return rows;
}

StoredDocument extract_document(const StoredDocument& doc, SourceMode mode, const ForestModel* hf_model,
                                const std::set<std::string>& allowlist) {
  StoredDocument next = doc;
  next.mode = mode;
  const PagedDocument paged = read_paged(doc.source, mode, doc.doc_id);
  next.units = to_units(paged);
  FilterResult filtered;
  if (hf_model) {
    filtered = filter_units(next.units, *hf_model, allowlist);
  } else {
    filtered.kept = next.units;
  }
  next.extraction = assemble(filtered.kept, mode, doc.doc_id);
  next.extraction.removed_units = std::move(filtered.removed);
  next.rows = to_rows(next.extraction);
  next.extracted = true;
  next.classified = false;
  next.baseline_rows = next.rows;
  next.baseline_audit_offset = next.audit.size();
  return next;
}

StoredDocument classify_document(const StoredDocument& doc, const ClassifierBinding& binding) {
  if (!doc.extracted) throw Error(ErrorCode::kState, "document '" + doc.doc_id + "' is not extracted");
  StoredDocument next = doc;
  next.rows = classify_rows(binding, doc.rows, doc.doc_id).rows;
  next.classified = true;
  next.baseline_rows = next.rows;
  next.baseline_audit_offset = next.audit.size();
  return next;
}

// ---- DocumentStore ------------------------------------------------------------

DocumentStore::DocumentStore(std::string data_dir) : data_dir_(std::move(data_dir)) {
  std::error_code ec;
  fs::create_directories(fs::path(data_dir_) / "documents", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create data directory '" + data_dir_ + "': " + ec.message());

  const fs::path index = fs::path(data_dir_) / "index.json";
  if (!fs::exists(index)) return;
  const Json j = parse_json(read_file(index.string()), "index.json");
  next_id_ = j.value("next_id", std::uint64_t{1});
  for (const auto& item : j.at("documents")) {
    const auto id = item.at("doc_id").get<std::string>();
    auto e = std::make_shared<Entry>();
    e->doc = parse_json(read_file(document_path(id)), id).get<StoredDocument>();
    docs_.emplace(id, std::move(e));
  }
}

std::string DocumentStore::document_path(const std::string& doc_id) const {
  return (fs::path(data_dir_) / "documents" / (doc_id + ".json")).string();
}

void DocumentStore::persist(const StoredDocument& doc) const {
  write_file_atomic(document_path(doc.doc_id), Json(doc).dump() + "\n");
}

void DocumentStore::persist_index() const {
  Json docs = Json::array();
  for (const auto& [id, e] : docs_) {
    std::lock_guard read(e->read_mutex);
    docs.push_back(Json{{"doc_id", id}, {"filename", e->doc.filename}});
  }
  write_file_atomic((fs::path(data_dir_) / "index.json").string(),
                    Json{{"next_id", next_id_}, {"documents", std::move(docs)}}.dump(2) + "\n");
}

std::string DocumentStore::create(const std::string& filename, std::string content) {
  const std::string ext = to_lower_ascii(fs::path(filename).extension().string());
  if (ext != ".md" && ext != ".txt") {
    throw Error(ErrorCode::kUnsupportedMedia,
                "only .md and .txt uploads are accepted; convert PDF/DOC files to markdown or text "
                "with an external converter first");
  }
  if (!is_valid_utf8(content)) throw Error(ErrorCode::kDecode, "upload is not valid UTF-8");

  std::lock_guard lock(mutex_);
  char id[16];
  std::snprintf(id, sizeof(id), "D%05llu", static_cast<unsigned long long>(next_id_));
  auto e = std::make_shared<Entry>();
  e->doc.doc_id = id;
  e->doc.filename = fs::path(filename).filename().string();
  e->doc.mode = ext == ".md" ? SourceMode::kMarkdown : SourceMode::kPlaintext;
  e->doc.source = std::move(content);
  persist(e->doc);
  ++next_id_;
  docs_.emplace(id, e);
  persist_index();
  return id;
}

std::shared_ptr<DocumentStore::Entry> DocumentStore::entry(const std::string& doc_id) const {
  std::lock_guard lock(mutex_);
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) throw Error(ErrorCode::kNotFound, "unknown document '" + doc_id + "'");
  return it->second;
}

StoredDocument DocumentStore::get(const std::string& doc_id) const {
  auto e = entry(doc_id);
  std::lock_guard read(e->read_mutex);
  return e->doc;
}

StoredDocument DocumentStore::update(const std::string& doc_id,
                                     const std::function<StoredDocument(const StoredDocument&)>& fn) {
  auto e = entry(doc_id);
  std::lock_guard write(e->write_mutex);
  StoredDocument current;
  {
    std::lock_guard read(e->read_mutex);
    current = e->doc;
  }
  StoredDocument next = fn(current);
  if (next.doc_id != doc_id) throw Error(ErrorCode::kInvalidArgument, "update may not change doc_id");
  persist(next);
  {
    std::lock_guard read(e->read_mutex);
    e->doc = next;
  }
  return next;
}

std::vector<DocumentSummary> DocumentStore::list() const {
  std::vector<DocumentSummary> out;
  std::lock_guard lock(mutex_);
  for (const auto& [id, e] : docs_) {
    std::lock_guard read(e->read_mutex);
    out.push_back({id, e->doc.filename, e->doc.extracted, e->doc.classified});
  }
  return out;
}

}  // namespace rexcl
