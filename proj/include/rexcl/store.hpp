#pragma once

// File-backed document store for the review workflow. Every review action is
// recorded as an audit event; replaying the events recorded since the last
// pipeline run over that run's rows reproduces the live rows.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rexcl/classify.hpp"
#include "rexcl/core.hpp"
#include "rexcl/hf_filter.hpp"
#include "rexcl/ingest.hpp"
#include "rexcl/json_io.hpp"

namespace rexcl {

enum class ActionKind { kConfirm, kCorrect, kEditText };
std::string_view to_string(ActionKind kind);
std::optional<ActionKind> parse_action_kind(std::string_view name);

struct ReviewAction {
  ActionKind kind = ActionKind::kConfirm;
  std::optional<ClassLabel> label;  // CORRECT
  std::string text;                 // EDIT_TEXT

  static ReviewAction confirm() { return {ActionKind::kConfirm, std::nullopt, {}}; }
  static ReviewAction correct(ClassLabel l) { return {ActionKind::kCorrect, l, {}}; }
  static ReviewAction edit_text(std::string t) { return {ActionKind::kEditText, std::nullopt, std::move(t)}; }
};

struct AuditEvent {
  std::uint64_t seq = 0;
  std::string row_id;
  ActionKind action = ActionKind::kConfirm;
  std::string old_value;
  std::string new_value;
  std::string timestamp;  // ISO-8601 UTC

  bool operator==(const AuditEvent&) const = default;
};

struct StoredDocument {
  std::string doc_id;
  std::string filename;
  SourceMode mode = SourceMode::kMarkdown;
  std::string source;  // uploaded bytes (UTF-8)
  std::vector<TextUnit> units;
  ExtractionResult extraction;
  std::vector<RequirementRow> rows;
  bool extracted = false;
  bool classified = false;
  // Rows as produced by the last pipeline run and the audit length at that time.
  std::vector<RequirementRow> baseline_rows;
  std::size_t baseline_audit_offset = 0;
  std::vector<AuditEvent> audit;  // append-only

  bool operator==(const StoredDocument&) const = default;
};

void to_json(Json& j, const AuditEvent& e);
void from_json(const Json& j, AuditEvent& e);
void to_json(Json& j, const StoredDocument& d);
void from_json(const Json& j, StoredDocument& d);

std::string utc_timestamp();

/// Applies one review action and appends its audit event. Throws
/// Error(kNotFound) for an unknown row, Error(kInvalidArgument) for a CORRECT
/// to the current label or an EDIT_TEXT on a TITLE row; the input document is
/// never modified.
StoredDocument apply_correction(const StoredDocument& doc, std::string_view row_id,
                                const ReviewAction& action, std::string timestamp = utc_timestamp());

/// Baseline rows with every audit event after the baseline re-applied.
std::vector<RequirementRow> replay_audit(const StoredDocument& doc);

/// Runs ingest, header/footer removal and section extraction; resets the
/// row baseline.
StoredDocument extract_document(const StoredDocument& doc, SourceMode mode, const ForestModel* hf_model,
                                const std::set<std::string>& allowlist = default_allowlist());

/// Labels the rows (corrections survive) and resets the row baseline.
StoredDocument classify_document(const StoredDocument& doc, const ClassifierBinding& binding);

struct DocumentSummary {
  std::string doc_id;
  std::string filename;
  bool extracted = false;
  bool classified = false;
};

class DocumentStore {
 public:
  /// Creates the directory layout if needed and loads existing documents.
  explicit DocumentStore(std::string data_dir);

  /// Throws Error(kUnsupportedMedia) unless the name ends in .md or .txt and
  /// Error(kDecode) for non-UTF-8 content.
  std::string create(const std::string& filename, std::string content);

  /// Snapshot of the last persisted state; throws Error(kNotFound).
  StoredDocument get(const std::string& doc_id) const;

  /// Serializes writers per document; the new state becomes visible only
  /// after it has been persisted.
  StoredDocument update(const std::string& doc_id,
                        const std::function<StoredDocument(const StoredDocument&)>& fn);

  std::vector<DocumentSummary> list() const;
  const std::string& data_dir() const { return data_dir_; }

 private:
  struct Entry {
    std::mutex write_mutex;
    mutable std::mutex read_mutex;
    StoredDocument doc;
  };

  std::shared_ptr<Entry> entry(const std::string& doc_id) const;
  std::string document_path(const std::string& doc_id) const;
  void persist(const StoredDocument& doc) const;
  void persist_index() const;  // requires mutex_

  std::string data_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> docs_;
  std::uint64_t next_id_ = 1;
};

}  // namespace rexcl
