#pragma once

// JSON mappings for the core types. Keys are snake_case and emitted in a
// fixed order so that serialized documents are byte-deterministic.

#include <json.hpp>

#include "rexcl/core.hpp"

namespace rexcl {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const TextUnit& u);
void from_json(const Json& j, TextUnit& u);
void to_json(Json& j, const SectionTitle& t);
void from_json(const Json& j, SectionTitle& t);
void to_json(Json& j, const SectionTuple& t);
void from_json(const Json& j, SectionTuple& t);
void to_json(Json& j, const ExtractionResult& r);
void from_json(const Json& j, ExtractionResult& r);
void to_json(Json& j, const RequirementRow& r);
void from_json(const Json& j, RequirementRow& r);
void to_json(Json& j, const FinalOutput& f);
void from_json(const Json& j, FinalOutput& f);

/// Parses text as JSON, converting library exceptions into Error(kParse).
Json parse_json(std::string_view text, std::string_view what);

std::string read_file(const std::string& path);
/// Writes via a temporary sibling, fsyncs, then renames over the target.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace rexcl
