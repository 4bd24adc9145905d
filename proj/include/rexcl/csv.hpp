#pragma once

// Minimal RFC-4180 reader/writer. Records end with LF on output; LF and CRLF
// are both accepted on input.

#include <string>
#include <string_view>
#include <vector>

namespace rexcl::csv {

using Record = std::vector<std::string>;

struct ParsedRecord {
  Record fields;
  int line = 0;  // 1-based physical line where the record starts
};

/// Quotes the field when it contains a comma, quote, CR or LF.
std::string escape_field(std::string_view field);
std::string format_record(const Record& record);

/// Throws Error(kParse) with the line number on malformed quoting.
std::vector<ParsedRecord> parse(std::string_view text);

}  // namespace rexcl::csv
