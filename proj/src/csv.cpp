#include "rexcl/csv.hpp"

#include "rexcl/core.hpp"

namespace rexcl::csv {

std::string escape_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_record(const Record& record) {
  std::string line;
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i > 0) line.push_back(',');
    line += escape_field(record[i]);
  }
  line.push_back('\n');
  return line;
}

std::vector<ParsedRecord> parse(std::string_view text) {
  std::vector<ParsedRecord> records;
  int line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParse, "csv line " + std::to_string(line) + ": " + what);
  };

  while (i < n) {
    ParsedRecord rec;
    rec.line = line;
    while (true) {
      std::string field;
      if (i < n && text[i] == '"') {
        const int opened = line;
        ++i;
        while (true) {
          if (i >= n) {
            throw Error(ErrorCode::kParse,
                        "csv line " + std::to_string(opened) + ": unterminated quoted field");
          }
          const char c = text[i++];
          if (c == '"') {
            if (i < n && text[i] == '"') {
              field.push_back('"');
              ++i;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.push_back(c);
          }
        }
        if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          fail("unexpected character after closing quote");
        }
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"') fail("quote inside unquoted field");
          field.push_back(text[i++]);
        }
      }
      rec.fields.push_back(std::move(field));
      if (i < n && text[i] == ',') {
        ++i;
        continue;
      }
      break;
    }
    if (i < n && text[i] == '\r') {
      ++i;
      if (i >= n || text[i] != '\n') fail("bare carriage return");
    }
    if (i < n && text[i] == '\n') {
      ++i;
      ++line;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace rexcl::csv
