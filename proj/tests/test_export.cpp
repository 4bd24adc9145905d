#include <doctest.h>

#include "rexcl/csv.hpp"
#include "rexcl/export.hpp"
#include "rexcl/json_io.hpp"
#include "support.hpp"

using namespace rexcl;

namespace {

RequirementRow main_task_title() {
  RequirementRow r;
  r.object_identifier = "D1-R00001";
  r.object_number = "1.1";
  r.object_heading = "Main Task";
  r.object_level = 2;
  r.kind = RowKind::kTitle;
  r.object_type = ClassLabel::kHeader;
  return r;
}

std::vector<std::vector<std::string>> fields_of(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  for (auto& r : csv::parse(text)) out.push_back(r.fields);
  return out;
}

}  // namespace

TEST_CASE("CSV layout") {
  CHECK(write_rows(std::vector<RequirementRow>{}, ExportFormat::kCsv) ==
        "Object Identifier,Object Number,Object Heading,Object Text,Object Level,Object Type,Confidence,"
        "Review State\n");
  const auto csv = write_rows(std::vector<RequirementRow>{main_task_title()}, ExportFormat::kCsv);
  const auto second_line = csv.substr(csv.find('\n') + 1);
  CHECK(second_line.rfind("D1-R00001,1.1,Main Task,,2,HEADER,", 0) == 0);
  CHECK(second_line == "D1-R00001,1.1,Main Task,,2,HEADER,,UNREVIEWED\n");
}

TEST_CASE("CSV quoting") {
  CHECK(csv::escape_field("a,\"b\"") == "\"a,\"\"b\"\"\"");
  CHECK(csv::escape_field("plain") == "plain");
  CHECK(csv::escape_field("line\nbreak") == "\"line\nbreak\"");
  CHECK(csv::escape_field("cr\r") == "\"cr\r\"");
  CHECK(csv::escape_field("") == "");
}

TEST_CASE("RFC-4180 adversarial fixtures") {
  using F = std::vector<std::vector<std::string>>;
  CHECK(fields_of("a,b,c\n") == F{{"a", "b", "c"}});
  CHECK(fields_of("a,b,c") == F{{"a", "b", "c"}});
  CHECK(fields_of("a,b\r\nc,d\r\n") == F{{"a", "b"}, {"c", "d"}});
  CHECK(fields_of("\"a,b\",c\n") == F{{"a,b", "c"}});
  CHECK(fields_of("\"he said \"\"hi\"\"\",x\n") == F{{"he said \"hi\"", "x"}});
  CHECK(fields_of("\"multi\nline\",\"crlf\r\ninside\"\n") == F{{"multi\nline", "crlf\r\ninside"}});
  CHECK(fields_of(",,\n") == F{{"", "", ""}});
  CHECK(fields_of("a,\n") == F{{"a", ""}});
  CHECK(fields_of("\"\"\n") == F{{""}});
  CHECK(fields_of("\"\"\"\"\n") == F{{"\""}});
  CHECK(fields_of("ünï,漢字\n") == F{{"ünï", "漢字"}});
  CHECK(fields_of(" spaced , kept \n") == F{{" spaced ", " kept "}});

  const auto lines = csv::parse("a\n\"b\nc\"\nd\n");
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].line == 2);
  CHECK(lines[2].line == 4);

  for (const char* bad : {"\"unterminated\n", "a\"b\n", "\"ok\"trailing\n", "a\rb\n"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(csv::parse(bad), Error);
  }
  CHECK_THROWS_WITH(csv::parse("a\nb\n\"open\n"), doctest::Contains("line 3"));
}

TEST_CASE("CSV records round trip through the parser") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    csv::Record rec;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) rec.push_back(testing::nasty_string(rng));
    if (rec.size() == 1 && rec[0].empty()) continue;  // an empty line carries no record
    const auto parsed = csv::parse(csv::format_record(rec));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].fields == rec);
  }
}

TEST_CASE("CSV schema errors name the column or line") {
  CHECK_THROWS_WITH_AS(read_rows("Object Identifier,Object Number\n", ExportFormat::kCsv),
                       doctest::Contains("Object Heading"), Error);
  const std::string header =
      "Object Identifier,Object Number,Object Heading,Object Text,Object Level,Object Type\n";
  CHECK_THROWS_WITH(read_rows(header + "X-R00001,1,H,,one,HEADER\n", ExportFormat::kCsv),
                    doctest::Contains("Object Level"));
  CHECK_THROWS_WITH(read_rows(header + "X-R00001,1,H,,1\n", ExportFormat::kCsv), doctest::Contains("line 2"));
  CHECK_THROWS_WITH(read_rows(header + "X-R00001,1,H,,1,BOGUS\n", ExportFormat::kCsv),
                    doctest::Contains("Object Type"));
  // The six interchange columns alone are accepted.
  const auto rows = read_rows(header + "X-R00001,1.2,,text,2,INFO\n", ExportFormat::kCsv);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].kind == RowKind::kText);
  CHECK(rows[0].object_type == ClassLabel::kInfo);
}

TEST_CASE("JSON and YAML schema errors") {
  CHECK_THROWS_AS(read_rows("{}", ExportFormat::kJson), Error);
  CHECK_THROWS_WITH(read_rows(R"([{"object_identifier":"x"}])", ExportFormat::kJson), doctest::Contains("row 1"));
  CHECK_THROWS_AS(read_rows("a: b\n", ExportFormat::kYaml), Error);
  CHECK_THROWS_WITH(read_rows("- object_identifier: x\n", ExportFormat::kYaml), doctest::Contains("line 1"));
  CHECK_THROWS_AS(read_rows("- [unclosed\n", ExportFormat::kYaml), Error);
}

TEST_CASE("round trip on random row sets in every format") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 200; ++i) {
    const auto rows = testing::random_rows(rng);
    for (ExportFormat f : {ExportFormat::kCsv, ExportFormat::kJson, ExportFormat::kYaml}) {
      CAPTURE(to_string(f));
      const auto bytes = write_rows(rows, f);
      CHECK(read_rows(bytes, f) == rows);
      CHECK(write_rows(rows, f) == bytes);
      CHECK((bytes.find('\r') == std::string::npos || f == ExportFormat::kCsv));
      CHECK(bytes.rfind("\xEF\xBB\xBF", 0) != 0);
    }
    CHECK(read_rows(write_rows(rows, ExportFormat::kJson), ExportFormat::kJson) ==
          read_rows(write_rows(rows, ExportFormat::kYaml), ExportFormat::kYaml));
  }
}

TEST_CASE("invalid rows are refused on write") {
  auto r = main_task_title();
  r.object_level = 4;
  CHECK_THROWS_AS(write_rows(std::vector<RequirementRow>{r}, ExportFormat::kJson), Error);
}

TEST_CASE("format names and content types") {
  CHECK(parse_export_format("yaml") == ExportFormat::kYaml);
  CHECK(parse_export_format("YAML") == std::nullopt);
  CHECK(content_type(ExportFormat::kCsv) == "text/csv; charset=utf-8");
}
