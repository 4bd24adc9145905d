#include "rexcl/section_extract.hpp"

#include <algorithm>
#include <map>

namespace rexcl {

std::optional<SectionTitle> parse_section_title_md(const TextUnit& unit) {
  if (unit.md_heading_depth <= 0) return std::nullopt;
  const std::string_view text(unit.text);
  const std::string_view rest = trim(text.substr(std::min<std::size_t>(unit.md_heading_depth, text.size())));
  if (rest.empty()) return std::nullopt;
  if (auto numbered = parse_numbered_title(rest)) return numbered;
  return SectionTitle{"", {}, std::string(rest), true};
}

namespace {

struct OpenHeading {
  int depth;
  SectionPath path;
};

SectionTitle preamble_title() {
  return SectionTitle{"", {0}, std::string(kPreambleHeading), true};
}

}  // namespace

ExtractionResult assemble(std::span<const TextUnit> units, SourceMode mode, std::string doc_id) {
  ExtractionResult result;
  result.doc_id = std::move(doc_id);

  std::vector<OpenHeading> stack;
  std::map<SectionPath, int> last_child;  // highest ordinal used under each parent

  for (const auto& unit : units) {
    std::optional<SectionTitle> title = mode == SourceMode::kMarkdown
                                            ? parse_section_title_md(unit)
                                            : detect_title_plaintext(unit);
    if (!title) {
      if (result.tuples.empty()) {
        result.tuples.push_back({preamble_title(), {}});
        int& top = last_child[{}];
        top = std::max(top, 0);
      }
      result.tuples.back().texts.push_back(unit.text);
      continue;
    }

    const int depth = mode == SourceMode::kMarkdown
                          ? unit.md_heading_depth
                          : static_cast<int>(title->canonical_path.size());
    while (!stack.empty() && stack.back().depth >= depth) stack.pop_back();

    if (title->synthesized) {
      SectionPath path = stack.empty() ? SectionPath{} : stack.back().path;
      const int ordinal = last_child[path] + 1;
      path.push_back(ordinal);
      title->canonical_path = std::move(path);
    }
    const SectionPath& path = title->canonical_path;
    int& sibling = last_child[SectionPath(path.begin(), path.end() - 1)];
    sibling = std::max(sibling, path.back());

    stack.push_back({depth, path});
    result.tuples.push_back({std::move(*title), {}});
  }
  return result;
}

std::vector<RequirementRow> to_rows(const ExtractionResult& extraction) {
  std::map<SectionPath, const SectionTitle*> seen;
  std::string collisions;
  for (const auto& tuple : extraction.tuples) {
    if (tuple.title.canonical_path.empty()) {
      throw Error(ErrorCode::kNumbering, "title '" + tuple.title.heading + "' has no section number");
    }
    auto [it, inserted] = seen.emplace(tuple.title.canonical_path, &tuple.title);
    if (!inserted) {
      if (!collisions.empty()) collisions += "; ";
      collisions += render_number(tuple.title.canonical_path) + ": '" + it->second->heading +
                    "' and '" + tuple.title.heading + "'";
    }
  }
  if (!collisions.empty()) {
    throw Error(ErrorCode::kNumbering, "duplicate section numbers: " + collisions);
  }

  std::vector<RequirementRow> rows;
  int ordinal = 0;
  for (const auto& tuple : extraction.tuples) {
    RequirementRow title;
    title.object_identifier = make_row_identifier(extraction.doc_id, ++ordinal);
    title.object_number = render_number(tuple.title.canonical_path);
    title.object_heading = tuple.title.heading;
    title.object_level = static_cast<int>(tuple.title.canonical_path.size());
    title.kind = RowKind::kTitle;
    rows.push_back(std::move(title));

    SectionPath path = tuple.title.canonical_path;
    path.push_back(0);
    for (std::size_t j = 0; j < tuple.texts.size(); ++j) {
      path.back() = static_cast<int>(j) + 1;
      RequirementRow text;
      text.object_identifier = make_row_identifier(extraction.doc_id, ++ordinal);
      text.object_number = render_number(path);
      text.object_text = tuple.texts[j];
      text.object_level = static_cast<int>(path.size());
      text.kind = RowKind::kText;
      rows.push_back(std::move(text));
    }
  }
  return rows;
}

}  // namespace rexcl
