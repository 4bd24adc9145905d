#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "rexcl/hf_filter.hpp"

namespace rexcl {

std::string_view to_string(HfLabel label) {
  return label == HfLabel::kHeaderFooter ? "HF" : "TEXT";
}

std::optional<HfLabel> parse_hf_label(std::string_view name) {
  if (name == "HF") return HfLabel::kHeaderFooter;
  if (name == "TEXT") return HfLabel::kReqText;
  return std::nullopt;
}

std::string normalize_hf_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : trim(text)) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
      pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c >= '0' && c <= '9') {
      c = '0';
    } else if (c >= 'A' && c <= 'Z') {
      c = static_cast<char>(c - 'A' + 'a');
    }
    out.push_back(c);
  }
  return out;
}

std::vector<HfFeatures> compute_features(std::span<const TextUnit> units, int total_pages) {
  if (units.empty()) throw Error(ErrorCode::kInvalidArgument, "compute_features: no units");
  int max_page = 0;
  for (const auto& u : units) {
    if (u.page < 1 || u.line_index < 0 || u.page_line_count < 1 ||
        u.line_index >= u.page_line_count) {
      throw Error(ErrorCode::kInvalidArgument, "compute_features: inconsistent page metadata");
    }
    max_page = std::max(max_page, u.page);
  }
  if (total_pages <= 0) total_pages = max_page;
  if (total_pages < max_page) {
    throw Error(ErrorCode::kInvalidArgument, "compute_features: unit page exceeds page count");
  }

  std::vector<std::string> keys;
  keys.reserve(units.size());
  std::unordered_map<std::string, std::unordered_set<int>> pages_by_text;
  for (const auto& u : units) {
    keys.push_back(normalize_hf_text(u.text));
    pages_by_text[keys.back()].insert(u.page);
  }

  std::vector<HfFeatures> out;
  out.reserve(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    HfFeatures f;
    f.frequency = static_cast<double>(pages_by_text[keys[i]].size()) / total_pages;
    f.position = static_cast<double>(u.line_index) / std::max(1, u.page_line_count - 1);
    out.push_back(f);
  }
  return out;
}

std::set<std::string> default_allowlist() {
  return {normalize_hf_text("No Requirement"), normalize_hf_text("Not Applicable"),
          normalize_hf_text("N.A.")};
}

std::set<std::string> parse_allowlist(std::string_view text) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line =
        trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (!line.empty() && line.front() != '#') out.insert(normalize_hf_text(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

FilterResult filter_units(std::span<const TextUnit> units, std::span<const HfFeatures> features,
                          const ForestModel& model, const std::set<std::string>& allowlist) {
  if (units.size() != features.size()) {
    throw Error(ErrorCode::kInvalidArgument, "filter_units: features not aligned with units");
  }
  FilterResult result;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    const bool furniture = model.predict(features[i]).label == HfLabel::kHeaderFooter;
    const bool removable =
        furniture && u.md_heading_depth == 0 && !allowlist.contains(normalize_hf_text(u.text));
    (removable ? result.removed : result.kept).push_back(u);
  }
  return result;
}

FilterResult filter_units(std::span<const TextUnit> units, const ForestModel& model,
                          const std::set<std::string>& allowlist) {
  if (!model.trained()) throw Error(ErrorCode::kState, "header/footer model is not trained");
  if (units.empty()) return {};
  const auto features = compute_features(units);
  return filter_units(units, features, model, allowlist);
}

}  // namespace rexcl
