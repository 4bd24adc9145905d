#pragma once

// Header/footer detection. Every unit gets two features, how often its
// (digit-folded) text recurs across pages and where it sits on its page, and a
// small Random Forest decides whether it is page furniture.

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rexcl/core.hpp"
#include "rexcl/json_io.hpp"

namespace rexcl {

struct HfFeatures {
  double frequency = 0.0;  // share of pages carrying the same normalized text
  double position = 0.0;   // 0 = first line of the page, 1 = last

  double operator[](int feature) const { return feature == 0 ? frequency : position; }
  bool operator==(const HfFeatures&) const = default;
};

enum class HfLabel : std::uint8_t { kHeaderFooter = 0, kReqText = 1 };
std::string_view to_string(HfLabel label);
std::optional<HfLabel> parse_hf_label(std::string_view name);  // "HF" / "TEXT"

struct HfSample {
  HfFeatures features;
  HfLabel label = HfLabel::kReqText;
};

/// Lowercases, folds whitespace runs into one space, trims and maps every
/// ASCII digit to '0' ("Page 3 of 10" == "Page 7 of 10").
std::string normalize_hf_text(std::string_view text);

/// Throws Error(kInvalidArgument) on empty input. The page count defaults to
/// the highest page number present.
std::vector<HfFeatures> compute_features(std::span<const TextUnit> units, int total_pages = 0);

struct ForestParams {
  int num_trees = 50;
  int max_depth = 6;
  std::uint64_t seed = 0x5eed;

  bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // taken when value <= threshold
  int right = -1;
  std::array<int, 2> counts{0, 0};  // indexed by HfLabel

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes);

  /// CART with Gini impurity over the samples selected by `indices`
  /// (duplicates allowed). Candidate thresholds are midpoints of sorted
  /// distinct feature values.
  static DecisionTree train(std::span<const HfSample> samples,
                            std::span<const std::size_t> indices, int max_depth);

  HfLabel predict(const HfFeatures& f) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct HfPrediction {
  HfLabel label = HfLabel::kReqText;
  double score = 0.0;  // fraction of trees voting header/footer
};

class ForestModel {
 public:
  ForestModel() = default;

  /// Builds a trained model from explicit trees (fixtures, deserialization).
  static ForestModel from_trees(std::vector<DecisionTree> trees, ForestParams params);

  bool trained() const { return trained_; }
  const ForestParams& params() const { return params_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  /// Majority vote; an even split keeps the unit as text.
  /// Throws Error(kState) when the model is untrained.
  HfPrediction predict(const HfFeatures& f) const;

  Json to_json() const;
  static ForestModel from_json(const Json& j);

  bool operator==(const ForestModel&) const = default;

 private:
  std::vector<DecisionTree> trees_;
  ForestParams params_;
  bool trained_ = false;
};

/// Seed of the bootstrap resample for tree `tree_index`.
std::uint64_t tree_seed(std::uint64_t forest_seed, int tree_index);

/// `n` draws with replacement from [0, n).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

/// Throws Error(kInvalidArgument) on an empty sample set or bad params.
ForestModel train_forest(std::span<const HfSample> samples, const ForestParams& params = {});

std::set<std::string> default_allowlist();
/// One phrase per line; blank lines and lines starting with '#' are skipped.
std::set<std::string> parse_allowlist(std::string_view text);

struct FilterResult {
  std::vector<TextUnit> kept;
  std::vector<TextUnit> removed;
};

FilterResult filter_units(std::span<const TextUnit> units, const ForestModel& model,
                          const std::set<std::string>& allowlist = default_allowlist());

/// Variant with precomputed features aligned with `units`.
FilterResult filter_units(std::span<const TextUnit> units, std::span<const HfFeatures> features,
                          const ForestModel& model,
                          const std::set<std::string>& allowlist = default_allowlist());

}  // namespace rexcl
