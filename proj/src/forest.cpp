#include <algorithm>
#include <future>
#include <numeric>
#include <random>
#include <thread>

#include "rexcl/hf_filter.hpp"

namespace rexcl {

namespace {

constexpr int kModelVersion = 1;

double gini(const std::array<int, 2>& counts) {
  const double n = counts[0] + counts[1];
  if (n == 0) return 0.0;
  const double p0 = counts[0] / n;
  const double p1 = counts[1] / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

HfLabel leaf_label(const std::array<int, 2>& counts) {
  return counts[0] > counts[1] ? HfLabel::kHeaderFooter : HfLabel::kReqText;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const HfSample> samples, int max_depth)
      : samples_(samples), max_depth_(max_depth) {}

  std::vector<TreeNode> build(std::vector<std::size_t> indices) {
    grow(std::move(indices), 0);
    return std::move(nodes_);
  }

 private:
  std::array<int, 2> count(const std::vector<std::size_t>& idx) const {
    std::array<int, 2> c{0, 0};
    for (auto i : idx) ++c[static_cast<int>(samples_[i].label)];
    return c;
  }

  Split best_split(std::vector<std::size_t>& idx, const std::array<int, 2>& total) const {
    Split best;
    best.impurity = gini(total);
    const double n = static_cast<double>(idx.size());
    for (int f = 0; f < 2; ++f) {
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return samples_[a].features[f] < samples_[b].features[f];
      });
      std::array<int, 2> left{0, 0};
      for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        ++left[static_cast<int>(samples_[idx[k]].label)];
        const double v = samples_[idx[k]].features[f];
        const double next = samples_[idx[k + 1]].features[f];
        if (!(v < next)) continue;
        const std::array<int, 2> right{total[0] - left[0], total[1] - left[1]};
        const double nl = static_cast<double>(k + 1);
        const double weighted = (nl / n) * gini(left) + ((n - nl) / n) * gini(right);
        if (weighted < best.impurity - 1e-12) {
          best = {f, v + (next - v) / 2.0, weighted};
        }
      }
    }
    return best;
  }

  int grow(std::vector<std::size_t> idx, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const auto counts = count(idx);
    nodes_[id].counts = counts;
    if (depth >= max_depth_ || counts[0] == 0 || counts[1] == 0) return id;

    const Split split = best_split(idx, counts);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx) {
      (samples_[i].features[split.feature] <= split.threshold ? left_idx : right_idx).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int left = grow(std::move(left_idx), depth + 1);
    const int right = grow(std::move(right_idx), depth + 1);
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  std::span<const HfSample> samples_;
  int max_depth_;
  std::vector<TreeNode> nodes_;
};

void validate_nodes(const std::vector<TreeNode>& nodes) {
  if (nodes.empty()) throw Error(ErrorCode::kInvalidArgument, "decision tree has no nodes");
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i) {
    const auto& node = nodes[i];
    if (node.is_leaf()) {
      if (node.counts[0] < 0 || node.counts[1] < 0 || node.counts[0] + node.counts[1] < 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    "leaf " + std::to_string(i) + " has no training samples");
      }
      continue;
    }
    if (node.feature != 0 && node.feature != 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "node " + std::to_string(i) + " splits on unknown feature");
    }
    // Children always follow their parent, which also rules out cycles.
    if (node.left <= i || node.left >= n || node.right <= i || node.right >= n) {
      throw Error(ErrorCode::kInvalidArgument,
                  "node " + std::to_string(i) + " has out-of-range children");
    }
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  validate_nodes(nodes_);
}

DecisionTree DecisionTree::train(std::span<const HfSample> samples,
                                 std::span<const std::size_t> indices, int max_depth) {
  if (indices.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot train a tree on no samples");
  if (max_depth < 1) throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 1");
  for (auto i : indices) {
    if (i >= samples.size()) throw Error(ErrorCode::kInvalidArgument, "sample index out of range");
  }
  TreeBuilder builder(samples, max_depth);
  return DecisionTree(builder.build({indices.begin(), indices.end()}));
}

HfLabel DecisionTree::predict(const HfFeatures& f) const {
  int id = 0;
  while (!nodes_[id].is_leaf()) {
    const auto& node = nodes_[id];
    id = f[node.feature] <= node.threshold ? node.left : node.right;
  }
  return leaf_label(nodes_[id].counts);
}

int DecisionTree::depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    deepest = std::max(deepest, depth[i]);
    if (!node.is_leaf()) {
      depth[node.left] = depth[i] + 1;
      depth[node.right] = depth[i] + 1;
    }
  }
  return deepest;
}

ForestModel ForestModel::from_trees(std::vector<DecisionTree> trees, ForestParams params) {
  if (trees.empty()) throw Error(ErrorCode::kInvalidArgument, "forest needs at least one tree");
  ForestModel model;
  params.num_trees = static_cast<int>(trees.size());
  model.trees_ = std::move(trees);
  model.params_ = params;
  model.trained_ = true;
  return model;
}

HfPrediction ForestModel::predict(const HfFeatures& f) const {
  if (!trained_) throw Error(ErrorCode::kState, "header/footer model is not trained");
  int votes = 0;
  for (const auto& tree : trees_) votes += tree.predict(f) == HfLabel::kHeaderFooter ? 1 : 0;
  const int n = static_cast<int>(trees_.size());
  HfPrediction out;
  out.score = static_cast<double>(votes) / n;
  out.label = 2 * votes > n ? HfLabel::kHeaderFooter : HfLabel::kReqText;
  return out;
}

Json ForestModel::to_json() const {
  if (!trained_) throw Error(ErrorCode::kState, "cannot serialize an untrained model");
  Json trees = Json::array();
  for (const auto& tree : trees_) {
    Json nodes = Json::array();
    for (const auto& n : tree.nodes()) {
      nodes.push_back(Json{{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"counts", n.counts}});
    }
    trees.push_back(Json{{"nodes", std::move(nodes)}});
  }
  return Json{{"version", kModelVersion},
              {"params",
               {{"num_trees", params_.num_trees},
                {"max_depth", params_.max_depth},
                {"seed", params_.seed}}},
              {"trees", std::move(trees)}};
}

ForestModel ForestModel::from_json(const Json& j) {
  try {
    if (j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorCode::kParse, "unsupported hf-model version");
    }
    ForestParams params;
    params.num_trees = j.at("params").at("num_trees").get<int>();
    params.max_depth = j.at("params").at("max_depth").get<int>();
    params.seed = j.at("params").at("seed").get<std::uint64_t>();
    std::vector<DecisionTree> trees;
    for (const auto& t : j.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& n : t.at("nodes")) {
        TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.counts = n.at("counts").get<std::array<int, 2>>();
        nodes.push_back(node);
      }
      trees.emplace_back(std::move(nodes));
    }
    if (static_cast<int>(trees.size()) != params.num_trees) {
      throw Error(ErrorCode::kParse, "hf-model tree count does not match params.num_trees");
    }
    return from_trees(std::move(trees), params);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("hf-model: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, std::string("hf-model: ") + e.what());
  }
}

std::uint64_t tree_seed(std::uint64_t forest_seed, int tree_index) {
  return splitmix64(forest_seed ^ splitmix64(static_cast<std::uint64_t>(tree_index) + 1));
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
  // Raw engine output is portable across standard libraries; distributions are not.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = static_cast<std::size_t>(rng() % n);
  return out;
}

ForestModel train_forest(std::span<const HfSample> samples, const ForestParams& params) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "no training samples");
  if (params.num_trees < 1) throw Error(ErrorCode::kInvalidArgument, "num_trees must be >= 1");
  if (params.max_depth < 1) throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 1");
  for (const auto& s : samples) {
    for (int f = 0; f < 2; ++f) {
      if (!(s.features[f] >= 0.0 && s.features[f] <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "feature value outside [0,1]");
      }
    }
  }

  // Trees depend only on (seed, index), so the result is independent of how
  // the work is spread over threads.
  const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  std::vector<DecisionTree> trees(static_cast<std::size_t>(params.num_trees));
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t t = w; t < trees.size(); t += workers) {
        const auto idx = bootstrap_indices(samples.size(), tree_seed(params.seed, static_cast<int>(t)));
        trees[t] = DecisionTree::train(samples, idx, params.max_depth);
      }
    }));
  }
  for (auto& j : jobs) j.get();
  return ForestModel::from_trees(std::move(trees), params);
}

}  // namespace rexcl
