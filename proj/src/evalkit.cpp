#include <cmath>
#include <map>
#include <tuple>

#include "rexcl/evalkit.hpp"

namespace rexcl {

namespace {

double ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

}  // namespace

Prf1 prf1(long tp, long fp, long fn) {
  if (tp < 0 || fp < 0 || fn < 0) throw Error(ErrorCode::kInvalidArgument, "prf1: negative count");
  Prf1 out;
  out.precision = ratio(tp, tp + fp);
  out.recall = ratio(tp, tp + fn);
  // Equal to the harmonic mean, without the 0/0 case when tp = 0.
  out.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  return out;
}

double macro_f1(std::span<const Counts> per_class) {
  if (per_class.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : per_class) sum += prf1(c).f1;
  return sum / static_cast<double>(per_class.size());
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::kInvalidArgument, "pearson: length mismatch");
  if (xs.size() < 2) throw Error(ErrorCode::kInvalidArgument, "pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kUndefinedCorrelation, "pearson: zero variance");
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::max(-1.0, std::min(1.0, r));
}

double likert_average(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "likert_average: no scores");
  double sum = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 5.0)) {
      throw Error(ErrorCode::kInvalidArgument, "likert_average: score outside [0,5]");
    }
    sum += s;
  }
  return sum / static_cast<double>(scores.size());
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::vector<Counts> class_counts(std::span<const int> truth, std::span<const int> predicted,
                                 int num_classes) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument, "class_counts: length mismatch");
  }
  std::vector<Counts> out(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
      throw Error(ErrorCode::kInvalidArgument, "class_counts: label out of range");
    }
    if (t == p) {
      ++out[t].tp;
    } else {
      ++out[p].fp;
      ++out[t].fn;
    }
  }
  return out;
}

double row_accuracy(std::span<const RequirementRow> expected,
                    std::span<const RequirementRow> predicted) {
  if (expected.empty() && predicted.empty()) return 1.0;
  using Key = std::tuple<std::string, RowKind, std::string, std::string>;
  std::map<Key, long> pool;
  for (const auto& r : predicted) {
    ++pool[{r.object_number, r.kind, r.object_heading, r.object_text}];
  }
  long matched = 0;
  for (const auto& r : expected) {
    auto it = pool.find({r.object_number, r.kind, r.object_heading, r.object_text});
    if (it != pool.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  return static_cast<double>(matched) /
         static_cast<double>(std::max(expected.size(), predicted.size()));
}

ForestModel default_hf_model() {
  return train_forest(hf_benchmark_samples(0xdef0, 1500, 2500), ForestParams{});
}

BaselineModel default_baseline_model() {
  std::vector<LabeledText> train;
  for (auto& r : labeled_rows(0xdef1, 4000)) {
    train.push_back({preprocess(r.text), r.kind, r.label});
  }
  return BaselineModel::train(train);
}

}  // namespace rexcl
