#pragma once

// Requirement-type labelling of rows: text preprocessing, a naive-Bayes
// baseline with a structural prior for title rows, and a client for external
// classifiers speaking the JSON wire protocol.

#include <array>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "rexcl/core.hpp"
#include "rexcl/json_io.hpp"

namespace rexcl {

using TokenSeq = std::vector<std::string>;

/// Stopwords from the shipped resource file (comment lines excluded).
const std::set<std::string, std::less<>>& stopwords();
/// Negations and modal verbs kept even when they are stopwords.
const std::set<std::string, std::less<>>& retained_words();
/// Raw text of the shipped stopword resource.
std::string_view stopword_resource();

/// Lowercase, whitespace split, punctuation stripped except '_' and internal
/// apostrophes, stopwords dropped unless retained.
TokenSeq preprocess(std::string_view text);

struct LabeledText {
  TokenSeq tokens;
  RowKind kind = RowKind::kText;
  ClassLabel label = ClassLabel::kInfo;
};

inline constexpr double kDefaultTitlePrior = 5.0;

class BaselineModel {
 public:
  /// Multinomial naive Bayes with add-one smoothing. Throws
  /// Error(kInvalidArgument) naming any class without examples.
  static BaselineModel train(std::span<const LabeledText> rows,
                             double title_prior = kDefaultTitlePrior);

  struct Posterior {
    ClassLabel label = ClassLabel::kInfo;
    std::array<double, kNumClassLabels> probabilities{};
    double confidence() const { return probabilities[static_cast<std::size_t>(label)]; }
  };

  /// Normalized class posterior. Tokens outside the vocabulary are ignored;
  /// TITLE rows multiply the HEADER posterior by the structural prior.
  Posterior posterior(std::span<const std::string> tokens, RowKind kind) const;

  double prior(ClassLabel c) const { return priors_[static_cast<std::size_t>(c)]; }
  /// log P(token | class); throws Error(kNotFound) for out-of-vocabulary tokens.
  double log_likelihood(std::string_view token, ClassLabel c) const;
  std::size_t vocabulary_size() const { return vocabulary_.size(); }
  double title_prior() const { return title_prior_; }

  Json to_json() const;
  static BaselineModel from_json(const Json& j);

  bool operator==(const BaselineModel&) const = default;

 private:
  std::vector<std::string> vocabulary_;  // index -> token, sorted
  std::unordered_map<std::string, std::size_t> index_;
  std::array<double, kNumClassLabels> priors_{};
  std::array<std::vector<double>, kNumClassLabels> log_likelihood_;
  double title_prior_ = kDefaultTitlePrior;
};

struct ExternalEndpoint {
  std::string url;  // base URL; "/classify" is appended unless already present
  int timeout_ms = 30000;
  std::size_t batch_size = 256;
  int max_in_flight = 4;
};

using ClassifierBinding = std::variant<BaselineModel, ExternalEndpoint>;

/// Carries the rows labelled before the failure; unlabelled rows keep an
/// unset object_type.
class ClassificationError : public Error {
 public:
  ClassificationError(const std::string& message, FinalOutput partial)
      : Error(ErrorCode::kClassification, message), partial_(std::move(partial)) {}
  const FinalOutput& partial() const { return partial_; }

 private:
  FinalOutput partial_;
};

/// Labels every row. Rows under human correction keep their corrected label
/// with confidence 1. TEXT rows without tokens fall back to INFO at the INFO
/// prior. Throws Error(kInvalidArgument) on an empty row list.
FinalOutput classify_rows(const ClassifierBinding& binding, std::span<const RequirementRow> rows,
                          std::string doc_id = {});

/// Wire-protocol helpers, shared with tests and the service.
Json make_classify_request(std::span<const RequirementRow> rows);
struct WireLabel {
  std::string id;
  ClassLabel label;
  double confidence;
};
/// Throws Error(kParse) on schema violations.
std::vector<WireLabel> parse_classify_response(const Json& body);

}  // namespace rexcl
