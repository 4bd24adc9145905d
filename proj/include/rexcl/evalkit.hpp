#pragma once

// Evaluation helpers: classification metrics, agreement statistics and a
// seeded synthetic corpus generator that provides ground truth for every stage.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rexcl/classify.hpp"
#include "rexcl/core.hpp"
#include "rexcl/hf_filter.hpp"
#include "rexcl/ingest.hpp"
#include "rexcl/json_io.hpp"

namespace rexcl {

// ---- metrics ----------------------------------------------------------------

struct Counts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 0/0 ratios are defined as 0.
Prf1 prf1(long tp, long fp, long fn);
inline Prf1 prf1(const Counts& c) { return prf1(c.tp, c.fp, c.fn); }

/// Unweighted mean of per-class F1; 0 for an empty list.
double macro_f1(std::span<const Counts> per_class);

/// Product-moment correlation. Throws Error(kInvalidArgument) on length
/// mismatch or fewer than two points, Error(kUndefinedCorrelation) when either
/// side has zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Mean of scores on the 0..5 scale. Throws Error(kInvalidArgument) when
/// empty or out of range.
double likert_average(std::span<const double> scores);

/// Rounds to three decimals, the precision metrics are reported at.
double round3(double v);

/// Per-label one-vs-rest counts from aligned truth/prediction vectors.
std::vector<Counts> class_counts(std::span<const int> truth, std::span<const int> predicted,
                                 int num_classes);

/// Share of rows present in both tables, matched on (number, kind, heading,
/// text) as a multiset, over the larger table size. 1 when both are empty.
double row_accuracy(std::span<const RequirementRow> expected,
                    std::span<const RequirementRow> predicted);

// ---- synthetic corpus -------------------------------------------------------

struct CorpusConfig {
  int docs = 10;
  int pages_per_doc = 6;
  int sections_per_doc = 10;
  int texts_per_section = 4;  // mean; actual counts vary in [t/2, 3t/2]
  int hf_lines_per_page = 2;  // ceil(k/2) header lines, floor(k/2) footer lines
  double class_vocab_separation = 0.9;  // probability a content word is class-specific
  SourceMode mode = SourceMode::kMarkdown;

  // Structural variety that the pipeline is expected to handle exactly.
  double unnumbered_heading_rate = 0.1;  // markdown only
  double bold_heading_rate = 0.1;        // markdown only
  double table_row_rate = 0.04;          // markdown only
  double figure_rate = 0.03;
  int front_matter_lines = 0;            // lines before the first title (preamble)

  // Noise knobs reproducing known failure modes.
  double title_like_text_rate = 0.0;  // texts starting with a dotted number
  double no_requirement_rate = 0.0;   // "No Requirement" style texts
  bool title_page = false;            // page 1 carries no header/footer
  bool running_section_header = false;  // extra header naming the current chapter
};

Json to_json(const CorpusConfig& c);
CorpusConfig corpus_config_from_json(const Json& j);

struct GeneratedDocument {
  PagedDocument document;
  std::vector<HfLabel> unit_labels;     // aligned with to_units(document)
  ExtractionResult expected;            // after removing header/footer units
  std::vector<ClassLabel> row_labels;   // aligned with to_rows(expected)
};

/// Deterministic for a given seed. Throws Error(kInvalidArgument) on an
/// invalid config.
std::vector<GeneratedDocument> generate_corpus(std::uint64_t seed, const CorpusConfig& config);

/// Header/footer samples with features computed on generated documents
/// (title pages, running headers and repeated filler texts included), drawn
/// so that exactly `n_hf` and `n_text` samples are returned, shuffled.
std::vector<HfSample> hf_benchmark_samples(std::uint64_t seed, int n_hf, int n_text);

struct LabeledRow {
  std::string text;
  RowKind kind = RowKind::kText;
  ClassLabel label = ClassLabel::kInfo;
};

/// First `n_rows` rows of a generated corpus with their class labels.
std::vector<LabeledRow> labeled_rows(std::uint64_t seed, int n_rows,
                                     double class_vocab_separation = 0.9);

/// Models trained on synthetic data, used when no trained model is supplied.
/// Deterministic; each call retrains.
ForestModel default_hf_model();
BaselineModel default_baseline_model();

}  // namespace rexcl
