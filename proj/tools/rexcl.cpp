// rexcl command line: pipeline stages, model training, evaluation, corpus
// generation and the HTTP service.

#include <cstdio>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rexcl/classify.hpp"
#include "rexcl/csv.hpp"
#include "rexcl/evalkit.hpp"
#include "rexcl/export.hpp"
#include "rexcl/hf_filter.hpp"
#include "rexcl/ingest.hpp"
#include "rexcl/section_extract.hpp"
#include "rexcl/service.hpp"

namespace fs = std::filesystem;
using namespace rexcl;

namespace {

SourceMode mode_for(const std::string& path, const std::string& flag) {
  if (!flag.empty()) {
    const auto m = parse_source_mode(flag);
    if (!m) throw Error(ErrorCode::kInvalidArgument, "--mode must be md or txt");
    return *m;
  }
  return to_lower_ascii(fs::path(path).extension().string()) == ".txt" ? SourceMode::kPlaintext
                                                                       : SourceMode::kMarkdown;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

std::set<std::string> load_allowlist(const std::string& path) {
  return path.empty() ? default_allowlist() : parse_allowlist(read_file(path));
}

// Rows of an extraction.json or final.json document; tuples are numbered when
// rows are absent.
std::vector<RequirementRow> rows_of(const Json& j) {
  if (j.contains("rows")) return j.at("rows").get<std::vector<RequirementRow>>();
  return to_rows(j.get<ExtractionResult>());
}

std::vector<Json> as_documents(const Json& j) {
  if (j.is_array()) return {j.begin(), j.end()};
  if (j.is_object() && j.contains("documents")) {
    const auto& d = j.at("documents");
    return {d.begin(), d.end()};
  }
  return {j};
}

// ---- train-hf -------------------------------------------------------------------

// labels.csv lists every retained line of every document, so both features can
// be recomputed from it without the source files.
std::vector<HfSample> samples_from_labels(const std::string& text) {
  const auto records = csv::parse(text);
  if (records.empty()) throw Error(ErrorCode::kParse, "labels file is empty");
  const std::vector<std::string> header = {"doc", "page", "line_index", "text", "label"};
  if (records[0].fields != header) {
    throw Error(ErrorCode::kParse, "labels header must be doc,page,line_index,text,label");
  }
  struct Item {
    TextUnit unit;
    HfLabel label;
  };
  std::map<std::string, std::vector<Item>> by_doc;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = "labels line " + std::to_string(rec.line);
    if (rec.fields.size() != 5) throw Error(ErrorCode::kParse, where + ": expected 5 fields");
    Item item;
    try {
      item.unit.page = std::stoi(rec.fields[1]);
      item.unit.line_index = std::stoi(rec.fields[2]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, where + ": page and line_index must be integers");
    }
    item.unit.text = rec.fields[3];
    const auto label = parse_hf_label(rec.fields[4]);
    if (!label) throw Error(ErrorCode::kParse, where + ": label must be HF or TEXT");
    item.label = *label;
    by_doc[rec.fields[0]].push_back(std::move(item));
  }
  std::vector<HfSample> out;
  for (auto& [doc, items] : by_doc) {
    std::map<int, int> lines_per_page;
    for (const auto& it : items) {
      lines_per_page[it.unit.page] = std::max(lines_per_page[it.unit.page], it.unit.line_index + 1);
    }
    std::vector<TextUnit> units;
    for (auto& it : items) {
      it.unit.page_line_count = lines_per_page[it.unit.page];
      units.push_back(it.unit);
    }
    const auto features = compute_features(units);
    for (std::size_t i = 0; i < items.size(); ++i) out.push_back({features[i], items[i].label});
  }
  return out;
}

// ---- eval -------------------------------------------------------------------------

struct EvalTotals {
  std::vector<Counts> classes = std::vector<Counts>(kNumClassLabels);
  Counts hf;
  long expected_rows = 0;
  long matched_rows = 0;
  long larger_rows = 0;
  int documents = 0;
  bool have_hf = false;
  bool have_labels = false;
};

using RowKey = std::tuple<std::string, RowKind, std::string, std::string>;
RowKey key_of(const RequirementRow& r) {
  return {r.object_number, r.kind, r.object_heading, r.object_text};
}

void eval_document(const Json& truth, const Json& pred, EvalTotals& t) {
  const auto expected = truth.at("rows").get<std::vector<RequirementRow>>();
  const auto predicted = rows_of(pred);
  for (const auto& r : predicted) t.have_labels = t.have_labels || r.object_type.has_value();
  ++t.documents;
  t.expected_rows += static_cast<long>(expected.size());
  t.larger_rows += static_cast<long>(std::max(expected.size(), predicted.size()));

  std::map<RowKey, std::vector<const RequirementRow*>> pool;
  for (const auto& r : predicted) pool[key_of(r)].push_back(&r);
  for (const auto& e : expected) {
    const int truth_label = static_cast<int>(*e.object_type);
    auto it = pool.find(key_of(e));
    if (it == pool.end() || it->second.empty()) {
      ++t.classes[truth_label].fn;
      continue;
    }
    const RequirementRow* p = it->second.front();
    it->second.erase(it->second.begin());
    ++t.matched_rows;
    if (!p->object_type) {
      ++t.classes[truth_label].fn;
    } else if (*p->object_type == *e.object_type) {
      ++t.classes[truth_label].tp;
    } else {
      ++t.classes[truth_label].fn;
      ++t.classes[static_cast<int>(*p->object_type)].fp;
    }
  }

  if (pred.contains("removed_units") && truth.contains("hf_units")) {
    t.have_hf = true;
    std::set<std::pair<int, int>> truth_hf, pred_hf;
    for (const auto& u : truth.at("hf_units")) truth_hf.insert({u.at("page").get<int>(), u.at("line_index").get<int>()});
    for (const auto& u : pred.at("removed_units")) pred_hf.insert({u.at("page").get<int>(), u.at("line_index").get<int>()});
    for (const auto& k : pred_hf) (truth_hf.count(k) ? t.hf.tp : t.hf.fp)++;
    for (const auto& k : truth_hf) t.hf.fn += pred_hf.count(k) ? 0 : 1;
  }
}

Json prf_json(const Prf1& m) {
  return Json{{"precision", round3(m.precision)}, {"recall", round3(m.recall)}, {"f1", round3(m.f1)}};
}

int run_eval(const std::string& truth_path, const std::string& pred_path, const std::string& json_out) {
  const auto truth_docs = as_documents(parse_json(read_file(truth_path), truth_path));
  std::map<std::string, Json> truth_by_id;
  for (const auto& d : truth_docs) truth_by_id[d.at("doc_id").get<std::string>()] = d;

  EvalTotals t;
  for (const auto& p : as_documents(parse_json(read_file(pred_path), pred_path))) {
    const std::string id = p.value("doc_id", "");
    auto it = truth_by_id.find(id);
    if (it == truth_by_id.end()) throw Error(ErrorCode::kNotFound, "no truth for document '" + id + "'");
    eval_document(it->second, p, t);
  }

  Json report;
  report["documents"] = t.documents;
  report["row_accuracy"] =
      round3(t.larger_rows == 0 ? 1.0 : static_cast<double>(t.matched_rows) / static_cast<double>(t.larger_rows));
  std::printf("%-14s %9s %9s %9s\n", "label", "precision", "recall", "f1");
  if (t.have_labels) {
    Json per_class = Json::object();
    for (ClassLabel c : kAllClassLabels) {
      const auto m = prf1(t.classes[static_cast<int>(c)]);
      per_class[std::string(to_string(c))] = prf_json(m);
      std::printf("%-14s %9.3f %9.3f %9.3f\n", std::string(to_string(c)).c_str(), m.precision, m.recall, m.f1);
    }
    report["classes"] = per_class;
    report["macro_f1"] = round3(macro_f1(t.classes));
    std::printf("%-14s %29.3f\n", "macro-F1", macro_f1(t.classes));
  }
  std::printf("%-14s %29.3f\n", "row accuracy", report["row_accuracy"].get<double>());
  if (t.have_hf) {
    const auto m = prf1(t.hf);
    report["header_footer"] = prf_json(m);
    std::printf("%-14s %9.3f %9.3f %9.3f\n", "header/footer", m.precision, m.recall, m.f1);
  }
  std::printf("%d document(s)\n", t.documents);
  if (!json_out.empty()) write_output(json_out, report.dump(2) + "\n");
  return 0;
}

// ---- gen --------------------------------------------------------------------------

void run_gen(std::uint64_t seed, const std::string& config_path, const std::string& out_dir) {
  const CorpusConfig cfg =
      config_path.empty() ? CorpusConfig{} : corpus_config_from_json(parse_json(read_file(config_path), config_path));
  const auto docs = generate_corpus(seed, cfg);
  fs::create_directories(out_dir);

  Json truth = Json::array();
  std::string labels = csv::format_record({"doc", "page", "line_index", "text", "label"});
  for (const auto& d : docs) {
    const std::string ext = d.document.source_mode == SourceMode::kMarkdown ? ".md" : ".txt";
    write_file_atomic((fs::path(out_dir) / (d.document.doc_id + ext)).string(), serialize_paged(d.document));

    auto rows = to_rows(d.expected);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].object_type = d.row_labels[i];
    const auto units = to_units(d.document);
    Json hf_units = Json::array();
    for (std::size_t i = 0; i < units.size(); ++i) {
      const auto& u = units[i];
      labels += csv::format_record({d.document.doc_id, std::to_string(u.page), std::to_string(u.line_index),
                                    u.text, std::string(to_string(d.unit_labels[i]))});
      if (d.unit_labels[i] == HfLabel::kHeaderFooter) {
        hf_units.push_back(Json{{"page", u.page}, {"line_index", u.line_index}});
      }
    }
    truth.push_back(Json{{"doc_id", d.document.doc_id},
                         {"file", d.document.doc_id + ext},
                         {"expected", d.expected},
                         {"rows", rows},
                         {"hf_units", hf_units}});
  }
  write_file_atomic((fs::path(out_dir) / "truth.json").string(), Json{{"documents", truth}}.dump(2) + "\n");
  write_file_atomic((fs::path(out_dir) / "labels.csv").string(), labels);
  std::cerr << "wrote " << docs.size() << " document(s) to " << out_dir << "\n";
}

// ---- train-classifier ------------------------------------------------------------

BaselineModel train_classifier(const std::string& truth_path, double title_prior) {
  std::vector<LabeledText> data;
  for (const auto& d : as_documents(parse_json(read_file(truth_path), truth_path))) {
    for (const auto& r : d.at("rows").get<std::vector<RequirementRow>>()) {
      if (!r.object_type) continue;
      const std::string& text = r.kind == RowKind::kTitle ? r.object_heading : r.object_text;
      data.push_back({preprocess(text), r.kind, *r.object_type});
    }
  }
  return BaselineModel::train(data, title_prior);
}

Service* g_service = nullptr;
extern "C" void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rexcl: requirement extraction and classification"};
  app.require_subcommand(1);

  std::string input, mode, output, hf_model, allowlist, model, endpoint, format, truth, pred, config, data_dir,
      labels, ui_dir, json_out;
  int port = 8080, num_trees = 50, max_depth = 6, timeout_ms = 30000;
  std::uint64_t seed = 1;
  double title_prior = kDefaultTitlePrior;
  bool no_filter = false;
  std::string host = "127.0.0.1";

  auto* ingest = app.add_subcommand("ingest", "Split a document into pages and text units");
  ingest->add_option("input", input, "Input .md or .txt file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--mode", mode, "md or txt (default: from extension)");
  ingest->add_option("--dump-units", output, "Write units as JSON (default: stdout)");

  auto* train_hf = app.add_subcommand("train-hf", "Train the header/footer forest");
  train_hf->add_option("--labels", labels, "CSV with doc,page,line_index,text,label")->required();
  train_hf->add_option("--out", output, "Model output path")->required();
  train_hf->add_option("--trees", num_trees, "Number of trees")->check(CLI::PositiveNumber);
  train_hf->add_option("--max-depth", max_depth, "Maximum tree depth")->check(CLI::PositiveNumber);
  train_hf->add_option("--seed", seed, "Bootstrap seed");

  auto* extract = app.add_subcommand("extract", "Remove headers/footers and extract numbered rows");
  extract->add_option("input", input, "Input .md or .txt file")->required()->check(CLI::ExistingFile);
  extract->add_option("--mode", mode, "md or txt (default: from extension)");
  extract->add_option("--hf-model", hf_model, "Header/footer model (default: built-in)");
  extract->add_flag("--no-filter", no_filter, "Keep every unit");
  extract->add_option("--allowlist", allowlist, "Phrases never removed, one per line");
  extract->add_option("-o,--output", output, "Output path (default: stdout)");

  auto* classify = app.add_subcommand("classify", "Label rows with a requirement type");
  classify->add_option("input", input, "extraction.json or final.json")->required()->check(CLI::ExistingFile);
  auto* model_opt = classify->add_option("--model", model, "Baseline model (default: built-in)");
  classify->add_option("--endpoint", endpoint, "External classifier base URL")->excludes(model_opt);
  classify->add_option("--timeout-ms", timeout_ms, "External classifier timeout");
  classify->add_option("-o,--output", output, "Output path (default: stdout)");

  auto* train_cls = app.add_subcommand("train-classifier", "Train the baseline classifier from labelled rows");
  train_cls->add_option("--truth", truth, "truth.json with labelled rows")->required()->check(CLI::ExistingFile);
  train_cls->add_option("--title-prior", title_prior, "HEADER multiplier for TITLE rows");
  train_cls->add_option("--out", output, "Model output path")->required();

  auto* exp = app.add_subcommand("export", "Write rows as CSV, JSON or YAML");
  exp->add_option("input", input, "final.json or extraction.json")->required()->check(CLI::ExistingFile);
  exp->add_option("--format", format, "csv, json or yaml")->required();
  exp->add_option("-o,--output", output, "Output path (default: stdout)");

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--truth", truth, "truth.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--pred", pred, "Prediction file (one document or an array)")->required()->check(CLI::ExistingFile);
  eval->add_option("--json", json_out, "Also write the metrics as JSON");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus with ground truth");
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--config", config, "Generator config JSON")->check(CLI::ExistingFile);
  gen->add_option("-o,--output", output, "Output directory")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", port, "Listening port (0 = any)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--data-dir", data_dir, "Persistence directory")->required();
  serve->add_option("--ui-dir", ui_dir, "Static files served under /ui");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const auto paged = read_paged(read_file(input), mode_for(input, mode), fs::path(input).stem().string());
      write_output(output, Json(to_units(paged)).dump(2) + "\n");
    } else if (*train_hf) {
      const auto samples = samples_from_labels(read_file(labels));
      const auto forest = train_forest(samples, ForestParams{num_trees, max_depth, seed});
      write_output(output, forest.to_json().dump() + "\n");
      std::cerr << "trained on " << samples.size() << " units\n";
    } else if (*extract) {
      const SourceMode m = mode_for(input, mode);
      const std::string doc_id = fs::path(input).stem().string();
      const auto units = to_units(read_paged(read_file(input), m, doc_id));
      FilterResult filtered;
      if (no_filter) {
        filtered.kept = units;
      } else {
        const ForestModel forest = hf_model.empty()
                                       ? default_hf_model()
                                       : ForestModel::from_json(parse_json(read_file(hf_model), hf_model));
        filtered = filter_units(units, forest, load_allowlist(allowlist));
      }
      ExtractionResult extraction = assemble(filtered.kept, m, doc_id);
      extraction.removed_units = std::move(filtered.removed);
      Json out = extraction;
      out["rows"] = to_rows(extraction);
      write_output(output, out.dump(2) + "\n");
    } else if (*classify) {
      const Json in = parse_json(read_file(input), input);
      const auto rows = rows_of(in);
      ClassifierBinding binding = endpoint.empty()
                                      ? ClassifierBinding(model.empty() ? default_baseline_model()
                                                                        : BaselineModel::from_json(parse_json(
                                                                              read_file(model), model)))
                                      : ClassifierBinding(ExternalEndpoint{endpoint, timeout_ms});
      try {
        write_output(output, Json(classify_rows(binding, rows, in.value("doc_id", ""))).dump(2) + "\n");
      } catch (const ClassificationError& e) {
        if (!output.empty()) write_file_atomic(output + ".partial", Json(e.partial()).dump(2) + "\n");
        throw;
      }
    } else if (*train_cls) {
      write_output(output, train_classifier(truth, title_prior).to_json().dump() + "\n");
    } else if (*exp) {
      const auto f = parse_export_format(format);
      if (!f) throw Error(ErrorCode::kInvalidArgument, "--format must be csv, json or yaml");
      write_output(output, write_rows(rows_of(parse_json(read_file(input), input)), *f));
    } else if (*eval) {
      return run_eval(truth, pred, json_out);
    } else if (*gen) {
      run_gen(seed, config, output);
    } else if (*serve) {
      Service service(ServiceConfig{data_dir, host, port, ui_dir, timeout_ms});
      const int bound = service.bind();
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << host << ":" << bound << "\n";
      service.run();
      g_service = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "rexcl: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "rexcl: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
