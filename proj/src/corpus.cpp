#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "rexcl/evalkit.hpp"

namespace rexcl {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  int between(int lo, int hi) { return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo + 1))); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  std::uint64_t next() { return engine_(); }

  template <typename T, std::size_t N>
  const T& pick(const T (&pool)[N]) {
    return pool[index(N)];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

constexpr const char* kShared[] = {
    "system",  "data",     "signal",   "value",   "module",  "controller", "vehicle",
    "unit",    "function", "interface", "component", "input", "output",   "mode",
    "status",  "message",  "parameter", "level",  "device",  "driver",    "network",
    "service", "user",     "operation", "condition", "state", "event",    "channel",
    "sensor",  "power",    "door",     "window",  "seat",    "light",     "engine",
    "battery", "gateway",  "actuator", "bus",     "frame"};

constexpr const char* kFuncWords[] = {
    "transmit", "store",    "activate", "deactivate", "calculate", "send",     "receive",
    "record",   "detect",   "trigger",  "notify",     "open",      "close",    "lock",
    "unlock",   "initialize", "reset",  "forward",    "compute",   "report",   "acknowledge",
    "switch",   "enable",   "disable",  "read",       "write",     "log",      "start",
    "stop",     "process",  "convert",  "validate",   "select",    "adjust",   "execute",
    "broadcast", "evaluate", "monitor", "request",    "dispatch"};

constexpr const char* kNonFuncWords[] = {
    "latency",    "performance", "availability", "reliability", "secure",     "encrypted",
    "robust",     "scalable",    "maintainable", "usability",   "throughput", "milliseconds",
    "percent",    "uptime",      "redundant",    "tolerant",    "compliant",  "certified",
    "efficient",  "memory",      "footprint",    "accuracy",    "tolerance",  "degradation",
    "resilient",  "portable",    "standards",    "temperature", "humidity",   "vibration",
    "durability", "lifetime",    "cybersecurity", "privacy",    "audit",      "integrity",
    "confidentiality", "robustness", "jitter",   "bandwidth"};

constexpr const char* kInfoWords[] = {
    "describes", "overview",   "purpose",     "document",   "background", "context",
    "chapter",   "refer",      "reference",   "explanation", "example",   "definition",
    "glossary",  "abbreviation", "note",      "informative", "illustrates", "summary",
    "intended",  "audience",   "convention",  "history",    "author",     "related",
    "annex",     "terminology", "outline",    "structure",  "contents",   "explains",
    "following", "presents",   "background",  "rationale",  "considered", "listed",
    "overviewed", "motivation", "describing", "informs"};

constexpr const char* kTopHeadings[] = {
    "Introduction",       "Scope",          "System Overview",  "Functional Requirements",
    "Non-Functional Requirements", "Interface Description", "Performance", "Safety",
    "Security",           "Diagnostics",    "Power Management", "Communication",
    "Error Handling",     "Appendix",       "Glossary",         "Constraints"};

constexpr const char* kSubHeadings[] = {
    "Use Case",     "Main Task",      "Startup",          "Shutdown",       "Data Logging",
    "Timing",       "Configuration",  "Calibration",      "Variant Handling", "Software Update",
    "Network Management", "Signal Description", "Test Strategy", "Assumptions", "Wake Up",
    "Sleep Mode",   "Fault Memory",   "Access Control",   "Boot Sequence",  "Load Shedding"};

constexpr const char* kCompanies[] = {"ACME Automotive", "Borealis Systems", "Kestrel Mobility",
                                      "Northwind Electronics", "Orion Components", "Vega Motors"};
constexpr const char* kProducts[] = {"Door Control Unit", "Body Controller", "Seat Module",
                                     "Light Control Unit", "Battery Manager", "Gateway ECU",
                                     "Window Lifter", "Climate Controller"};
constexpr const char* kUnits[] = {"ms", "V", "A", "km/h", "rpm", "degC", "%"};
constexpr const char* kFiller[] = {"No Requirement", "Not Applicable", "N.A."};

struct Line {
  std::string text;
  bool blank = false;
  bool furniture = false;
};

struct Section {
  SectionPath path;
  std::string heading;
  bool numbered = true;
  std::vector<std::pair<std::string, ClassLabel>> texts;
};

const char* class_word(Rng& rng, ClassLabel c, double separation) {
  if (!rng.chance(separation)) return rng.pick(kShared);
  switch (c) {
    case ClassLabel::kFuncReq: return rng.pick(kFuncWords);
    case ClassLabel::kNonFuncReq: return rng.pick(kNonFuncWords);
    default: return rng.pick(kInfoWords);
  }
}

std::string sentence(Rng& rng, ClassLabel c, double sep) {
  std::string s;
  auto w = [&] { return std::string(class_word(rng, c, sep)); };
  auto noun = [&] { return std::string(rng.pick(kShared)); };
  switch (c) {
    case ClassLabel::kFuncReq:
      s = "The " + noun() + " shall " + w() + " the " + noun() + " " + w() + " " + w() +
          " within the " + noun() + ".";
      break;
    case ClassLabel::kNonFuncReq:
      s = "The " + noun() + " shall " + w() + " " + w() + " " + w() + " under " + noun() + " " +
          w() + ".";
      break;
    default:
      s = "This " + w() + " " + w() + " the " + noun() + " and " + w() + " " + w() + ".";
      break;
  }
  return s;
}

ClassLabel text_class(Rng& rng) {
  const double u = rng.unit();
  if (u < 0.35) return ClassLabel::kInfo;
  if (u < 0.75) return ClassLabel::kFuncReq;
  return ClassLabel::kNonFuncReq;
}

std::pair<std::string, ClassLabel> section_text(Rng& rng, const CorpusConfig& cfg, int& figure_no) {
  const bool markdown = cfg.mode == SourceMode::kMarkdown;
  if (rng.chance(cfg.no_requirement_rate)) return {rng.pick(kFiller), ClassLabel::kInfo};
  if (markdown && rng.chance(cfg.table_row_rate)) {
    return {"| " + std::string(rng.pick(kShared)) + "_" + rng.pick(kShared) + " | " +
                std::to_string(rng.between(0, 50)) + " | " + std::to_string(rng.between(51, 900)) +
                " | " + rng.pick(kUnits) + " |",
            ClassLabel::kInfo};
  }
  if (rng.chance(cfg.figure_rate)) {
    ++figure_no;
    const std::string caption = "Figure " + std::to_string(figure_no) + ": " +
                                rng.pick(kShared) + " " + rng.pick(kShared) + " overview";
    if (markdown) {
      return {"![" + caption + "](" + rng.pick(kShared) + "_" + std::to_string(figure_no) + ".png)",
              ClassLabel::kInfo};
    }
    return {caption, ClassLabel::kInfo};
  }
  const ClassLabel c = text_class(rng);
  if (c != ClassLabel::kInfo && rng.chance(cfg.title_like_text_rate)) {
    const std::string lead = std::to_string(rng.between(1, 9)) + "." + std::to_string(rng.between(0, 9));
    return {lead + " " + rng.pick(kUnits) + " after " + rng.pick(kShared) + " activation the " +
                rng.pick(kShared) + " shall " + class_word(rng, c, cfg.class_vocab_separation) + " the " +
                rng.pick(kShared) + ".",
            c};
  }
  return {sentence(rng, c, cfg.class_vocab_separation), c};
}

std::vector<Section> section_tree(Rng& rng, const CorpusConfig& cfg, int& figure_no) {
  std::vector<Section> sections;
  SectionPath path;
  for (int i = 0; i < cfg.sections_per_doc; ++i) {
    if (path.empty()) {
      path = {1};
    } else if (path.size() < 3 && rng.chance(0.35)) {
      path.push_back(1);
    } else if (path.size() > 1 && rng.chance(0.3)) {
      path.pop_back();
      ++path.back();
    } else {
      ++path.back();
    }
    Section s;
    s.path = path;
    s.heading = path.size() == 1 ? rng.pick(kTopHeadings) : rng.pick(kSubHeadings);
    if (cfg.mode == SourceMode::kMarkdown) {
      if (rng.chance(cfg.bold_heading_rate)) s.heading = "**" + s.heading + "**";
      s.numbered = !rng.chance(cfg.unnumbered_heading_rate);
    }
    const int t = cfg.texts_per_section;
    const int count = t == 0 ? 0 : rng.between(t / 2, t + t / 2);
    for (int k = 0; k < count; ++k) s.texts.push_back(section_text(rng, cfg, figure_no));
    sections.push_back(std::move(s));
  }
  return sections;
}

std::string title_line(const Section& s, SourceMode mode) {
  const std::string number = render_number(s.path);
  if (mode == SourceMode::kPlaintext) return number + " " + s.heading;
  std::string line(s.path.size(), '#');
  line += " ";
  if (s.numbered) line += number + " ";
  return line + s.heading;
}

void validate(const CorpusConfig& c) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "corpus config: " + what);
  };
  if (c.docs < 1) fail("docs must be >= 1");
  if (c.pages_per_doc < 1) fail("pages_per_doc must be >= 1");
  if (c.sections_per_doc < 0) fail("sections_per_doc must be >= 0");
  if (c.texts_per_section < 0) fail("texts_per_section must be >= 0");
  if (c.hf_lines_per_page < 0) fail("hf_lines_per_page must be >= 0");
  if (c.front_matter_lines < 0) fail("front_matter_lines must be >= 0");
  for (double p : {c.class_vocab_separation, c.unnumbered_heading_rate, c.bold_heading_rate,
                   c.table_row_rate, c.figure_rate, c.title_like_text_rate, c.no_requirement_rate}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("rates must lie in [0,1]");
  }
}

GeneratedDocument generate_document(Rng& rng, const CorpusConfig& cfg, int doc_index) {
  char id[16];
  std::snprintf(id, sizeof(id), "D%04d", doc_index + 1);
  const std::string doc_id = id;
  const bool markdown = cfg.mode == SourceMode::kMarkdown;

  const std::string company = rng.pick(kCompanies);
  const std::string product = rng.pick(kProducts);
  const std::string code = "RS-" + std::to_string(rng.between(100, 999));
  const std::string version = std::to_string(rng.between(1, 9)) + "." + std::to_string(rng.between(0, 9));

  int figure_no = 0;
  const auto sections = section_tree(rng, cfg, figure_no);

  GeneratedDocument out;
  out.expected.doc_id = doc_id;

  // Content stream: front matter, then titles and texts in document order.
  std::vector<Line> content;
  if (cfg.front_matter_lines > 0) {
    SectionTuple preamble{{"", {0}, "(preamble)", true}, {}};
    const std::string front[] = {product + " Requirements Specification",
                                 "Prepared by the " + product + " engineering team",
                                 "Customer release " + version};
    for (int i = 0; i < cfg.front_matter_lines; ++i) {
      std::string text = front[i % 3];
      if (i >= 3) text += " (" + std::to_string(i) + ")";
      content.push_back({text});
      preamble.texts.push_back(text);
    }
    out.expected.tuples.push_back(std::move(preamble));
    out.row_labels.push_back(ClassLabel::kHeader);
    out.row_labels.insert(out.row_labels.end(), cfg.front_matter_lines, ClassLabel::kInfo);
  }
  // Content index -> heading of the enclosing top-level section (running headers).
  std::vector<std::string> chapter_of(content.size());
  std::string chapter;
  for (const auto& s : sections) {
    if (s.path.size() == 1) chapter = s.heading;
    content.push_back({title_line(s, cfg.mode)});
    chapter_of.push_back(chapter);
    if (markdown && rng.chance(0.5)) {
      content.push_back({"", true});
      chapter_of.push_back(chapter);
    }
    SectionTuple tuple{{s.numbered ? render_number(s.path) : "", s.path, s.heading, !s.numbered}, {}};
    out.row_labels.push_back(ClassLabel::kHeader);
    for (const auto& [text, label] : s.texts) {
      content.push_back({text});
      chapter_of.push_back(chapter);
      tuple.texts.push_back(text);
      out.row_labels.push_back(label);
    }
    out.expected.tuples.push_back(std::move(tuple));
  }

  // Near-equal contiguous chunks, one per page, plus page furniture.
  const int pages = cfg.pages_per_doc;
  const int headers = (cfg.hf_lines_per_page + 1) / 2;
  const int footers = cfg.hf_lines_per_page / 2;
  out.document.doc_id = doc_id;
  out.document.source_mode = cfg.mode;
  std::size_t cursor = 0;
  std::vector<std::vector<Line>> page_lines(static_cast<std::size_t>(pages));
  for (int p = 0; p < pages; ++p) {
    const std::size_t take =
        content.size() / pages + (static_cast<std::size_t>(p) < content.size() % pages ? 1 : 0);
    auto& lines = page_lines[static_cast<std::size_t>(p)];
    const bool furnished = !(cfg.title_page && p == 0 && pages > 1);
    if (furnished) {
      for (int h = 0; h < headers; ++h) {
        std::string text;
        switch (h) {
          case 0: text = company + " - " + product + " Requirements Specification"; break;
          case 1: text = "Document " + code + ", Version " + version; break;
          default: text = "Classification: Confidential, copy " + std::to_string(h); break;
        }
        lines.push_back({text, false, true});
      }
      if (cfg.running_section_header && cursor < content.size() && !chapter_of[cursor].empty()) {
        lines.push_back({"Chapter: " + chapter_of[cursor], false, true});
      }
    }
    for (std::size_t k = 0; k < take; ++k) lines.push_back(content[cursor++]);
    if (furnished) {
      for (int f = 0; f < footers; ++f) {
        std::string text;
        switch (f) {
          case 0: text = "Page " + std::to_string(p + 1) + " of " + std::to_string(pages); break;
          case 1: text = company + " Confidential - do not distribute"; break;
          default: text = "Printed copy " + std::to_string(f) + " is uncontrolled"; break;
        }
        lines.push_back({text, false, true});
      }
    }
  }

  for (int p = 0; p < pages; ++p) {
    const auto& lines = page_lines[static_cast<std::size_t>(p)];
    std::vector<std::string> raw;
    int retained = 0;
    for (const auto& l : lines) retained += l.blank ? 0 : 1;
    int index = 0;
    for (const auto& l : lines) {
      raw.push_back(l.text);
      if (l.blank) continue;
      out.unit_labels.push_back(l.furniture ? HfLabel::kHeaderFooter : HfLabel::kReqText);
      if (l.furniture) {
        TextUnit u;
        u.text = l.text;
        u.page = p + 1;
        u.line_index = index;
        u.page_line_count = retained;
        out.expected.removed_units.push_back(std::move(u));
      }
      ++index;
    }
    out.document.pages.push_back(std::move(raw));
  }
  return out;
}

}  // namespace

Json to_json(const CorpusConfig& c) {
  return Json{{"docs", c.docs},
              {"pages_per_doc", c.pages_per_doc},
              {"sections_per_doc", c.sections_per_doc},
              {"texts_per_section", c.texts_per_section},
              {"hf_lines_per_page", c.hf_lines_per_page},
              {"class_vocab_separation", c.class_vocab_separation},
              {"mode", std::string(to_string(c.mode))},
              {"unnumbered_heading_rate", c.unnumbered_heading_rate},
              {"bold_heading_rate", c.bold_heading_rate},
              {"table_row_rate", c.table_row_rate},
              {"figure_rate", c.figure_rate},
              {"front_matter_lines", c.front_matter_lines},
              {"title_like_text_rate", c.title_like_text_rate},
              {"no_requirement_rate", c.no_requirement_rate},
              {"title_page", c.title_page},
              {"running_section_header", c.running_section_header}};
}

CorpusConfig corpus_config_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "corpus config must be a JSON object");
  CorpusConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("docs", c.docs);
    get("pages_per_doc", c.pages_per_doc);
    get("sections_per_doc", c.sections_per_doc);
    get("texts_per_section", c.texts_per_section);
    get("hf_lines_per_page", c.hf_lines_per_page);
    get("class_vocab_separation", c.class_vocab_separation);
    get("unnumbered_heading_rate", c.unnumbered_heading_rate);
    get("bold_heading_rate", c.bold_heading_rate);
    get("table_row_rate", c.table_row_rate);
    get("figure_rate", c.figure_rate);
    get("front_matter_lines", c.front_matter_lines);
    get("title_like_text_rate", c.title_like_text_rate);
    get("no_requirement_rate", c.no_requirement_rate);
    get("title_page", c.title_page);
    get("running_section_header", c.running_section_header);
    if (j.contains("mode")) {
      const auto mode = parse_source_mode(j.at("mode").get<std::string>());
      if (!mode) throw Error(ErrorCode::kParse, "corpus config: unknown mode");
      c.mode = *mode;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("corpus config: ") + e.what());
  }
  return c;
}

std::vector<GeneratedDocument> generate_corpus(std::uint64_t seed, const CorpusConfig& config) {
  validate(config);
  Rng rng(seed);
  std::vector<GeneratedDocument> docs;
  for (int d = 0; d < config.docs; ++d) docs.push_back(generate_document(rng, config, d));
  return docs;
}

std::vector<HfSample> hf_benchmark_samples(std::uint64_t seed, int n_hf, int n_text) {
  if (n_hf < 0 || n_text < 0) throw Error(ErrorCode::kInvalidArgument, "negative sample count");
  Rng rng(seed);
  std::vector<HfSample> hf, text;
  int doc_index = 0;
  while (static_cast<int>(hf.size()) < n_hf || static_cast<int>(text.size()) < n_text) {
    CorpusConfig cfg;
    cfg.pages_per_doc = rng.between(3, 12);
    cfg.sections_per_doc = rng.between(4, 14);
    cfg.texts_per_section = rng.between(2, 6);
    cfg.hf_lines_per_page = rng.between(1, 3);
    cfg.front_matter_lines = rng.between(0, 3);
    cfg.title_page = rng.chance(0.5);
    cfg.running_section_header = rng.chance(0.4);
    cfg.no_requirement_rate = 0.05;
    cfg.mode = rng.chance(0.5) ? SourceMode::kMarkdown : SourceMode::kPlaintext;
    Rng doc_rng(rng.next());
    const auto doc = generate_document(doc_rng, cfg, doc_index++);
    const auto units = to_units(doc.document);
    if (units.empty()) continue;
    const auto features = compute_features(units);
    for (std::size_t i = 0; i < units.size(); ++i) {
      const HfLabel label = doc.unit_labels[i];
      (label == HfLabel::kHeaderFooter ? hf : text).push_back({features[i], label});
    }
  }
  rng.shuffle(hf);
  rng.shuffle(text);
  std::vector<HfSample> out(hf.begin(), hf.begin() + n_hf);
  out.insert(out.end(), text.begin(), text.begin() + n_text);
  rng.shuffle(out);
  return out;
}

std::vector<LabeledRow> labeled_rows(std::uint64_t seed, int n_rows, double class_vocab_separation) {
  if (n_rows < 0) throw Error(ErrorCode::kInvalidArgument, "negative row count");
  CorpusConfig cfg;
  cfg.docs = 1;
  cfg.texts_per_section = 3;
  cfg.sections_per_doc = 12;
  cfg.class_vocab_separation = class_vocab_separation;
  Rng rng(seed);
  std::vector<LabeledRow> out;
  int doc_index = 0;
  while (static_cast<int>(out.size()) < n_rows) {
    Rng doc_rng(rng.next());
    const auto doc = generate_document(doc_rng, cfg, doc_index++);
    std::size_t k = 0;
    for (const auto& tuple : doc.expected.tuples) {
      out.push_back({tuple.title.heading, RowKind::kTitle, doc.row_labels[k++]});
      for (const auto& t : tuple.texts) out.push_back({t, RowKind::kText, doc.row_labels[k++]});
    }
  }
  out.resize(static_cast<std::size_t>(n_rows));
  return out;
}

}  // namespace rexcl
