#include "rexcl/classify.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <unordered_set>

namespace rexcl {

namespace {

constexpr int kBaselineVersion = 1;

std::size_t idx(ClassLabel c) { return static_cast<std::size_t>(c); }

}  // namespace

BaselineModel BaselineModel::train(std::span<const LabeledText> rows, double title_prior) {
  if (!(title_prior > 0.0)) throw Error(ErrorCode::kInvalidArgument, "title prior must be positive");

  std::array<std::size_t, kNumClassLabels> docs{};
  for (const auto& r : rows) ++docs[idx(r.label)];
  for (auto c : kAllClassLabels) {
    if (docs[idx(c)] == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "training rows lack class " + std::string(to_string(c)));
    }
  }

  BaselineModel model;
  model.title_prior_ = title_prior;
  std::set<std::string> vocab;
  for (const auto& r : rows) vocab.insert(r.tokens.begin(), r.tokens.end());
  model.vocabulary_.assign(vocab.begin(), vocab.end());
  for (std::size_t i = 0; i < model.vocabulary_.size(); ++i) model.index_[model.vocabulary_[i]] = i;

  const std::size_t v = model.vocabulary_.size();
  std::array<std::vector<double>, kNumClassLabels> counts;
  std::array<double, kNumClassLabels> totals{};
  for (auto& c : counts) c.assign(v, 0.0);
  for (const auto& r : rows) {
    for (const auto& t : r.tokens) {
      counts[idx(r.label)][model.index_.at(t)] += 1.0;
      totals[idx(r.label)] += 1.0;
    }
  }
  for (std::size_t c = 0; c < kNumClassLabels; ++c) {
    model.priors_[c] = static_cast<double>(docs[c]) / static_cast<double>(rows.size());
    model.log_likelihood_[c].resize(v);
    const double denom = totals[c] + static_cast<double>(v);
    for (std::size_t t = 0; t < v; ++t) {
      model.log_likelihood_[c][t] = std::log((counts[c][t] + 1.0) / denom);
    }
  }
  return model;
}

BaselineModel::Posterior BaselineModel::posterior(std::span<const std::string> tokens,
                                                  RowKind kind) const {
  std::array<double, kNumClassLabels> score{};
  for (std::size_t c = 0; c < kNumClassLabels; ++c) score[c] = std::log(priors_[c]);
  if (kind == RowKind::kTitle) score[idx(ClassLabel::kHeader)] += std::log(title_prior_);
  for (const auto& t : tokens) {
    auto it = index_.find(t);
    if (it == index_.end()) continue;
    for (std::size_t c = 0; c < kNumClassLabels; ++c) score[c] += log_likelihood_[c][it->second];
  }
  const double top = *std::max_element(score.begin(), score.end());
  double z = 0.0;
  Posterior out;
  for (std::size_t c = 0; c < kNumClassLabels; ++c) {
    out.probabilities[c] = std::exp(score[c] - top);
    z += out.probabilities[c];
  }
  std::size_t best = 0;
  for (std::size_t c = 0; c < kNumClassLabels; ++c) {
    out.probabilities[c] /= z;
    if (out.probabilities[c] > out.probabilities[best]) best = c;
  }
  out.label = static_cast<ClassLabel>(best);
  return out;
}

double BaselineModel::log_likelihood(std::string_view token, ClassLabel c) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) {
    throw Error(ErrorCode::kNotFound, "token '" + std::string(token) + "' not in vocabulary");
  }
  return log_likelihood_[idx(c)][it->second];
}

Json BaselineModel::to_json() const {
  Json priors = Json::object();
  Json weights = Json::object();
  for (auto c : kAllClassLabels) {
    priors[std::string(to_string(c))] = priors_[idx(c)];
    weights[std::string(to_string(c))] = log_likelihood_[idx(c)];
  }
  return Json{{"version", kBaselineVersion},
              {"title_prior", title_prior_},
              {"vocabulary", vocabulary_},
              {"priors", std::move(priors)},
              {"log_likelihood", std::move(weights)}};
}

BaselineModel BaselineModel::from_json(const Json& j) {
  try {
    if (j.at("version").get<int>() != kBaselineVersion) {
      throw Error(ErrorCode::kParse, "unsupported baseline model version");
    }
    BaselineModel model;
    model.title_prior_ = j.at("title_prior").get<double>();
    model.vocabulary_ = j.at("vocabulary").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < model.vocabulary_.size(); ++i) {
      if (!model.index_.emplace(model.vocabulary_[i], i).second) {
        throw Error(ErrorCode::kParse, "duplicate vocabulary entry '" + model.vocabulary_[i] + "'");
      }
    }
    double prior_sum = 0.0;
    for (auto c : kAllClassLabels) {
      const std::string name(to_string(c));
      model.priors_[idx(c)] = j.at("priors").at(name).get<double>();
      prior_sum += model.priors_[idx(c)];
      model.log_likelihood_[idx(c)] = j.at("log_likelihood").at(name).get<std::vector<double>>();
      if (model.log_likelihood_[idx(c)].size() != model.vocabulary_.size()) {
        throw Error(ErrorCode::kParse, "weights for " + name + " do not cover the vocabulary");
      }
    }
    if (std::abs(prior_sum - 1.0) > 1e-9) throw Error(ErrorCode::kParse, "class priors do not sum to 1");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("baseline model: ") + e.what());
  }
}

Json make_classify_request(std::span<const RequirementRow> rows) {
  Json items = Json::array();
  for (const auto& r : rows) {
    items.push_back(Json{{"id", r.object_identifier},
                         {"text", r.kind == RowKind::kTitle ? r.object_heading : r.object_text},
                         {"kind", std::string(to_string(r.kind))}});
  }
  return Json{{"rows", std::move(items)}};
}

std::vector<WireLabel> parse_classify_response(const Json& body) {
  if (!body.is_object() || !body.contains("labels") || !body["labels"].is_array()) {
    throw Error(ErrorCode::kParse, "classifier response lacks a 'labels' array");
  }
  std::vector<WireLabel> out;
  for (const auto& item : body["labels"]) {
    if (!item.is_object() || !item.contains("id") || !item["id"].is_string() ||
        !item.contains("label") || !item["label"].is_string() || !item.contains("confidence") ||
        !item["confidence"].is_number()) {
      throw Error(ErrorCode::kParse, "malformed label entry: " + item.dump());
    }
    const auto label = parse_class_label(item["label"].get<std::string>());
    if (!label) throw Error(ErrorCode::kParse, "unknown label '" + item["label"].get<std::string>() + "'");
    const double conf = item["confidence"].get<double>();
    if (!(conf >= 0.0 && conf <= 1.0)) {
      throw Error(ErrorCode::kParse, "confidence outside [0,1] for id " + item["id"].get<std::string>());
    }
    out.push_back({item["id"].get<std::string>(), *label, conf});
  }
  return out;
}

namespace {

struct Verdict {
  ClassLabel label;
  double confidence;
};

using VerdictMap = std::unordered_map<std::string, Verdict>;

void classify_builtin(const BaselineModel& model, std::span<const RequirementRow> rows,
                      VerdictMap& out) {
  for (const auto& r : rows) {
    const auto tokens = preprocess(r.kind == RowKind::kTitle ? r.object_heading : r.object_text);
    if (tokens.empty() && r.kind == RowKind::kText) {
      out[r.object_identifier] = {ClassLabel::kInfo, model.prior(ClassLabel::kInfo)};
      continue;
    }
    const auto post = model.posterior(tokens, r.kind);
    out[r.object_identifier] = {post.label, post.confidence()};
  }
}

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint URL lacks a scheme: '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.scheme_host_port = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  constexpr std::string_view kRoute = "/classify";
  if (path.size() < kRoute.size() || path.compare(path.size() - kRoute.size(), kRoute.size(), kRoute) != 0) {
    path += kRoute;
  }
  out.path = path;
  return out;
}

VerdictMap classify_batch(const ExternalEndpoint& ep, const ParsedUrl& url,
                          std::span<const RequirementRow> batch) {
  httplib::Client client(url.scheme_host_port);
  const auto sec = ep.timeout_ms / 1000;
  const auto usec = (ep.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  const auto res = client.Post(url.path, make_classify_request(batch).dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kClassification,
                "classifier request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kClassification,
                "classifier answered HTTP " + std::to_string(res->status));
  }
  const auto labels = parse_classify_response(parse_json(res->body, "classifier response"));

  std::unordered_set<std::string> expected;
  for (const auto& r : batch) expected.insert(r.object_identifier);
  VerdictMap out;
  for (const auto& l : labels) {
    if (!expected.contains(l.id)) {
      throw Error(ErrorCode::kParse, "classifier returned unknown row id '" + l.id + "'");
    }
    if (!out.emplace(l.id, Verdict{l.label, l.confidence}).second) {
      throw Error(ErrorCode::kParse, "classifier returned row id '" + l.id + "' twice");
    }
  }
  for (const auto& id : expected) {
    if (!out.contains(id)) throw Error(ErrorCode::kParse, "classifier response is missing row id '" + id + "'");
  }
  return out;
}

void classify_external(const ExternalEndpoint& ep, std::span<const RequirementRow> rows,
                       VerdictMap& out, std::string& failure) {
  const ParsedUrl url = parse_endpoint(ep.url);
  const std::size_t batch = std::max<std::size_t>(1, ep.batch_size);
  const std::size_t in_flight = static_cast<std::size_t>(std::max(1, ep.max_in_flight));

  std::vector<std::span<const RequirementRow>> batches;
  for (std::size_t i = 0; i < rows.size(); i += batch) {
    batches.push_back(rows.subspan(i, std::min(batch, rows.size() - i)));
  }
  for (std::size_t wave = 0; wave < batches.size(); wave += in_flight) {
    std::vector<std::future<VerdictMap>> jobs;
    for (std::size_t b = wave; b < std::min(batches.size(), wave + in_flight); ++b) {
      jobs.push_back(std::async(std::launch::async, classify_batch, std::cref(ep), std::cref(url),
                                batches[b]));
    }
    for (auto& job : jobs) {
      try {
        out.merge(job.get());
      } catch (const Error& e) {
        if (failure.empty()) failure = e.what();
      }
    }
    if (!failure.empty()) return;
  }
}

}  // namespace

FinalOutput classify_rows(const ClassifierBinding& binding, std::span<const RequirementRow> rows,
                          std::string doc_id) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "classify_rows: no rows");
  {
    std::unordered_set<std::string_view> ids;
    for (const auto& r : rows) {
      if (!ids.insert(r.object_identifier).second) {
        throw Error(ErrorCode::kInvalidArgument, "classify_rows: duplicate row id '" + r.object_identifier + "'");
      }
    }
  }

  VerdictMap verdicts;
  std::string failure;
  if (const auto* model = std::get_if<BaselineModel>(&binding)) {
    classify_builtin(*model, rows, verdicts);
  } else {
    classify_external(std::get<ExternalEndpoint>(binding), rows, verdicts, failure);
  }

  FinalOutput out{std::move(doc_id), {rows.begin(), rows.end()}};
  for (auto& row : out.rows) {
    if (row.review_state == ReviewState::kCorrected && row.corrected_type) {
      row.object_type = row.corrected_type;
      row.confidence = 1.0;
      continue;
    }
    auto it = verdicts.find(row.object_identifier);
    if (it == verdicts.end()) {
      row.object_type.reset();
      row.confidence.reset();
      continue;
    }
    row.object_type = it->second.label;
    row.confidence = it->second.confidence;
  }
  if (!failure.empty()) throw ClassificationError(failure, std::move(out));
  return out;
}

}  // namespace rexcl
