#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "rexcl/classify.hpp"
#include "rexcl/evalkit.hpp"
#include "support.hpp"

using namespace rexcl;

namespace {

RequirementRow text_row(int i, std::string text) {
  RequirementRow r;
  r.object_identifier = make_row_identifier("C", i);
  r.object_number = "1." + std::to_string(i);
  r.object_level = 2;
  r.kind = RowKind::kText;
  r.object_text = std::move(text);
  return r;
}

RequirementRow title_row(int i, std::string heading) {
  RequirementRow r;
  r.object_identifier = make_row_identifier("C", i);
  r.object_number = std::to_string(i);
  r.object_level = 1;
  r.kind = RowKind::kTitle;
  r.object_heading = std::move(heading);
  return r;
}

const BaselineModel& trained_model() {
  static const BaselineModel model = default_baseline_model();
  return model;
}

// Fake classifier speaking the wire protocol on a loopback port.
class FakeClassifier {
 public:
  using Responder = std::function<void(const Json& request, httplib::Response&)>;

  explicit FakeClassifier(Responder responder) : responder_(std::move(responder)) {
    server_.Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      responder_(Json::parse(req.body), res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeClassifier() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_; }

  // Labels every row FUNC_REQ except TITLE rows, answering in reverse order.
  static void reverse_answer(const Json& request, httplib::Response& res) {
    Json labels = Json::array();
    const auto& rows = request.at("rows");
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
      const bool title = (*it).at("kind") == "TITLE";
      labels.push_back(Json{{"id", (*it).at("id")}, {"label", title ? "HEADER" : "FUNC_REQ"}, {"confidence", 0.75}});
    }
    res.set_content(Json{{"labels", labels}}.dump(), "application/json");
  }

 private:
  Responder responder_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
};

}  // namespace

TEST_CASE("preprocess examples") {
  CHECK(preprocess("").empty());
  CHECK(preprocess("The system shouldn't fail!") == TokenSeq{"system", "shouldn't", "fail"});
  CHECK(preprocess("Write to DATA_STORE, then stop.") == TokenSeq{"write", "data_store", "stop"});
  CHECK(preprocess("It must NOT crash; it cannot.") == TokenSeq{"must", "not", "crash", "cannot"});
  CHECK(preprocess("'quoted' o'clock") == TokenSeq{"quoted", "o'clock"});
  CHECK(preprocess("shouldn\xE2\x80\x99t \xE2\x80\x9Cgo\xE2\x80\x9D") == TokenSeq{"shouldn't", "go"});
  CHECK(preprocess("!!! ... ---").empty());
}

TEST_CASE("stopword resource") {
  CHECK(stopwords().size() == 127);
  CHECK(stopwords().contains("the"));
  CHECK(stopwords().contains("to"));
  CHECK(stopwords().contains("then"));
  CHECK(stopword_resource().find("# rexcl stopword list v1") == 0);
  for (const auto& w : retained_words()) {
    CHECK(preprocess(w) == TokenSeq{w});
  }
}

TEST_CASE("preprocess output invariants and idempotence") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    std::string text = testing::nasty_string(rng) + " The Quick " + testing::nasty_string(rng) + " can't";
    const auto tokens = preprocess(text);
    std::string joined;
    for (const auto& t : tokens) {
      CHECK_FALSE(t.empty());
      CHECK(std::none_of(t.begin(), t.end(), [](char c) { return c >= 'A' && c <= 'Z'; }));
      CHECK((!stopwords().contains(t) || retained_words().contains(t)));
      joined += t + " ";
    }
    CHECK(preprocess(joined) == tokens);
  }
}

TEST_CASE("a token exclusive to FUNC_REQ has its greatest likelihood there") {
  std::vector<LabeledText> rows = {
      {{"shall", "brake"}, RowKind::kText, ClassLabel::kFuncReq},
      {{"shall", "open"}, RowKind::kText, ClassLabel::kFuncReq},
      {{"latency", "ms"}, RowKind::kText, ClassLabel::kNonFuncReq},
      {{"overview"}, RowKind::kTitle, ClassLabel::kHeader},
      {{"note", "background"}, RowKind::kText, ClassLabel::kInfo},
  };
  const auto model = BaselineModel::train(rows);
  const double f = model.log_likelihood("shall", ClassLabel::kFuncReq);
  for (ClassLabel c : {ClassLabel::kHeader, ClassLabel::kInfo, ClassLabel::kNonFuncReq}) {
    CHECK(f > model.log_likelihood("shall", c));
  }
  // Add-one smoothing by direct count: FUNC_REQ holds 4 tokens, 8 vocabulary words.
  CHECK(f == doctest::Approx(std::log(3.0 / (4.0 + 8.0))));
  CHECK(model.log_likelihood("shall", ClassLabel::kInfo) == doctest::Approx(std::log(1.0 / (2.0 + 8.0))));
  CHECK(model.prior(ClassLabel::kFuncReq) == doctest::Approx(0.4));
  CHECK_THROWS_AS(model.log_likelihood("unseen", ClassLabel::kInfo), Error);
}

TEST_CASE("one row per class gives uniform priors") {
  std::vector<LabeledText> rows;
  for (ClassLabel c : kAllClassLabels) rows.push_back({{"w" + std::string(to_string(c))}, RowKind::kText, c});
  const auto model = BaselineModel::train(rows);
  double sum = 0;
  for (ClassLabel c : kAllClassLabels) {
    CHECK(model.prior(c) == doctest::Approx(0.25));
    sum += model.prior(c);
  }
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("training without a class names it") {
  std::vector<LabeledText> rows = {{{"a"}, RowKind::kText, ClassLabel::kInfo},
                                   {{"b"}, RowKind::kText, ClassLabel::kFuncReq},
                                   {{"c"}, RowKind::kTitle, ClassLabel::kHeader}};
  CHECK_THROWS_WITH_AS(BaselineModel::train(rows), doctest::Contains("NON_FUNC_REQ"), Error);
}

TEST_CASE("posterior is normalized and OOV tokens are ignored") {
  const auto& model = trained_model();
  const auto p = model.posterior(TokenSeq{"shall", "zzzunknown"}, RowKind::kText);
  double sum = 0;
  for (double v : p.probabilities) sum += v;
  CHECK(sum == doctest::Approx(1.0));
  const auto q = model.posterior(TokenSeq{"shall"}, RowKind::kText);
  for (std::size_t c = 0; c < kNumClassLabels; ++c) CHECK(p.probabilities[c] == doctest::Approx(q.probabilities[c]));
}

TEST_CASE("TITLE rows lean to HEADER") {
  const auto out = classify_rows(trained_model(), std::vector<RequirementRow>{title_row(1, "1. Introduction")});
  CHECK(out.rows[0].object_type == ClassLabel::kHeader);
}

TEST_CASE("corrections override the model") {
  auto r = text_row(1, "The controller shall open the valve within 10 ms.");
  r.review_state = ReviewState::kCorrected;
  r.corrected_type = ClassLabel::kNonFuncReq;
  r.object_type = ClassLabel::kNonFuncReq;
  const auto out = classify_rows(trained_model(), std::vector<RequirementRow>{r});
  CHECK(out.rows[0].object_type == ClassLabel::kNonFuncReq);
  CHECK(out.rows[0].confidence == 1.0);
}

TEST_CASE("rows without tokens fall back to INFO at its prior") {
  const auto out = classify_rows(trained_model(), std::vector<RequirementRow>{text_row(1, "?!... --")});
  CHECK(out.rows[0].object_type == ClassLabel::kInfo);
  CHECK(out.rows[0].confidence == doctest::Approx(trained_model().prior(ClassLabel::kInfo)));
}

TEST_CASE("classify_rows input checks") {
  CHECK_THROWS_AS(classify_rows(trained_model(), std::vector<RequirementRow>{}), Error);
  CHECK_THROWS_AS(classify_rows(trained_model(), std::vector<RequirementRow>{text_row(1, "a"), text_row(1, "b")}),
                  Error);
}

TEST_CASE("builtin confidences equal the posterior and are deterministic") {
  const auto rows = std::vector<RequirementRow>{text_row(1, "The unit shall log faults."),
                                                text_row(2, "Response time must stay below 50 ms."),
                                                title_row(3, "Safety")};
  const auto a = classify_rows(trained_model(), rows, "C");
  const auto b = classify_rows(trained_model(), rows, "C");
  CHECK(a == b);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& src = rows[i];
    const auto post = trained_model().posterior(
        preprocess(src.kind == RowKind::kTitle ? src.object_heading : src.object_text), src.kind);
    CHECK(a.rows[i].object_type == post.label);
    CHECK(*a.rows[i].confidence == doctest::Approx(post.confidence()));
    CHECK(*a.rows[i].confidence >= 0.0);
    CHECK(*a.rows[i].confidence <= 1.0);
  }
}

TEST_CASE("baseline model JSON round trip") {
  const auto& model = trained_model();
  const auto back = BaselineModel::from_json(parse_json(model.to_json().dump(), "model"));
  CHECK(back == model);
  CHECK_THROWS_AS(BaselineModel::from_json(Json::object()), Error);
}

TEST_CASE("wire protocol request and response") {
  const std::vector<RequirementRow> rows = {title_row(1, "Scope"), text_row(2, "Body")};
  const Json req = make_classify_request(rows);
  CHECK(req.dump() ==
        R"({"rows":[{"id":"C-R00001","text":"Scope","kind":"TITLE"},{"id":"C-R00002","text":"Body","kind":"TEXT"}]})");

  const auto labels = parse_classify_response(
      parse_json(R"({"labels":[{"id":"C-R00002","label":"INFO","confidence":0.5}]})", "r"));
  REQUIRE(labels.size() == 1);
  CHECK(labels[0].label == ClassLabel::kInfo);

  for (const char* bad : {R"({})", R"({"labels":[{"id":"x","label":"OTHER","confidence":0.5}]})",
                          R"({"labels":[{"id":"x","label":"INFO","confidence":1.5}]})",
                          R"({"labels":[{"label":"INFO","confidence":0.5}]})"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_classify_response(parse_json(bad, "r")), Error);
  }
}

TEST_CASE("external classifier: batches answered out of order keep row order") {
  FakeClassifier fake(FakeClassifier::reverse_answer);
  std::vector<RequirementRow> rows;
  for (int i = 1; i <= 23; ++i) rows.push_back(i % 5 == 1 ? title_row(i, "T") : text_row(i, "t" + std::to_string(i)));
  ExternalEndpoint ep{fake.url(), 5000, 4, 3};
  const auto out = classify_rows(ep, rows, "C");
  CHECK(fake.requests() == 6);
  REQUIRE(out.rows.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(out.rows[i].object_identifier == rows[i].object_identifier);
    CHECK(out.rows[i].object_type == (rows[i].kind == RowKind::kTitle ? ClassLabel::kHeader : ClassLabel::kFuncReq));
    CHECK(out.rows[i].confidence == 0.75);
  }
}

TEST_CASE("external classifier: protocol errors carry partial results") {
  std::vector<RequirementRow> rows;
  for (int i = 1; i <= 6; ++i) rows.push_back(text_row(i, "row"));

  SUBCASE("missing id") {
    FakeClassifier fake([](const Json& req, httplib::Response& res) {
      Json labels = Json::array();
      const auto& r = req.at("rows");
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i].at("id") == "C-R00005") continue;
        labels.push_back(Json{{"id", r[i].at("id")}, {"label", "INFO"}, {"confidence", 0.6}});
      }
      res.set_content(Json{{"labels", labels}}.dump(), "application/json");
    });
    try {
      classify_rows(ExternalEndpoint{fake.url(), 5000, 2, 1}, rows, "C");
      FAIL("expected a classification error");
    } catch (const ClassificationError& e) {
      CHECK(e.code() == ErrorCode::kClassification);
      CHECK(std::string(e.what()).find("C-R00005") != std::string::npos);
      const auto& partial = e.partial().rows;
      REQUIRE(partial.size() == 6);
      CHECK(partial[0].object_type == ClassLabel::kInfo);
      CHECK(partial[3].object_type == ClassLabel::kInfo);
      CHECK_FALSE(partial[4].object_type.has_value());
      CHECK_FALSE(partial[5].object_type.has_value());
    }
  }

  SUBCASE("server error") {
    FakeClassifier fake([](const Json&, httplib::Response& res) { res.status = 503; });
    CHECK_THROWS_AS(classify_rows(ExternalEndpoint{fake.url(), 5000}, rows), ClassificationError);
  }

  SUBCASE("timeout") {
    FakeClassifier fake([](const Json& req, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(600));
      FakeClassifier::reverse_answer(req, res);
    });
    CHECK_THROWS_AS(classify_rows(ExternalEndpoint{fake.url(), 150}, rows), ClassificationError);
  }

  SUBCASE("unknown id") {
    FakeClassifier fake([](const Json&, httplib::Response& res) {
      res.set_content(R"({"labels":[{"id":"nope","label":"INFO","confidence":0.5}]})", "application/json");
    });
    CHECK_THROWS_AS(classify_rows(ExternalEndpoint{fake.url(), 5000}, rows), ClassificationError);
  }
}

TEST_CASE("external classifier: corrections are kept and the endpoint path is normalized") {
  FakeClassifier fake(FakeClassifier::reverse_answer);
  auto r = text_row(1, "x");
  r.review_state = ReviewState::kCorrected;
  r.corrected_type = r.object_type = ClassLabel::kInfo;
  const auto out = classify_rows(ExternalEndpoint{fake.url() + "/classify/", 5000}, std::vector<RequirementRow>{r});
  CHECK(out.rows[0].object_type == ClassLabel::kInfo);
  CHECK_THROWS_AS(classify_rows(ExternalEndpoint{"127.0.0.1:1", 100}, std::vector<RequirementRow>{r}), Error);
}
