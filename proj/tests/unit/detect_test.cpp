#include <gtest/gtest.h>

#include <cctype>

#include "tadk/detect.hpp"
#include "tadk/error.hpp"

using namespace tadk;

namespace {

// A forest of one leaf: every payload gets the same probabilities.
rf::Model constant_model(std::vector<std::string> classes, std::vector<double> counts, std::uint32_t width) {
  rf::Model m;
  m.schema_version = std::string(pipe::lex_schema_version);
  m.n_features = width;
  m.classes = std::move(classes);
  rf::Tree t;
  t.nodes.push_back({rf::leaf_marker, 0, 0, 0, std::move(counts)});
  m.trees = {t};
  return m;
}

std::string flip_case(std::string s) {
  for (auto& c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      c = static_cast<char>(std::islower(static_cast<unsigned char>(c)) ? std::toupper(c) : std::tolower(c));
    }
  }
  return s;
}

const pipe::Corpus& corpus() {
  static const pipe::Corpus c = pipe::read_corpus(std::filesystem::path(TADK_TEST_DATA_DIR) / "corpus");
  return c;
}

}  // namespace

TEST(Lexical, FeaturesAreBothHistograms) {
  const pipe::LexicalFeaturizer lex;
  const auto sqli = dfa::compile(dfa::parse_profile(dfa::bundled_profile_text("sqli")));
  const auto xss = dfa::compile(dfa::parse_profile(dfa::bundled_profile_text("xss")));
  EXPECT_EQ(lex.width(), sqli.token_count() + 2 + xss.token_count() + 2);
  const std::string p = "1' OR '1'='1 <script>alert(1)</script>";
  auto want = dfa::token_histogram(dfa::tokenize(sqli, p), sqli.token_count());
  const auto x = dfa::token_histogram(dfa::tokenize(xss, p), xss.token_count());
  want.insert(want.end(), x.begin(), x.end());
  const auto got = lex.features(p);
  EXPECT_EQ(got, want);
  EXPECT_EQ(lex.names().front(), "sqli." + sqli.token_names.front());
  EXPECT_EQ(lex.token_count(got),
            static_cast<std::size_t>(got[sqli.token_count()] + got[sqli.token_count() + 2 + xss.token_count()]));
  const auto ds = lex.make_dataset();
  EXPECT_EQ(ds.schema_version, pipe::lex_schema_version);
  EXPECT_EQ(ds.feature_names, lex.names());
}

TEST(Detector, VerdictRule) {
  const pipe::LexicalFeaturizer lex;
  const auto w = static_cast<std::uint32_t>(lex.width());
  const std::vector<std::string> cls{"benign", "sqli", "xss"};
  auto verdict = [&](std::vector<double> counts, double threshold = 0.5) {
    return pipe::Detector(constant_model(cls, std::move(counts), w), threshold, lex).detect("x").verdict;
  };
  EXPECT_EQ(verdict({6, 2, 2}), pipe::Verdict::Benign);
  EXPECT_EQ(verdict({2, 6, 2}), pipe::Verdict::Sqli);
  EXPECT_EQ(verdict({2, 2, 6}), pipe::Verdict::Xss);
  EXPECT_EQ(verdict({4, 3, 3}, 0.3), pipe::Verdict::Sqli);   // tie between attacks
  EXPECT_EQ(verdict({4, 2, 4}, 0.4), pipe::Verdict::Xss);    // benign ties xss, xss passes threshold
  EXPECT_EQ(verdict({2, 4, 4}, 0.5), pipe::Verdict::Benign); // both attacks at 0.4

  const pipe::Detector only_sqli(constant_model({"benign", "sqli"}, {1, 3}, w), 0.5, lex);
  const auto r = only_sqli.detect("x", "req");
  EXPECT_EQ(r.verdict, pipe::Verdict::Sqli);
  EXPECT_DOUBLE_EQ(r.p_sqli, 0.75);
  EXPECT_DOUBLE_EQ(r.p_xss, 0.0);
  EXPECT_DOUBLE_EQ(r.confidence, 0.75);
  EXPECT_EQ(r.request_id, "req");
}

TEST(Detector, Validation) {
  const pipe::LexicalFeaturizer lex;
  const auto w = static_cast<std::uint32_t>(lex.width());
  EXPECT_THROW(pipe::Detector(constant_model({"benign", "sqli"}, {1, 1}, w + 1), 0.5, lex), Error);
  auto wrong = constant_model({"benign", "sqli"}, {1, 1}, w);
  wrong.schema_version = "tadk-flow-v1";
  EXPECT_THROW(pipe::Detector(wrong, 0.5, lex), Error);
  EXPECT_THROW(pipe::Detector(constant_model({"benign", "sqli"}, {1, 1}, w), 0.0, lex), Error);
  EXPECT_THROW(pipe::Detector(constant_model({"benign", "sqli"}, {1, 1}, w), 1.5, lex), Error);
}

TEST(Detector, CaseInsensitiveKeywordsGiveSameVerdict) {
  const pipe::LexicalFeaturizer lex;
  rf::TrainParams p;
  p.n_trees = 30;
  const pipe::Detector det(rf::train(pipe::lexical_dataset(lex, corpus()), p), 0.5, lex);
  for (std::string s : {"1' or '1'='1", "1 UNION select password from users--", "admin' AnD sleep(5)#",
                        "<ScRiPt>alert(1)</sCrIpT>", "<img src=x OnErRoR=alert(1)>"}) {
    const auto a = det.detect(s);
    const auto b = det.detect(flip_case(s));
    EXPECT_EQ(a.verdict, b.verdict) << s;
    EXPECT_NE(a.verdict, pipe::Verdict::Benign) << s;
  }
  // Keyword counts do not depend on case.
  EXPECT_EQ(lex.features("SELECT"), lex.features("select"));
}

TEST(Request, PayloadExtraction) {
  EXPECT_EQ(pipe::request_payload("id=1%27%20or%201=1"), "id=1' or 1=1");
  EXPECT_EQ(pipe::request_payload("GET /p?q=a+b&x=%3Cs%3E HTTP/1.1\r\nHost: h\r\n\r\n"), "q=a b&x=<s>");
  EXPECT_EQ(pipe::request_payload("POST /login HTTP/1.1\r\nHost: h\r\n\r\nuser=a&pw=b"), "user=a&pw=b");
  EXPECT_EQ(pipe::request_payload("POST /f?x=1 HTTP/1.1\n\nbody"), "x=1&body");
  EXPECT_EQ(pipe::request_payload("GET / HTTP/1.1\r\n\r\n"), "");
}

TEST(Corpus, BundledCorpusShape) {
  const auto& c = corpus();
  ASSERT_EQ(c.payloads.size(), c.labels.size());
  std::map<std::string, std::size_t> n;
  for (const auto& l : c.labels) ++n[l];
  EXPECT_EQ(n["benign"], 480u);
  EXPECT_EQ(n["sqli"], 240u);
  EXPECT_EQ(n["xss"], 240u);
  const pipe::LexicalFeaturizer lex;
  const auto ds = pipe::lexical_dataset(lex, c);
  EXPECT_EQ(ds.rows(), c.payloads.size());
  EXPECT_EQ(ds.keys.front(), "benign-1");
  EXPECT_EQ(ds.keys.back(), "xss-240");
  EXPECT_THROW(pipe::read_corpus("/nonexistent"), Error);
}

TEST(Detector, RowFormat) {
  pipe::DetectResult r;
  r.request_id = "7";
  r.verdict = pipe::Verdict::Xss;
  r.confidence = 0.9;
  r.latency_us = 1.5;
  EXPECT_EQ(pipe::format_detect_row(r), "7,xss,0.900000,1.500");
  EXPECT_EQ(pipe::verdict_name(pipe::Verdict::Benign), "benign");
}
