#include "tadk/detect.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>

#include "tadk/error.hpp"

namespace tadk::pipe {
namespace {

dfa::DfaTable bundled_table(std::string_view name) {
  return dfa::compile(dfa::parse_profile(dfa::bundled_profile_text(name)));
}

std::optional<std::uint32_t> class_id(const rf::Model& m, std::string_view name) {
  for (std::size_t i = 0; i < m.classes.size(); ++i) {
    if (m.classes[i] == name) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

}  // namespace

LexicalFeaturizer::LexicalFeaturizer() : LexicalFeaturizer(bundled_table("sqli"), bundled_table("xss")) {}

LexicalFeaturizer::LexicalFeaturizer(dfa::DfaTable sqli, dfa::DfaTable xss)
    : sqli_(std::move(sqli)), xss_(std::move(xss)) {
  for (const auto* t : {&sqli_, &xss_}) {
    const std::string prefix = t == &sqli_ ? "sqli." : "xss.";
    for (const auto& n : t->token_names) names_.push_back(prefix + n);
    names_.push_back(prefix + "total");
    names_.push_back(prefix + "unmatched");
  }
}

std::vector<double> LexicalFeaturizer::features(std::string_view payload) const {
  auto out = dfa::token_histogram(dfa::tokenize(sqli_, payload), sqli_.token_count());
  const auto xss = dfa::token_histogram(dfa::tokenize(xss_, payload), xss_.token_count());
  out.insert(out.end(), xss.begin(), xss.end());
  return out;
}

std::size_t LexicalFeaturizer::token_count(const std::vector<double>& f) const {
  return static_cast<std::size_t>(f[sqli_.token_count()] + f[sqli_.token_count() + 2 + xss_.token_count()]);
}

Dataset LexicalFeaturizer::make_dataset() const {
  Dataset ds;
  ds.schema_version = std::string(lex_schema_version);
  ds.feature_names = names_;
  return ds;
}

std::string_view verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::Benign: return "benign";
    case Verdict::Sqli: return "sqli";
    case Verdict::Xss: return "xss";
  }
  return "?";
}

Detector::Detector(rf::Model model, double threshold, LexicalFeaturizer lex)
    : model_(std::move(model)), threshold_(threshold), lex_(std::move(lex)) {
  if (model_.n_features != lex_.width() || model_.schema_version != lex_schema_version) {
    throw Error(Errc::SchemaMismatch, "model schema " + model_.schema_version + " (" +
                                          std::to_string(model_.n_features) +
                                          " features) does not match the lexical schema");
  }
  if (!(threshold_ > 0.0 && threshold_ <= 1.0)) {
    throw Error(Errc::InvalidArgs, "threshold must be in (0, 1]");
  }
  benign_ = class_id(model_, "benign");
  sqli_ = class_id(model_, "sqli");
  xss_ = class_id(model_, "xss");
}

DetectResult Detector::detect(std::string_view payload, std::string request_id) const {
  DetectResult r;
  r.request_id = std::move(request_id);
  const auto start = std::chrono::steady_clock::now();
  const auto f = lex_.features(payload);
  const auto pred = model_.predict(f);
  const auto stop = std::chrono::steady_clock::now();
  r.latency_us = std::chrono::duration<double, std::micro>(stop - start).count();
  r.tokens = static_cast<std::uint32_t>(lex_.token_count(f));
  r.p_sqli = sqli_ ? pred.probs[*sqli_] : 0.0;
  r.p_xss = xss_ ? pred.probs[*xss_] : 0.0;
  if (r.p_sqli < threshold_ && r.p_xss < threshold_) {
    r.verdict = Verdict::Benign;
    r.confidence = benign_ ? pred.probs[*benign_] : 1.0 - r.p_sqli - r.p_xss;
  } else if (r.p_sqli >= r.p_xss) {
    r.verdict = Verdict::Sqli;
    r.confidence = r.p_sqli;
  } else {
    r.verdict = Verdict::Xss;
    r.confidence = r.p_xss;
  }
  return r;
}

std::string request_payload(std::string_view text) {
  static constexpr std::string_view methods[] = {"GET ", "POST ", "PUT ", "DELETE ", "PATCH ",
                                                 "HEAD ", "OPTIONS "};
  bool is_request = false;
  for (auto m : methods) is_request = is_request || text.starts_with(m);
  if (!is_request) return dfa::url_decode(text);

  std::string out;
  const auto line_end = text.find_first_of("\r\n");
  const auto request_line = text.substr(0, line_end);
  const auto uri_start = request_line.find(' ') + 1;
  auto uri = request_line.substr(uri_start, request_line.find(' ', uri_start) - uri_start);
  if (const auto q = uri.find('?'); q != std::string_view::npos) out = uri.substr(q + 1);
  for (std::string_view sep : {"\r\n\r\n", "\n\n"}) {
    if (const auto b = text.find(sep); b != std::string_view::npos) {
      const auto body = text.substr(b + sep.size());
      if (!body.empty()) {
        if (!out.empty()) out.push_back('&');
        out.append(body);
      }
      break;
    }
  }
  return dfa::url_decode(out);
}

Corpus read_corpus(const std::filesystem::path& dir) {
  Corpus c;
  for (const char* label : {"benign", "sqli", "xss"}) {
    const auto path = dir / (std::string(label) + ".txt");
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      c.payloads.push_back(line);
      c.labels.emplace_back(label);
    }
  }
  return c;
}

Dataset lexical_dataset(const LexicalFeaturizer& lex, const Corpus& corpus) {
  Dataset ds = lex.make_dataset();
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < corpus.payloads.size(); ++i) {
    const auto& label = corpus.labels[i];
    ds.add_row(label + "-" + std::to_string(++seen[label]), label,
               lex.features(dfa::url_decode(corpus.payloads[i])));
  }
  return ds;
}

std::string format_detect_row(const DetectResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f,%.3f", r.confidence, r.latency_us);
  return r.request_id + "," + std::string(verdict_name(r.verdict)) + "," + buf;
}

std::string format_detect_text(const DetectResult& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-8s %-6s conf %.3f  sqli %.3f  xss %.3f  %3u tokens  %7.2f us",
                r.request_id.c_str(), std::string(verdict_name(r.verdict)).c_str(), r.confidence,
                r.p_sqli, r.p_xss, r.tokens, r.latency_us);
  return buf;
}

}  // namespace tadk::pipe
