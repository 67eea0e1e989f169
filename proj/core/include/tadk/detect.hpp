#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tadk/dataset.hpp"
#include "tadk/dfa.hpp"
#include "tadk/forest.hpp"

namespace tadk::pipe {

inline constexpr std::string_view lex_schema_version = "tadk-lex-1";

/// Lexical features of a payload: the sqli token histogram followed by the
/// xss token histogram (each with its total and unmatched-byte counts).
class LexicalFeaturizer {
 public:
  /// Compiles the bundled profiles.
  LexicalFeaturizer();
  LexicalFeaturizer(dfa::DfaTable sqli, dfa::DfaTable xss);

  std::vector<double> features(std::string_view payload) const;
  /// Token count summed over both profiles.
  std::size_t token_count(const std::vector<double>& features) const;
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t width() const noexcept { return names_.size(); }
  Dataset make_dataset() const;

 private:
  dfa::DfaTable sqli_;
  dfa::DfaTable xss_;
  std::vector<std::string> names_;
};

enum class Verdict : std::uint8_t { Benign, Sqli, Xss };
std::string_view verdict_name(Verdict v) noexcept;

struct DetectResult {
  std::string request_id;
  Verdict verdict = Verdict::Benign;
  double confidence = 0.0;  // probability of the reported verdict's class
  double p_sqli = 0.0;
  double p_xss = 0.0;
  std::uint32_t tokens = 0;
  double latency_us = 0.0;  // tokenize + predict
};

/// Model classes are expected to be "benign", "sqli" and "xss"; a missing
/// attack class simply has probability 0.
class Detector {
 public:
  Detector(rf::Model model, double threshold = 0.5, LexicalFeaturizer lex = {});

  /// `payload` is already URL-decoded. The verdict is benign iff both
  /// attack probabilities are below the threshold; otherwise the larger
  /// attack class wins (sqli on a tie).
  DetectResult detect(std::string_view payload, std::string request_id = {}) const;

  const LexicalFeaturizer& featurizer() const noexcept { return lex_; }
  const rf::Model& model() const noexcept { return model_; }
  double threshold() const noexcept { return threshold_; }

 private:
  rf::Model model_;
  double threshold_;
  LexicalFeaturizer lex_;
  std::optional<std::uint32_t> benign_;
  std::optional<std::uint32_t> sqli_;
  std::optional<std::uint32_t> xss_;
};

/// The part of an HTTP request worth scanning: query string plus body for a
/// request, the text itself otherwise. The result is URL-decoded.
std::string request_payload(std::string_view text);

/// Labeled payloads read from <dir>/benign.txt, sqli.txt and xss.txt, one
/// payload per line, raw (not yet URL-decoded).
struct Corpus {
  std::vector<std::string> payloads;
  std::vector<std::string> labels;
};
Corpus read_corpus(const std::filesystem::path& dir);
/// Keys are "<label>-<line>"; payloads are URL-decoded before tokenizing.
Dataset lexical_dataset(const LexicalFeaturizer& lex, const Corpus& corpus);

/// "id,verdict,confidence,latency_us" and an aligned text form.
std::string format_detect_row(const DetectResult& r);
std::string format_detect_text(const DetectResult& r);

}  // namespace tadk::pipe
