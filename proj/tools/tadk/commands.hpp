#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "util.hpp"

namespace tadk::cli {

struct SynthOpts {
  int apps = 2;
  std::uint32_t flows = 400;
  double rate = 200.0;
  std::string out;
  std::string labels_out;  // default: <out>.labels
};

struct ExtractOpts {
  std::string input;    // pcap
  std::string corpus;   // lexical rows from a corpus directory
  std::string payloads; // lexical rows from a payload file
  std::string label;    // label for every row
  std::string labels;   // initiator,label file for pcap rows
  std::string out = "-";
};

struct TrainOpts {
  std::string rows;
  std::string out;
  std::uint32_t trees = 100;
  std::uint32_t max_depth = 16;
  std::uint32_t min_leaf = 2;
};

struct ReduceOpts {
  std::string model;
  std::string rows;
  std::string out;
  double importance = 1.0;
};

struct EvaluateOpts {
  std::string model;
  std::string rows;
};

struct ClassifyOpts {
  std::string input;
  std::string model;
  std::string labels;
};

struct DetectOpts {
  std::vector<std::string> inputs;
  std::string corpus;
  std::string model;
  std::string sqli_profile;
  std::string xss_profile;
};

struct LabelOpts {
  std::string input;
  std::string out;
  std::uint32_t k_min = 2;
  std::uint32_t k_max = 10;
};

struct ApplyOpts {
  std::string report;
  std::string assignments;
  std::string out = "-";
};

struct CompileOpts {
  std::string profile;
  std::string bundled;
  std::string out;
  std::string tokenize;
};

struct BenchOpts {
  std::string kind;
  std::uint32_t iters = 5;
  std::uint32_t flows = 400;
  std::string corpus;
};

int cmd_synth(const Globals& g, const SynthOpts& o);
int cmd_extract(const Globals& g, const ExtractOpts& o);
int cmd_train(const Globals& g, const TrainOpts& o);
int cmd_reduce(const Globals& g, const ReduceOpts& o);
int cmd_evaluate(const Globals& g, const EvaluateOpts& o);
int cmd_classify(const Globals& g, const ClassifyOpts& o);
int cmd_detect(const Globals& g, const DetectOpts& o);
int cmd_label(const Globals& g, const LabelOpts& o);
int cmd_apply_labels(const Globals& g, const ApplyOpts& o);
int cmd_compile(const Globals& g, const CompileOpts& o);
int cmd_bench(const Globals& g, const BenchOpts& o);

}  // namespace tadk::cli
