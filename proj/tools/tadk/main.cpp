// tadk: command-line front end for the traffic analytics toolkit.

#include <CLI11.hpp>

#include <functional>
#include <iostream>

#include "commands.hpp"
#include "tadk/error.hpp"

using namespace tadk::cli;

int main(int argc, char** argv) {
  CLI::App app{"Traffic analytics toolkit: flow features, DFA tokenizer, random forest pipelines", "tadk"};
  app.set_config("--config", "", "TOML/INI file with option defaults (command-line flags win)");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads (flow shards / trees)")
      ->check(CLI::Range(1u, 256u))
      ->capture_default_str();
  app.add_option("--idle-timeout", g.idle_timeout_s, "Flow idle timeout in seconds")->capture_default_str();
  app.add_option("--min-pkts", g.min_pkts, "Early classification trigger (packets per flow, 0 = at eviction)")
      ->capture_default_str();
  app.add_option("--threshold", g.threshold, "Attack probability threshold for detect")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "rows"}))
      ->capture_default_str();

  std::function<int()> run;

  SynthOpts synth;
  auto* c = app.add_subcommand("synth", "Write a synthetic multi-application trace");
  c->add_option("--apps", synth.apps, "Bundled application mix")->check(CLI::IsMember({2, 5}))->capture_default_str();
  c->add_option("--flows", synth.flows, "Flow count")->capture_default_str();
  c->add_option("--rate", synth.rate, "New flows per second")->capture_default_str();
  c->add_option("-o,--out", synth.out, "Output pcap")->required();
  c->add_option("--labels-out", synth.labels_out, "Ground-truth labels file (default <out>.labels)");
  c->callback([&] { run = [&] { return cmd_synth(g, synth); }; });

  ExtractOpts extract;
  c = app.add_subcommand("extract", "Trace or payloads -> feature rows");
  c->add_option("pcap", extract.input, "Input pcap");
  c->add_option("--corpus", extract.corpus, "Lexical rows from a corpus directory (benign/sqli/xss.txt)");
  c->add_option("--payloads", extract.payloads, "Lexical rows from a payload file ('-' for stdin)");
  c->add_option("--label", extract.label, "Label for every row (default: unlabeled)");
  c->add_option("--labels", extract.labels, "initiator,label file for pcap rows");
  c->add_option("-o,--out", extract.out, "Output rows file ('-' for stdout)")->capture_default_str();
  c->callback([&] { run = [&] { return cmd_extract(g, extract); }; });

  TrainOpts train;
  c = app.add_subcommand("train", "Feature rows -> random forest model");
  c->add_option("rows", train.rows, "Labeled rows file")->required();
  c->add_option("-o,--out", train.out, "Output model")->required();
  c->add_option("--trees", train.trees, "Tree count")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--max-depth", train.max_depth, "Maximum tree depth")->capture_default_str();
  c->add_option("--min-leaf", train.min_leaf, "Minimum samples per leaf")->check(CLI::PositiveNumber)->capture_default_str();
  c->callback([&] { run = [&] { return cmd_train(g, train); }; });

  ReduceOpts reduce;
  c = app.add_subcommand("reduce", "Impurity-based feature reduction with an accuracy guard");
  c->add_option("model", reduce.model, "Trained model")->required();
  c->add_option("rows", reduce.rows, "The model's training rows")->required();
  c->add_option("-o,--out", reduce.out, "Output model")->required();
  c->add_option("--importance", reduce.importance, "Drop features below importance/N")->capture_default_str();
  c->callback([&] { run = [&] { return cmd_reduce(g, reduce); }; });

  EvaluateOpts evaluate;
  c = app.add_subcommand("evaluate", "Precision, recall, F1 and confusion matrix on labeled rows");
  c->add_option("model", evaluate.model, "Trained model")->required();
  c->add_option("rows", evaluate.rows, "Labeled rows file")->required();
  c->callback([&] { run = [&] { return cmd_evaluate(g, evaluate); }; });

  ClassifyOpts classify;
  c = app.add_subcommand("classify", "Classify every flow of a trace");
  c->add_option("pcap", classify.input, "Input pcap")->required();
  c->add_option("-m,--model", classify.model, "Flow model")->required();
  c->add_option("--labels", classify.labels, "initiator,label file; prints an accuracy line");
  c->callback([&] { run = [&] { return cmd_classify(g, classify); }; });

  DetectOpts detect;
  c = app.add_subcommand("detect", "SQLi/XSS verdicts for payloads or HTTP requests (one per line)");
  c->add_option("inputs", detect.inputs, "Payload files ('-' for stdin)");
  c->add_option("--corpus", detect.corpus, "Labeled corpus directory; adds a confusion report");
  c->add_option("-m,--model", detect.model, "Lexical model")->required();
  c->add_option("--sqli-profile", detect.sqli_profile, "Profile text or compiled table (default: bundled)");
  c->add_option("--xss-profile", detect.xss_profile, "Profile text or compiled table (default: bundled)");
  c->callback([&] { run = [&] { return cmd_detect(g, detect); }; });

  LabelOpts label;
  c = app.add_subcommand("label", "Cluster a trace's flows and print labeling tips");
  c->add_option("pcap", label.input, "Input pcap")->required();
  c->add_option("-o,--out", label.out, "Cluster report file")->required();
  c->add_option("--k-min", label.k_min, "Smallest k")->capture_default_str();
  c->add_option("--k-max", label.k_max, "Largest k")->capture_default_str();
  c->callback([&] { run = [&] { return cmd_label(g, label); }; });

  ApplyOpts apply;
  c = app.add_subcommand("apply-labels", "Cluster report + cluster_id=label file -> labeled rows");
  c->add_option("report", apply.report, "Cluster report from `tadk label`")->required();
  c->add_option("assignments", apply.assignments, "cluster_id=label lines ('discard' drops a cluster)")->required();
  c->add_option("-o,--out", apply.out, "Output rows file ('-' for stdout)")->capture_default_str();
  c->callback([&] { run = [&] { return cmd_apply_labels(g, apply); }; });

  CompileOpts compile;
  c = app.add_subcommand("compile-profile", "Compile a token profile into a DFA table");
  c->add_option("profile", compile.profile, "Profile file");
  c->add_option("--bundled", compile.bundled, "Use a bundled profile (sqli, xss)");
  c->add_option("-o,--out", compile.out, "Output table");
  c->add_option("--tokenize", compile.tokenize, "Print the token stream of this text");
  c->callback([&] { run = [&] { return cmd_compile(g, compile); }; });

  BenchOpts bench;
  c = app.add_subcommand("bench", "Performance reports");
  c->add_option("kind", bench.kind, "What to measure")
      ->required()
      ->check(CLI::IsMember({"hist", "tokenize", "extract", "predict", "e2e"}));
  c->add_option("--iters", bench.iters, "Repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--flows", bench.flows, "Synthetic flows per trace")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--corpus", bench.corpus, "Corpus directory (default: bundled)");
  c->callback([&] { run = [&] { return cmd_bench(g, bench); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "tadk: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::Normal);
    return 2;
  }

  try {
    return run();
  } catch (const tadk::Error& e) {
    std::cerr << "tadk: error[" << tadk::errc_name(e.code()) << "]: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "tadk: error: " << e.what() << '\n';
  }
  return 1;
}
