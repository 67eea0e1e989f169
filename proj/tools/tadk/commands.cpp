#include "commands.hpp"

#include <cstdio>
#include <iostream>
#include <map>

#include "tadk/classify.hpp"
#include "tadk/detect.hpp"
#include "tadk/error.hpp"
#include "tadk/evaluate.hpp"
#include "tadk/features.hpp"
#include "tadk/label_helper.hpp"
#include "tadk/pcap.hpp"
#include "tadk/synth.hpp"

namespace tadk::cli {
namespace {

pipe::StreamConfig stream_config(const Globals& g) {
  pipe::StreamConfig cfg;
  if (!(g.idle_timeout_s > 0)) throw Error(Errc::InvalidArgs, "--idle-timeout must be positive");
  cfg.flow.idle_timeout_us = static_cast<std::uint64_t>(g.idle_timeout_s * 1e6);
  cfg.min_pkts = g.min_pkts;
  return cfg;
}

void emit_dataset(const std::string& out, const Dataset& ds) {
  if (out == "-") {
    write_dataset(std::cout, ds);
  } else {
    write_dataset(std::filesystem::path(out), ds);
    log(LogLevel::Info, "wrote " + std::to_string(ds.rows()) + " rows to " + out);
  }
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

dfa::DfaTable load_profile(const std::string& path, std::string_view bundled) {
  if (path.empty()) return dfa::compile(dfa::parse_profile(dfa::bundled_profile_text(bundled)));
  const std::string text = read_file(path);
  if (text.starts_with("TDFA")) {
    return dfa::load_table(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                         text.size()));
  }
  return dfa::compile(dfa::parse_profile(text));
}

}  // namespace

int cmd_synth(const Globals& g, const SynthOpts& o) {
  synth::SynthSpec spec;
  spec.apps = synth::bundled_apps(o.apps);
  spec.flow_count = o.flows;
  spec.flow_rate = o.rate;
  spec.seed = g.seed;
  const auto trace = synth::synth_trace(spec);
  pcap::write_pcap(o.out, trace.packets, {});
  const std::string labels = o.labels_out.empty() ? o.out + ".labels" : o.labels_out;
  write_labels(labels, trace.labels);
  std::cout << "wrote " << trace.packets.size() << " packets in " << trace.labels.size() << " flows to "
            << o.out << " (labels: " << labels << ")\n";
  return 0;
}

int cmd_extract(const Globals& g, const ExtractOpts& o) {
  const int sources = !o.input.empty() + !o.corpus.empty() + !o.payloads.empty();
  if (sources != 1) throw Error(Errc::InvalidArgs, "give exactly one of PCAP, --corpus or --payloads");

  if (!o.corpus.empty() || !o.payloads.empty()) {
    pipe::LexicalFeaturizer lex;
    pipe::Corpus corpus;
    if (!o.corpus.empty()) {
      corpus = pipe::read_corpus(o.corpus);
    } else {
      for (auto& line : read_lines(o.payloads)) {
        corpus.payloads.push_back(std::move(line));
        corpus.labels.push_back(o.label);
      }
    }
    emit_dataset(o.out, pipe::lexical_dataset(lex, corpus));
    return 0;
  }

  const auto trace = pcap::read_pcap(o.input);
  const auto labels = o.labels.empty() ? std::map<std::string, std::string>{} : read_labels(o.labels);
  emit_dataset(o.out, pipe::extract_dataset(trace.packets, stream_config(g), labels, o.label));
  return 0;
}

int cmd_train(const Globals& g, const TrainOpts& o) {
  const auto ds = read_dataset(std::filesystem::path(o.rows));
  rf::TrainParams p;
  p.n_trees = o.trees;
  p.max_depth = o.max_depth;
  p.min_leaf = o.min_leaf;
  p.seed = g.seed;
  p.jobs = g.jobs;
  const auto model = rf::train(ds, p);
  rf::save_model(o.out, model);
  std::cout << "trained " << model.trees.size() << " trees on " << ds.rows() << " rows, "
            << model.classes.size() << " classes; oob accuracy " << fmt("%.4f", model.meta.oob_accuracy)
            << '\n';
  return 0;
}

int cmd_reduce(const Globals& g, const ReduceOpts& o) {
  const auto model = rf::load_model(std::filesystem::path(o.model));
  const auto ds = read_dataset(std::filesystem::path(o.rows));
  const auto reduced = rf::reduce_features(model, ds, o.importance, g.jobs);
  rf::save_model(o.out, reduced);
  std::cout << "kept " << reduced.kept.size() << " of " << model.kept.size() << " features; oob accuracy "
            << fmt("%.4f", model.meta.oob_accuracy) << " -> " << fmt("%.4f", reduced.meta.oob_accuracy)
            << (reduced == model ? " (original kept)" : "") << '\n';
  return 0;
}

int cmd_evaluate(const Globals& g, const EvaluateOpts& o) {
  const auto model = rf::load_model(std::filesystem::path(o.model));
  const auto ds = read_dataset(std::filesystem::path(o.rows));
  const auto report = rf::evaluate(model, ds);
  std::cout << (g.rows() ? rf::format_report_rows(report) : rf::format_report_text(report));
  return 0;
}

int cmd_classify(const Globals& g, const ClassifyOpts& o) {
  const auto model = rf::load_model(std::filesystem::path(o.model), fx::flow_schema().version);
  const auto trace = pcap::read_pcap(o.input);
  const auto out = pipe::classify_packets(trace.packets, model, stream_config(g), g.jobs);
  for (const auto& r : out.results) {
    std::cout << (g.rows() ? pipe::format_classify_row(r) : pipe::format_classify_text(r)) << '\n';
  }
  if (!o.labels.empty()) {
    const auto truth = read_labels(o.labels);
    std::size_t scored = 0;
    std::size_t correct = 0;
    for (const auto& r : out.results) {
      const auto it = truth.find(r.initiator);
      if (it == truth.end()) continue;
      ++scored;
      correct += it->second == r.label;
    }
    const double acc = scored == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(scored);
    if (g.rows()) {
      std::cout << "accuracy," << fmt("%.6f", acc) << ',' << scored << '\n';
    } else {
      std::cout << "accuracy " << fmt("%.4f", acc) << " (" << correct << '/' << scored << " flows)\n";
    }
  }
  log(LogLevel::Info, std::to_string(out.results.size()) + " flows classified, " +
                          std::to_string(out.stats.packets_skipped) + " packets skipped");
  return 0;
}

int cmd_detect(const Globals& g, const DetectOpts& o) {
  if (o.inputs.empty() == o.corpus.empty()) {
    throw Error(Errc::InvalidArgs, "give payload files (or '-') or --corpus, not both");
  }
  pipe::LexicalFeaturizer lex(load_profile(o.sqli_profile, "sqli"), load_profile(o.xss_profile, "xss"));
  const pipe::Detector det(rf::load_model(std::filesystem::path(o.model), pipe::lex_schema_version),
                           g.threshold, std::move(lex));

  pipe::Corpus corpus;
  std::vector<std::string> ids;
  if (!o.corpus.empty()) {
    corpus = pipe::read_corpus(o.corpus);
    std::map<std::string, std::size_t> seen;
    for (const auto& label : corpus.labels) ids.push_back(label + "-" + std::to_string(++seen[label]));
  } else {
    for (const auto& path : o.inputs) {
      for (auto& line : read_lines(path)) {
        corpus.payloads.push_back(std::move(line));
        ids.push_back(std::to_string(ids.size() + 1));
      }
    }
  }

  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
  for (std::size_t i = 0; i < corpus.payloads.size(); ++i) {
    const auto r = det.detect(pipe::request_payload(corpus.payloads[i]), ids[i]);
    std::cout << (g.rows() ? pipe::format_detect_row(r) : pipe::format_detect_text(r)) << '\n';
    if (!corpus.labels.empty()) {
      const auto& l = corpus.labels[i];
      truth.push_back(l == "benign" ? 0 : l == "sqli" ? 1 : 2);
      predicted.push_back(static_cast<std::size_t>(r.verdict));
    }
  }
  if (!truth.empty()) {
    const auto report = rf::make_report({"benign", "sqli", "xss"}, truth, predicted);
    std::cout << (g.rows() ? rf::format_report_rows(report) : "\n" + rf::format_report_text(report));
  }
  return 0;
}

int cmd_label(const Globals& g, const LabelOpts& o) {
  const auto trace = pcap::read_pcap(o.input);
  pipe::LabelParams p;
  p.k_min = o.k_min;
  p.k_max = o.k_max;
  p.seed = g.seed;
  const auto report = pipe::label_helper(pipe::collect_flows(trace.packets, stream_config(g).flow), p);
  pipe::write_report(std::filesystem::path(o.out), report);
  if (g.rows()) {
    pipe::write_report(std::cout, report);
  } else {
    std::cout << pipe::format_report_table(report);
  }
  return 0;
}

int cmd_apply_labels(const Globals&, const ApplyOpts& o) {
  const auto report = pipe::read_report(std::filesystem::path(o.report));
  const auto assignments = pipe::read_assignments(std::filesystem::path(o.assignments));
  emit_dataset(o.out, pipe::apply_labels(report, assignments));
  return 0;
}

int cmd_compile(const Globals&, const CompileOpts& o) {
  if (o.profile.empty() == o.bundled.empty()) {
    throw Error(Errc::InvalidArgs, "give a profile file or --bundled NAME");
  }
  std::string text;
  if (!o.bundled.empty()) {
    text = std::string(dfa::bundled_profile_text(o.bundled));
    if (text.empty()) throw Error(Errc::InvalidArgs, "no bundled profile named '" + o.bundled + "'");
  } else {
    text = read_file(o.profile);
  }
  const auto profile = dfa::parse_profile(text);
  const auto table = dfa::compile(profile);
  if (!o.out.empty()) dfa::save_table(o.out, table);
  std::cout << "compiled " << profile.rules.size() << " rules (" << table.token_count() << " tokens) into "
            << table.state_count << " states\n";
  if (!o.tokenize.empty()) {
    const auto stream = dfa::tokenize(table, o.tokenize);
    for (const auto& t : stream.tokens) {
      std::cout << table.token_names[t.id] << ' ' << t.start << ' ' << t.end << ' ' << t.lexeme(o.tokenize)
                << '\n';
    }
    std::cout << "unmatched " << stream.stats.unmatched << '\n';
  }
  return 0;
}

}  // namespace tadk::cli
