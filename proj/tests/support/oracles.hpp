#pragma once
// Reference implementations the tests compare the library against. None of
// them share code with the library beyond its public data types.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include "tadk/dfa.hpp"
#include "tadk/forest.hpp"
#include "tadk/histogram.hpp"
#include "tadk/profile.hpp"

namespace oracle {

// ---- histogram -------------------------------------------------------------

inline std::vector<std::uint64_t> histogram16(std::span<const std::uint32_t> values, std::uint32_t width) {
  std::vector<std::uint64_t> bins(16, 0);
  for (auto v : values) {
    std::uint32_t b = v / width;
    if (b > 15) b = 15;
    ++bins[b];
  }
  return bins;
}

// Category from the plain-language definitions: all lanes in the biggest
// bin; all lanes in different bins; all lanes in one (smaller) bin; anything
// else.
inline tadk::hist::Category category(const tadk::hist::LaneVector& raw_bins) {
  std::vector<std::uint32_t> b(raw_bins.lanes.begin(), raw_bins.lanes.end());
  for (auto& v : b) v = std::min<std::uint32_t>(v, 15);
  if (std::all_of(b.begin(), b.end(), [](std::uint32_t v) { return v == 15; })) {
    return tadk::hist::Category::AllOverflow;
  }
  const std::set<std::uint32_t> distinct(b.begin(), b.end());
  if (distinct.size() == b.size()) return tadk::hist::Category::AllDistinctBins;
  if (distinct.size() == 1) return tadk::hist::Category::AllOneBin;
  return tadk::hist::Category::Random;
}

// ---- tokenizer ---------------------------------------------------------------

inline bool byte_matches(const tadk::dfa::ByteSet& set, std::uint8_t c, bool nocase) {
  if (set.test(c)) return true;
  if (!nocase) return false;
  if (c >= 'a' && c <= 'z') return set.test(c - 32);
  if (c >= 'A' && c <= 'Z') return set.test(c + 32);
  return false;
}

// Every end position p can reach from `start`.
inline std::set<std::size_t> ends(const tadk::dfa::Pattern& p, std::string_view in, std::size_t start,
                                  bool nocase) {
  using K = tadk::dfa::Pattern::Kind;
  switch (p.kind) {
    case K::Bytes:
      if (start < in.size() && byte_matches(p.set, static_cast<std::uint8_t>(in[start]), nocase)) {
        return {start + 1};
      }
      return {};
    case K::Concat: {
      std::set<std::size_t> cur{start};
      for (const auto& c : p.children) {
        std::set<std::size_t> next;
        for (auto s : cur) {
          auto e = ends(c, in, s, nocase);
          next.insert(e.begin(), e.end());
        }
        cur = std::move(next);
      }
      return cur;
    }
    case K::Alt: {
      std::set<std::size_t> out;
      for (const auto& c : p.children) {
        auto e = ends(c, in, start, nocase);
        out.insert(e.begin(), e.end());
      }
      return out;
    }
    case K::Optional: {
      auto out = ends(p.children[0], in, start, nocase);
      out.insert(start);
      return out;
    }
    case K::Star:
    case K::Plus: {
      std::set<std::size_t> out;
      std::vector<std::size_t> work{start};
      std::set<std::size_t> seen{start};
      while (!work.empty()) {
        const auto s = work.back();
        work.pop_back();
        for (auto e : ends(p.children[0], in, s, nocase)) {
          out.insert(e);
          if (seen.insert(e).second) work.push_back(e);
        }
      }
      if (p.kind == K::Star) out.insert(start);
      return out;
    }
  }
  return {};
}

struct NaiveResult {
  std::vector<tadk::dfa::Token> tokens;
  std::size_t unmatched = 0;
  std::size_t skipped = 0;
};

// Leftmost-longest: at each position try every rule, keep the longest
// non-empty match, earlier rule on a tie.
inline NaiveResult naive_tokenize(const std::vector<tadk::dfa::Rule>& rules, std::string_view in) {
  NaiveResult r;
  std::size_t pos = 0;
  while (pos < in.size()) {
    std::size_t best_end = pos;
    std::size_t best_rule = rules.size();
    for (std::size_t k = 0; k < rules.size(); ++k) {
      const auto e = ends(rules[k].pattern, in, pos, rules[k].nocase);
      if (e.empty()) continue;
      const auto longest = *e.rbegin();
      if (longest > best_end) {
        best_end = longest;
        best_rule = k;
      }
    }
    if (best_rule == rules.size()) {
      ++r.unmatched;
      ++pos;
      continue;
    }
    if (rules[best_rule].skip) {
      r.skipped += best_end - pos;
    } else {
      std::uint32_t id = 0;
      for (std::size_t k = 0; k < best_rule; ++k) id += !rules[k].skip;
      r.tokens.push_back({id, static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(best_end)});
    }
    pos = best_end;
  }
  return r;
}

// Random patterns over a small alphabet, returned together with their
// profile-syntax spelling so the parser is exercised as well.
struct RandomPattern {
  tadk::dfa::Pattern ast;
  std::string text;
};

inline constexpr std::string_view kAlphabet = "abC1 ;";

inline RandomPattern random_pattern(std::mt19937_64& rng, int depth) {
  using tadk::dfa::ByteSet;
  using tadk::dfa::Pattern;
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 5);
  const int what = pick(rng);
  auto letter = [&] { return kAlphabet[std::uniform_int_distribution<std::size_t>(0, kAlphabet.size() - 1)(rng)]; };
  if (what == 0) {
    const char c = letter();
    ByteSet s;
    s.set(static_cast<std::uint8_t>(c));
    return {Pattern::bytes(s), std::string("\"") + c + "\""};
  }
  if (what == 1) {
    ByteSet s;
    std::string text = "[";
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < n; ++i) {
      const char c = letter();
      if (s.test(static_cast<std::uint8_t>(c))) continue;
      s.set(static_cast<std::uint8_t>(c));
      text += c;
    }
    return {Pattern::bytes(s), text + "]"};
  }
  if (what == 2 || what == 3) {
    const int n = std::uniform_int_distribution<int>(2, 3)(rng);
    std::vector<Pattern> parts;
    std::string text = "(";
    for (int i = 0; i < n; ++i) {
      auto sub = random_pattern(rng, depth - 1);
      if (i > 0) text += what == 2 ? " " : "|";
      text += sub.text;
      parts.push_back(std::move(sub.ast));
    }
    text += ")";
    return {what == 2 ? Pattern::concat(std::move(parts)) : Pattern::alt(std::move(parts)), text};
  }
  auto sub = random_pattern(rng, depth - 1);
  static constexpr Pattern::Kind kinds[] = {Pattern::Kind::Star, Pattern::Kind::Plus, Pattern::Kind::Optional};
  static constexpr char ops[] = {'*', '+', '?'};
  const int k = std::uniform_int_distribution<int>(0, 2)(rng);
  return {Pattern::repeat(kinds[k], std::move(sub.ast)), "(" + sub.text + ")" + ops[k]};
}

struct RandomProfile {
  std::vector<tadk::dfa::Rule> rules;  // oracle view
  std::string text;                    // what the library parses
};

inline RandomProfile random_profile(std::mt19937_64& rng, std::size_t max_rules = 8) {
  RandomProfile out;
  const auto n = std::uniform_int_distribution<std::size_t>(1, max_rules)(rng);
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < n; ++i) {
    RandomPattern p;
    do {
      p = random_pattern(rng, 3);
    } while (ends(p.ast, "", 0, false).count(0) > 0);  // nullable
    tadk::dfa::Rule r;
    r.skip = i > 0 && std::bernoulli_distribution(0.15)(rng);
    r.nocase = std::bernoulli_distribution(0.3)(rng);
    r.pattern = p.ast;
    if (!r.skip) r.name = "T" + std::to_string(tokens++);
    out.text += r.skip ? "skip " + p.text : "token " + r.name + " = " + p.text;
    out.text += r.nocase ? " nocase\n" : "\n";
    out.rules.push_back(std::move(r));
  }
  return out;
}

inline std::string random_input(std::mt19937_64& rng, std::size_t max_len) {
  static constexpr std::string_view extra = "abcABC1 ;xZ";
  const auto n = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    s += extra[std::uniform_int_distribution<std::size_t>(0, extra.size() - 1)(rng)];
  }
  return s;
}

// ---- forest ------------------------------------------------------------------

// Walks every tree by hand and averages the leaf class frequencies.
inline std::pair<std::uint32_t, std::vector<double>> forest_vote(const tadk::rf::Model& m,
                                                                 std::span<const double> x) {
  std::vector<double> probs(m.classes.size(), 0.0);
  for (const auto& t : m.trees) {
    std::size_t i = 0;
    while (t.nodes[i].feature != tadk::rf::leaf_marker) {
      const auto& n = t.nodes[i];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    double total = 0;
    for (auto c : t.nodes[i].counts) total += c;
    for (std::size_t c = 0; c < probs.size(); ++c) probs[c] += t.nodes[i].counts[c] / total;
  }
  for (auto& p : probs) p /= static_cast<double>(m.trees.size());
  std::uint32_t best = 0;
  for (std::uint32_t c = 1; c < probs.size(); ++c) {
    if (probs[c] > probs[best]) best = c;
  }
  return {best, probs};
}

// ---- golden files ------------------------------------------------------------

struct GoldenStream {
  std::string profile;
  std::string input;
  std::string stream;  // "NAME@start:end ..."
};

inline std::vector<GoldenStream> golden_streams(const std::filesystem::path& file) {
  std::vector<GoldenStream> out;
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    out.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)});
  }
  return out;
}

inline std::string stream_string(const tadk::dfa::DfaTable& table, const std::vector<tadk::dfa::Token>& tokens) {
  std::string s;
  for (const auto& t : tokens) {
    if (!s.empty()) s += ' ';
    s += table.token_names[t.id] + "@" + std::to_string(t.start) + ":" + std::to_string(t.end);
  }
  return s;
}

// ---- misc --------------------------------------------------------------------

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tadk-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
