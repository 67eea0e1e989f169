#include "tadk/dfa.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <fstream>
#include <iterator>
#include <map>

#include "tadk/error.hpp"

namespace tadk::dfa {
namespace {

constexpr std::uint32_t kFormatVersion = 1;

// Bytes that every pattern set treats alike share one column class.
struct ByteClasses {
  std::array<std::uint16_t, 256> of{};
  std::vector<std::uint8_t> representative;
};

void collect_sets(const Pattern& p, std::vector<ByteSet>& out) {
  if (p.kind == Pattern::Kind::Bytes) out.push_back(p.set);
  for (const auto& c : p.children) collect_sets(c, out);
}

ByteClasses byte_classes(const std::vector<Pattern>& patterns) {
  std::vector<ByteSet> sets;
  for (const auto& p : patterns) collect_sets(p, sets);
  std::map<std::vector<bool>, std::uint16_t> ids;
  ByteClasses bc;
  for (int b = 0; b < 256; ++b) {
    std::vector<bool> sig(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) sig[i] = sets[i].test(static_cast<std::size_t>(b));
    auto [it, fresh] = ids.emplace(std::move(sig), static_cast<std::uint16_t>(ids.size()));
    if (fresh) bc.representative.push_back(static_cast<std::uint8_t>(b));
    bc.of[static_cast<std::size_t>(b)] = it->second;
  }
  return bc;
}

// Thompson NFA: each state has epsilon edges and at most one byte edge.
struct Nfa {
  struct State {
    std::vector<std::uint32_t> eps;
    ByteSet on;
    std::uint32_t to = 0;
    bool has_edge = false;
  };
  std::vector<State> states;
  std::vector<std::uint32_t> rule_of;  // accepting rule index or no_accept

  std::uint32_t add() {
    states.emplace_back();
    rule_of.push_back(DfaTable::no_accept);
    return static_cast<std::uint32_t>(states.size() - 1);
  }

  struct Frag {
    std::uint32_t in;
    std::uint32_t out;
  };

  Frag build(const Pattern& p) {
    using K = Pattern::Kind;
    switch (p.kind) {
      case K::Bytes: {
        const auto a = add();
        const auto b = add();
        states[a].on = p.set;
        states[a].to = b;
        states[a].has_edge = true;
        return {a, b};
      }
      case K::Concat: {
        const auto a = add();
        std::uint32_t tail = a;
        for (const auto& c : p.children) {
          const Frag f = build(c);
          states[tail].eps.push_back(f.in);
          tail = f.out;
        }
        return {a, tail};
      }
      case K::Alt: {
        const auto a = add();
        const auto b = add();
        for (const auto& c : p.children) {
          const Frag f = build(c);
          states[a].eps.push_back(f.in);
          states[f.out].eps.push_back(b);
        }
        return {a, b};
      }
      case K::Star:
      case K::Plus:
      case K::Optional: {
        const auto a = add();
        const auto b = add();
        const Frag f = build(p.children.front());
        states[a].eps.push_back(f.in);
        states[f.out].eps.push_back(b);
        if (p.kind != K::Plus) states[a].eps.push_back(b);
        if (p.kind != K::Optional) states[f.out].eps.push_back(f.in);
        return {a, b};
      }
    }
    return {0, 0};
  }
};

using StateSet = std::vector<std::uint32_t>;

void closure(const Nfa& nfa, StateSet& set, std::vector<std::uint8_t>& mark) {
  std::vector<std::uint32_t> stack(set.begin(), set.end());
  for (auto s : set) mark[s] = 1;
  while (!stack.empty()) {
    const auto s = stack.back();
    stack.pop_back();
    for (auto t : nfa.states[s].eps) {
      if (!mark[t]) {
        mark[t] = 1;
        set.push_back(t);
        stack.push_back(t);
      }
    }
  }
  for (auto s : set) mark[s] = 0;
  std::sort(set.begin(), set.end());
}

struct RawDfa {
  std::size_t classes = 0;
  std::vector<std::uint32_t> next;  // state * classes + class
  std::vector<std::uint32_t> tag;   // output tag per state
  std::uint32_t initial = 0;
  std::uint32_t dead = 0;
  std::size_t size() const { return tag.size(); }
};

RawDfa subset_construction(const Nfa& nfa, std::uint32_t start, const ByteClasses& bc,
                           const std::vector<std::uint32_t>& rule_tag, std::uint32_t max_states) {
  RawDfa d;
  d.classes = bc.representative.size();
  std::map<StateSet, std::uint32_t> ids;
  std::vector<StateSet> sets;
  std::vector<std::uint8_t> mark(nfa.states.size(), 0);

  auto intern = [&](StateSet s) -> std::uint32_t {
    auto it = ids.find(s);
    if (it != ids.end()) return it->second;
    if (sets.size() >= max_states) {
      throw Error(Errc::StateBlowup,
                  "DFA exceeds " + std::to_string(max_states) + " states during construction");
    }
    const auto id = static_cast<std::uint32_t>(sets.size());
    std::uint32_t best = DfaTable::no_accept;
    for (auto n : s) best = std::min(best, nfa.rule_of[n]);
    d.tag.push_back(best == DfaTable::no_accept ? DfaTable::no_accept : rule_tag[best]);
    ids.emplace(s, id);
    sets.push_back(std::move(s));
    return id;
  };

  d.dead = intern({});
  StateSet init{start};
  closure(nfa, init, mark);
  d.initial = intern(std::move(init));

  for (std::uint32_t cur = 0; cur < sets.size(); ++cur) {
    d.next.resize((cur + 1) * d.classes);
    for (std::size_t c = 0; c < d.classes; ++c) {
      const std::uint8_t byte = bc.representative[c];
      StateSet moved;
      for (auto s : sets[cur]) {
        const auto& st = nfa.states[s];
        if (st.has_edge && st.on.test(byte) && !mark[st.to]) {
          mark[st.to] = 1;
          moved.push_back(st.to);
        }
      }
      for (auto s : moved) mark[s] = 0;
      closure(nfa, moved, mark);
      const auto target = intern(std::move(moved));
      d.next[cur * d.classes + c] = target;
    }
  }
  return d;
}

// Hopcroft partition refinement; the initial partition groups states by
// output tag so distinct tokens never merge.
std::vector<std::uint32_t> hopcroft(const RawDfa& d) {
  const std::size_t n = d.size();
  const std::size_t k = d.classes;

  std::vector<std::vector<std::vector<std::uint32_t>>> inverse(
      k, std::vector<std::vector<std::uint32_t>>(n));
  for (std::uint32_t s = 0; s < n; ++s) {
    for (std::size_t c = 0; c < k; ++c) inverse[c][d.next[s * k + c]].push_back(s);
  }

  std::vector<std::uint32_t> block_of(n);
  std::vector<std::vector<std::uint32_t>> blocks;
  {
    std::map<std::uint32_t, std::uint32_t> by_tag;
    for (std::uint32_t s = 0; s < n; ++s) {
      auto [it, fresh] = by_tag.emplace(d.tag[s], static_cast<std::uint32_t>(blocks.size()));
      if (fresh) blocks.emplace_back();
      blocks[it->second].push_back(s);
      block_of[s] = it->second;
    }
  }

  std::deque<std::uint32_t> work;
  std::vector<std::uint8_t> queued(blocks.size(), 1);
  for (std::uint32_t b = 0; b < blocks.size(); ++b) work.push_back(b);

  std::vector<std::uint32_t> hits(n, 0);
  std::vector<std::uint8_t> in_x(n, 0);
  while (!work.empty()) {
    const auto a = work.front();
    work.pop_front();
    queued[a] = 0;
    const std::vector<std::uint32_t> splitter = blocks[a];
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::uint32_t> x;
      for (auto t : splitter) {
        for (auto s : inverse[c][t]) {
          if (!in_x[s]) {
            in_x[s] = 1;
            x.push_back(s);
          }
        }
      }
      std::vector<std::uint32_t> touched;
      for (auto s : x) {
        if (hits[block_of[s]]++ == 0) touched.push_back(block_of[s]);
      }
      for (auto y : touched) {
        if (hits[y] < blocks[y].size()) {
          std::vector<std::uint32_t> inside, outside;
          for (auto s : blocks[y]) (in_x[s] ? inside : outside).push_back(s);
          const auto z = static_cast<std::uint32_t>(blocks.size());
          blocks[y] = std::move(inside);
          blocks.push_back(std::move(outside));
          queued.push_back(0);
          hits.push_back(0);
          for (auto s : blocks[z]) block_of[s] = z;
          if (queued[y]) {
            work.push_back(z);
            queued[z] = 1;
          } else {
            const auto smaller = blocks[y].size() <= blocks[z].size() ? y : z;
            work.push_back(smaller);
            queued[smaller] = 1;
          }
        }
        hits[y] = 0;
      }
      for (auto s : x) in_x[s] = 0;
    }
  }
  return block_of;
}

}  // namespace

DfaTable compile(const Profile& profile, CompileOptions opts) {
  if (profile.token_count() == 0) throw Error(Errc::SyntaxError, "profile defines no token rules");

  std::vector<Pattern> patterns;
  std::vector<std::uint32_t> rule_tag;
  DfaTable table;
  for (const auto& rule : profile.rules) {
    if (rule.pattern.nullable()) {
      throw Error(Errc::EmptyPattern, "rule on line " + std::to_string(rule.line) +
                                          " matches the empty string");
    }
    patterns.push_back(rule.nocase ? rule.pattern.folded() : rule.pattern);
    if (rule.skip) {
      rule_tag.push_back(DfaTable::skip_accept);
    } else {
      rule_tag.push_back(static_cast<std::uint32_t>(table.token_names.size()));
      table.token_names.push_back(rule.name);
    }
  }

  const ByteClasses bc = byte_classes(patterns);
  Nfa nfa;
  const auto start = nfa.add();
  for (std::size_t r = 0; r < patterns.size(); ++r) {
    const auto frag = nfa.build(patterns[r]);
    nfa.states[start].eps.push_back(frag.in);
    nfa.rule_of[frag.out] = static_cast<std::uint32_t>(r);
  }

  const RawDfa raw = subset_construction(nfa, start, bc, rule_tag, opts.max_states);
  const auto block_of = hopcroft(raw);

  // Renumber blocks: dead first, initial second, the rest in BFS order.
  constexpr std::uint32_t unset = 0xffffffffu;
  std::size_t block_count = 0;
  for (auto b : block_of) block_count = std::max<std::size_t>(block_count, b + 1);
  std::vector<std::uint32_t> rep(block_count, unset);
  for (std::uint32_t s = 0; s < raw.size(); ++s) {
    if (rep[block_of[s]] == unset) rep[block_of[s]] = s;
  }
  std::vector<std::uint32_t> new_id(block_count, unset);
  std::vector<std::uint32_t> order;
  auto visit = [&](std::uint32_t block) {
    if (new_id[block] == unset) {
      new_id[block] = static_cast<std::uint32_t>(order.size());
      order.push_back(block);
    }
  };
  visit(block_of[raw.dead]);
  visit(block_of[raw.initial]);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto s = rep[order[i]];
    for (int b = 0; b < 256; ++b) {
      visit(block_of[raw.next[s * raw.classes + bc.of[static_cast<std::size_t>(b)]]]);
    }
  }

  table.state_count = static_cast<std::uint32_t>(order.size());
  table.dead = 0;
  table.initial = 1;
  table.transitions.resize(std::size_t{table.state_count} * 256);
  table.accept.resize(table.state_count);
  for (std::uint32_t i = 0; i < table.state_count; ++i) {
    const auto s = rep[order[i]];
    table.accept[i] = raw.tag[s];
    for (int b = 0; b < 256; ++b) {
      const auto t = raw.next[s * raw.classes + bc.of[static_cast<std::size_t>(b)]];
      table.transitions[std::size_t{i} * 256 + static_cast<std::size_t>(b)] = new_id[block_of[t]];
    }
  }
  return table;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(Errc::TruncatedHeader, "DFA table is truncated");
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> dump_table(const DfaTable& table) {
  std::vector<std::uint8_t> out{'T', 'D', 'F', 'A'};
  put_u32(out, kFormatVersion);
  put_u32(out, table.state_count);
  put_u32(out, static_cast<std::uint32_t>(table.token_names.size()));
  put_u32(out, table.initial);
  put_u32(out, table.dead);
  for (auto t : table.transitions) put_u32(out, t);
  for (auto a : table.accept) put_u32(out, a);
  for (const auto& name : table.token_names) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
  }
  return out;
}

DfaTable load_table(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4, "TDFA")) {
    throw Error(Errc::BadMagic, "not a TDFA table");
  }
  Cursor cur(bytes.subspan(4));
  if (const auto v = cur.u32(); v != kFormatVersion) {
    throw Error(Errc::VersionMismatch, "unsupported DFA table version " + std::to_string(v));
  }
  DfaTable t;
  t.state_count = cur.u32();
  const auto tokens = cur.u32();
  t.initial = cur.u32();
  t.dead = cur.u32();
  if (t.state_count < 2 || t.initial >= t.state_count || t.dead >= t.state_count) {
    throw Error(Errc::InvalidArgs, "DFA table header is inconsistent");
  }
  cur.need((std::size_t{t.state_count} * 257) * 4);
  t.transitions.resize(std::size_t{t.state_count} * 256);
  for (auto& x : t.transitions) x = cur.u32();
  t.accept.resize(t.state_count);
  for (auto& x : t.accept) x = cur.u32();
  for (std::uint32_t i = 0; i < tokens; ++i) t.token_names.push_back(cur.str(cur.u32()));
  if (!cur.done()) throw Error(Errc::InvalidArgs, "trailing bytes after DFA table");

  for (auto x : t.transitions) {
    if (x >= t.state_count) throw Error(Errc::InvalidArgs, "transition to unknown state");
  }
  for (auto a : t.accept) {
    if (a != DfaTable::no_accept && a != DfaTable::skip_accept && a >= tokens) {
      throw Error(Errc::InvalidArgs, "accept entry names unknown token");
    }
  }
  for (int b = 0; b < 256; ++b) {
    if (t.next(t.dead, static_cast<std::uint8_t>(b)) != t.dead) {
      throw Error(Errc::InvalidArgs, "dead state does not self-loop");
    }
  }
  if (t.accept[t.initial] != DfaTable::no_accept || t.accept[t.dead] != DfaTable::no_accept) {
    throw Error(Errc::InvalidArgs, "initial or dead state accepts");
  }
  return t;
}

void save_table(const std::filesystem::path& path, const DfaTable& table) {
  const auto bytes = dump_table(table);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

DfaTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return load_table(std::span<const std::uint8_t>(bytes));
}

TokenStream tokenize(const DfaTable& table, std::span<const std::uint8_t> input) {
  TokenStream out;
  out.stats = scan(table, input, [&](SpanKind kind, std::size_t start, std::size_t end, std::uint32_t id) {
    if (kind == SpanKind::Token) {
      out.tokens.push_back({id, static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(end)});
    }
  });
  return out;
}

TokenStream tokenize(const DfaTable& table, std::string_view input) {
  return tokenize(table, std::span<const std::uint8_t>(
                             reinterpret_cast<const std::uint8_t*>(input.data()), input.size()));
}

std::vector<double> token_histogram(const TokenStream& stream, std::size_t token_count) {
  std::vector<double> h(token_count + 2, 0.0);
  for (const auto& t : stream.tokens) {
    if (t.id < token_count) h[t.id] += 1.0;
  }
  h[token_count] = static_cast<double>(stream.tokens.size());
  h[token_count + 1] = static_cast<double>(stream.stats.unmatched);
  return h;
}

std::string url_decode(std::string_view text) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '+') {
      out.push_back(' ');
    } else if (c == '%' && i + 2 < text.size() && hex(text[i + 1]) >= 0 && hex(text[i + 2]) >= 0) {
      out.push_back(static_cast<char>(hex(text[i + 1]) * 16 + hex(text[i + 2])));
      i += 2;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace tadk::dfa
