#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tadk/profile.hpp"

namespace tadk::dfa {

/// Dense transition table: state x 256 input bytes -> state, plus the
/// accept table. State `dead` self-loops on every byte; neither `initial`
/// nor `dead` accepts.
struct DfaTable {
  static constexpr std::uint32_t no_accept = 0xffffffffu;
  static constexpr std::uint32_t skip_accept = 0xfffffffeu;

  std::uint32_t state_count = 0;
  std::uint32_t initial = 0;
  std::uint32_t dead = 0;
  std::vector<std::uint32_t> transitions;  // row-major, state * 256 + byte
  std::vector<std::uint32_t> accept;       // token id, skip_accept or no_accept
  std::vector<std::string> token_names;

  std::uint32_t next(std::uint32_t state, std::uint8_t byte) const {
    return transitions[std::size_t{state} * 256 + byte];
  }
  std::size_t token_count() const noexcept { return token_names.size(); }

  bool operator==(const DfaTable&) const = default;
};

struct CompileOptions {
  std::uint32_t max_states = 65536;
};

/// Profile -> Thompson NFA -> subset construction -> Hopcroft minimization
/// -> dense table. Accepting states carry the earliest-declared matching
/// rule. Throws StateBlowup.
DfaTable compile(const Profile& profile, CompileOptions opts = {});

/// Binary table dump: "TDFA", u32 version, state count, token count,
/// initial, dead; u32 transitions (row-major); u32 accept table; token
/// names as u32 length + bytes. Little-endian.
std::vector<std::uint8_t> dump_table(const DfaTable& table);
DfaTable load_table(std::span<const std::uint8_t> bytes);
void save_table(const std::filesystem::path& path, const DfaTable& table);
DfaTable load_table(const std::filesystem::path& path);

struct Token {
  std::uint32_t id = 0;
  std::uint32_t start = 0;
  std::uint32_t end = 0;  // exclusive

  std::string_view lexeme(std::string_view input) const {
    return input.substr(start, end - start);
  }
  bool operator==(const Token&) const = default;
};

enum class SpanKind : std::uint8_t { Token, Skip, Unmatched };

struct ScanStats {
  std::size_t lookups = 0;    // transition-table reads
  std::size_t unmatched = 0;  // bytes no rule could start a match on
  std::size_t skipped = 0;    // bytes consumed by skip rules
};

/// Maximal-munch scan. The inner loop is one table read per byte; the
/// engine remembers the last accepting state, and on reaching the dead
/// state (or end of input) emits that match and restarts from the initial
/// state right after it. With no match at all one byte is reported as
/// unmatched. `on_span(kind, start, end, token_id)` sees every span in
/// input order, so the spans tile the input.
template <class OnSpan>
ScanStats scan(const DfaTable& table, std::span<const std::uint8_t> input, OnSpan&& on_span) {
  ScanStats stats;
  const std::uint32_t* T = table.transitions.data();
  const std::uint32_t* A = table.accept.data();
  const std::size_t n = input.size();
  std::size_t pos = 0;
  while (pos < n) {
    std::uint32_t s = table.initial;
    std::uint32_t last_accept = DfaTable::no_accept;
    std::size_t last_end = pos;
    for (std::size_t i = pos; i < n; ++i) {
      s = T[std::size_t{s} * 256 + input[i]];
      ++stats.lookups;
      if (s == table.dead) break;
      if (A[s] != DfaTable::no_accept) {
        last_accept = A[s];
        last_end = i + 1;
      }
    }
    if (last_accept == DfaTable::no_accept) {
      ++stats.unmatched;
      on_span(SpanKind::Unmatched, pos, pos + 1, DfaTable::no_accept);
      ++pos;
    } else if (last_accept == DfaTable::skip_accept) {
      stats.skipped += last_end - pos;
      on_span(SpanKind::Skip, pos, last_end, last_accept);
      pos = last_end;
    } else {
      on_span(SpanKind::Token, pos, last_end, last_accept);
      pos = last_end;
    }
  }
  return stats;
}

struct TokenStream {
  std::vector<Token> tokens;
  ScanStats stats;
};

TokenStream tokenize(const DfaTable& table, std::span<const std::uint8_t> input);
TokenStream tokenize(const DfaTable& table, std::string_view input);

/// Counts per token id, then the token total, then unmatched bytes
/// (length token_count + 2).
std::vector<double> token_histogram(const TokenStream& stream, std::size_t token_count);

/// %XX -> byte and '+' -> space; malformed escapes are kept verbatim.
std::string url_decode(std::string_view text);

/// Text of a profile shipped with the library ("sqli", "xss"); empty when
/// the name is unknown.
std::string_view bundled_profile_text(std::string_view name);

}  // namespace tadk::dfa
