#pragma once

#include <bitset>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tadk::dfa {

using ByteSet = std::bitset<256>;

/// Adds the other-case letter for every ASCII letter in the set.
ByteSet fold_case(const ByteSet& set);

/// Pattern syntax tree. `Bytes` matches one byte from `set`; `Concat` with
/// no children matches the empty string.
struct Pattern {
  enum class Kind { Bytes, Concat, Alt, Star, Plus, Optional };

  Kind kind = Kind::Concat;
  ByteSet set;
  std::vector<Pattern> children;

  static Pattern bytes(const ByteSet& set);
  static Pattern concat(std::vector<Pattern> parts);
  static Pattern alt(std::vector<Pattern> parts);
  static Pattern repeat(Kind kind, Pattern inner);

  bool nullable() const;
  /// Copy with every byte set case-folded.
  Pattern folded() const;
};

struct Rule {
  std::string name;  // empty for skip rules
  Pattern pattern;
  bool nocase = false;
  bool skip = false;
  std::size_t line = 0;
};

/// Parsed profile. Rules keep declaration order, which is also their
/// priority: on equal-length matches the earlier rule wins.
///
/// Grammar (one statement per line, '#' starts a comment line):
///   set NAME = [chars]
///   token NAME = PATTERN [nocase]
///   skip PATTERN [nocase]
/// PATTERN is built from "literals", [classes] (ranges, ^ negation,
/// \n \r \t \xHH escapes), set names, '.', juxtaposition, '|', postfix
/// + * ?, and ( ) grouping.
struct Profile {
  std::map<std::string, ByteSet, std::less<>> sets;
  std::vector<Rule> rules;

  std::vector<std::string> token_names() const;
  std::size_t token_count() const;
};

/// Throws Error with SyntaxError (message carries line:column),
/// DuplicateToken or EmptyPattern.
Profile parse_profile(std::string_view text);

}  // namespace tadk::dfa
