#include "tadk/profile.hpp"

#include <cctype>
#include <set>

#include "tadk/error.hpp"

namespace tadk::dfa {

ByteSet fold_case(const ByteSet& set) {
  ByteSet out = set;
  for (int c = 'a'; c <= 'z'; ++c) {
    const int upper = c - 'a' + 'A';
    if (set.test(static_cast<std::size_t>(c)) || set.test(static_cast<std::size_t>(upper))) {
      out.set(static_cast<std::size_t>(c));
      out.set(static_cast<std::size_t>(upper));
    }
  }
  return out;
}

Pattern Pattern::bytes(const ByteSet& set) {
  Pattern p;
  p.kind = Kind::Bytes;
  p.set = set;
  return p;
}

Pattern Pattern::concat(std::vector<Pattern> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  Pattern p;
  p.kind = Kind::Concat;
  p.children = std::move(parts);
  return p;
}

Pattern Pattern::alt(std::vector<Pattern> parts) {
  if (parts.size() == 1) return std::move(parts.front());
  Pattern p;
  p.kind = Kind::Alt;
  p.children = std::move(parts);
  return p;
}

Pattern Pattern::repeat(Kind kind, Pattern inner) {
  Pattern p;
  p.kind = kind;
  p.children.push_back(std::move(inner));
  return p;
}

bool Pattern::nullable() const {
  switch (kind) {
    case Kind::Bytes: return false;
    case Kind::Concat:
      for (const auto& c : children) {
        if (!c.nullable()) return false;
      }
      return true;
    case Kind::Alt:
      for (const auto& c : children) {
        if (c.nullable()) return true;
      }
      return false;
    case Kind::Star:
    case Kind::Optional: return true;
    case Kind::Plus: return children.front().nullable();
  }
  return false;
}

Pattern Pattern::folded() const {
  Pattern p = *this;
  if (p.kind == Kind::Bytes) p.set = fold_case(p.set);
  for (auto& c : p.children) c = c.folded();
  return p;
}

std::vector<std::string> Profile::token_names() const {
  std::vector<std::string> names;
  for (const auto& r : rules) {
    if (!r.skip) names.push_back(r.name);
  }
  return names;
}

std::size_t Profile::token_count() const {
  std::size_t n = 0;
  for (const auto& r : rules) n += r.skip ? 0 : 1;
  return n;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no, const Profile& profile)
      : text_(line), line_no_(line_no), profile_(profile) {}

  [[noreturn]] void fail(const std::string& msg, Errc code = Errc::SyntaxError) const {
    throw Error(code, std::to_string(line_no_) + ":" + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    skip_ws();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) fail("expected a name");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  // Only a trailing "nocase" counts as the flag.
  bool consume_nocase_suffix() {
    skip_ws();
    constexpr std::string_view kw = "nocase";
    if (text_.substr(pos_, kw.size()) != kw) return false;
    std::size_t after = pos_ + kw.size();
    if (after < text_.size() && ident_char(text_[after])) return false;
    while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
    if (after != text_.size()) return false;
    pos_ = text_.size();
    return true;
  }

  std::uint8_t escape() {
    // pos_ is just past the backslash.
    if (pos_ >= text_.size()) fail("dangling escape");
    const char c = text_[pos_++];
    switch (c) {
      case 'n': return '\n';
      case 'r': return '\r';
      case 't': return '\t';
      case '0': return 0;
      case 'x': {
        auto hex = [this](char h) -> int {
          if (h >= '0' && h <= '9') return h - '0';
          if (h >= 'a' && h <= 'f') return h - 'a' + 10;
          if (h >= 'A' && h <= 'F') return h - 'A' + 10;
          fail("bad hex escape");
        };
        if (pos_ + 2 > text_.size()) fail("bad hex escape");
        const int v = hex(text_[pos_]) * 16 + hex(text_[pos_ + 1]);
        pos_ += 2;
        return static_cast<std::uint8_t>(v);
      }
      default: return static_cast<std::uint8_t>(c);
    }
  }

  ByteSet char_class() {
    expect('[');
    bool negate = false;
    if (pos_ < text_.size() && text_[pos_] == '^') {
      negate = true;
      ++pos_;
    }
    ByteSet set;
    auto one = [this]() -> std::uint8_t {
      if (pos_ >= text_.size()) fail("unterminated character class");
      const char c = text_[pos_++];
      if (c == '\\') return escape();
      return static_cast<std::uint8_t>(c);
    };
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated character class");
      if (text_[pos_] == ']') {
        ++pos_;
        break;
      }
      const std::uint8_t lo = one();
      std::uint8_t hi = lo;
      if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] != ']') {
        ++pos_;
        hi = one();
        if (hi < lo) fail("reversed range in character class");
      }
      for (int b = lo; b <= hi; ++b) set.set(static_cast<std::size_t>(b));
    }
    if (negate) set.flip();
    if (set.none()) fail("empty character class");
    return set;
  }

  Pattern literal() {
    expect('"');
    std::vector<Pattern> parts;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated string literal");
      const char c = text_[pos_++];
      if (c == '"') break;
      const std::uint8_t b = c == '\\' ? escape() : static_cast<std::uint8_t>(c);
      ByteSet set;
      set.set(b);
      parts.push_back(Pattern::bytes(set));
    }
    if (parts.empty()) fail("empty string literal", Errc::EmptyPattern);
    return Pattern::concat(std::move(parts));
  }

  Pattern atom() {
    const char c = peek();
    if (c == '"') return literal();
    if (c == '[') return Pattern::bytes(char_class());
    if (c == '.') {
      ++pos_;
      return Pattern::bytes(ByteSet().set());
    }
    if (c == '(') {
      ++pos_;
      Pattern inner = alternation();
      expect(')');
      return inner;
    }
    if (ident_start(c)) {
      const std::size_t at = pos_;
      const std::string name = ident();
      const auto it = profile_.sets.find(name);
      if (it == profile_.sets.end()) {
        pos_ = at;
        fail("unknown set '" + name + "'");
      }
      return Pattern::bytes(it->second);
    }
    if (c == '\0') fail("expected a pattern");
    fail(std::string("unexpected '") + c + "'");
  }

  Pattern postfix() {
    Pattern p = atom();
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '+') {
        p = Pattern::repeat(Pattern::Kind::Plus, std::move(p));
      } else if (c == '*') {
        p = Pattern::repeat(Pattern::Kind::Star, std::move(p));
      } else if (c == '?') {
        p = Pattern::repeat(Pattern::Kind::Optional, std::move(p));
      } else {
        break;
      }
      ++pos_;
    }
    return p;
  }

  bool concat_continues() {
    const std::size_t save = pos_;
    if (at_end()) return false;
    const char c = peek();
    if (c == '|' || c == ')') return false;
    const bool is_flag = consume_nocase_suffix();
    pos_ = save;
    return !is_flag;
  }

  Pattern concatenation() {
    std::vector<Pattern> parts;
    parts.push_back(postfix());
    while (concat_continues()) parts.push_back(postfix());
    return Pattern::concat(std::move(parts));
  }

  Pattern alternation() {
    std::vector<Pattern> parts;
    parts.push_back(concatenation());
    while (peek() == '|') {
      ++pos_;
      parts.push_back(concatenation());
    }
    return Pattern::alt(std::move(parts));
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
  const Profile& profile_;
};

}  // namespace

Profile parse_profile(std::string_view text) {
  Profile profile;
  std::set<std::string, std::less<>> token_names;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

    LineParser p(line, line_no, profile);
    if (p.at_end() || p.peek() == '#') continue;
    const std::string keyword = p.ident();
    if (keyword == "set") {
      const std::string name = p.ident();
      if (name == "nocase") p.fail("'nocase' is reserved");
      if (profile.sets.contains(name)) p.fail("duplicate set '" + name + "'");
      p.expect('=');
      const ByteSet set = p.char_class();
      if (!p.at_end()) p.fail("trailing input after set definition");
      profile.sets.emplace(name, set);
    } else if (keyword == "token" || keyword == "skip") {
      Rule rule;
      rule.line = line_no;
      rule.skip = keyword == "skip";
      if (!rule.skip) {
        rule.name = p.ident();
        if (token_names.contains(rule.name)) {
          p.fail("duplicate token '" + rule.name + "'", Errc::DuplicateToken);
        }
        p.expect('=');
      }
      rule.pattern = p.alternation();
      rule.nocase = p.consume_nocase_suffix();
      if (!p.at_end()) p.fail("trailing input after pattern");
      if (rule.pattern.nullable()) p.fail("pattern matches the empty string", Errc::EmptyPattern);
      if (!rule.skip) token_names.insert(rule.name);
      profile.rules.push_back(std::move(rule));
    } else {
      throw Error(Errc::SyntaxError,
                  std::to_string(line_no) + ":1: unknown statement '" + keyword + "'");
    }
  }
  if (profile.token_count() == 0) {
    throw Error(Errc::SyntaxError, "profile defines no token rules");
  }
  return profile;
}

}  // namespace tadk::dfa
