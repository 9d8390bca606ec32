#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cl13 {

// Search budgets (proof search, game solving) report exhaustion with this.
class ResourceExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Connectives
// ---------------------------------------------------------------------------

enum class Connective : std::uint8_t { ParAnd, ParOr, TogAnd, TogOr, SeqAnd, SeqOr, ChoAnd, ChoOr };

inline constexpr Connective kAllConnectives[] = {
    Connective::ParAnd, Connective::ParOr, Connective::TogAnd, Connective::TogOr,
    Connective::SeqAnd, Connective::SeqOr, Connective::ChoAnd, Connective::ChoOr};

inline constexpr bool is_conjunctive(Connective c) {
  return c == Connective::ParAnd || c == Connective::TogAnd || c == Connective::SeqAnd ||
         c == Connective::ChoAnd;
}
inline constexpr bool is_parallel(Connective c) {
  return c == Connective::ParAnd || c == Connective::ParOr;
}
inline constexpr bool is_toggling(Connective c) {
  return c == Connective::TogAnd || c == Connective::TogOr;
}
inline constexpr bool is_sequential(Connective c) {
  return c == Connective::SeqAnd || c == Connective::SeqOr;
}
inline constexpr bool is_choice(Connective c) {
  return c == Connective::ChoAnd || c == Connective::ChoOr;
}

inline constexpr Connective dual(Connective c) {
  switch (c) {
    case Connective::ParAnd: return Connective::ParOr;
    case Connective::ParOr: return Connective::ParAnd;
    case Connective::TogAnd: return Connective::TogOr;
    case Connective::TogOr: return Connective::TogAnd;
    case Connective::SeqAnd: return Connective::SeqOr;
    case Connective::SeqOr: return Connective::SeqAnd;
    case Connective::ChoAnd: return Connective::ChoOr;
    case Connective::ChoOr: return Connective::ChoAnd;
  }
  return c;
}

inline constexpr std::string_view token(Connective c) {
  switch (c) {
    case Connective::ParAnd: return "&";
    case Connective::ParOr: return "|";
    case Connective::TogAnd: return "%&";
    case Connective::TogOr: return "%|";
    case Connective::SeqAnd: return "$&";
    case Connective::SeqOr: return "$|";
    case Connective::ChoAnd: return "!&";
    case Connective::ChoOr: return "!|";
  }
  return "?";
}

inline constexpr std::string_view connective_name(Connective c) {
  switch (c) {
    case Connective::ParAnd: return "ParAnd";
    case Connective::ParOr: return "ParOr";
    case Connective::TogAnd: return "TogAnd";
    case Connective::TogOr: return "TogOr";
    case Connective::SeqAnd: return "SeqAnd";
    case Connective::SeqOr: return "SeqOr";
    case Connective::ChoAnd: return "ChoAnd";
    case Connective::ChoOr: return "ChoOr";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Atoms and paths
// ---------------------------------------------------------------------------

enum class AtomKind : std::uint8_t { Elementary, General };

struct Atom {
  std::string name;
  AtomKind kind = AtomKind::Elementary;
  bool pseudo = false;

  static Atom elementary(std::string n) {
    bool p = !n.empty() && n[0] == '_';
    return Atom{std::move(n), AtomKind::Elementary, p};
  }
  static Atom general(std::string n) { return Atom{std::move(n), AtomKind::General, false}; }
  // Atom introduced by rule (M).
  static Atom fresh(int k) { return Atom{"_p" + std::to_string(k), AtomKind::Elementary, true}; }

  bool is_general() const { return kind == AtomKind::General; }
  bool is_elementary() const { return kind == AtomKind::Elementary; }

  friend bool operator==(const Atom&, const Atom&) = default;
  friend bool operator<(const Atom& a, const Atom& b) {
    if (a.name != b.name) return a.name < b.name;
    return a.kind < b.kind;
  }
};

// 1-based child indices from the root; empty = whole formula.
using Path = std::vector<int>;

inline std::string path_text(const Path& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(p[i]);
  }
  return s;
}

inline Path parse_path(std::string_view s) {
  Path p;
  if (s.empty()) return p;
  std::size_t i = 0;
  while (i <= s.size()) {
    std::size_t j = s.find('.', i);
    if (j == std::string_view::npos) j = s.size();
    std::string_view part = s.substr(i, j - i);
    if (part.empty()) throw std::invalid_argument("bad path '" + std::string(s) + "'");
    int v = 0;
    for (char ch : part) {
      if (!std::isdigit(static_cast<unsigned char>(ch)))
        throw std::invalid_argument("bad path '" + std::string(s) + "'");
      v = v * 10 + (ch - '0');
      if (v > 1000000) throw std::invalid_argument("path index too large");
    }
    if (v < 1) throw std::invalid_argument("path indices are 1-based");
    p.push_back(v);
    i = j + 1;
  }
  return p;
}

inline bool is_prefix(const Path& pre, const Path& p) {
  return pre.size() <= p.size() && std::equal(pre.begin(), pre.end(), p.begin());
}

// ---------------------------------------------------------------------------
// Formula
// ---------------------------------------------------------------------------

class Formula {
 public:
  enum class Kind : std::uint8_t { Top, Bot, Lit, Nary };

  Formula() : Formula(top()) {}

  static Formula top() {
    static const Formula t(make(Kind::Top, {}, false, Connective::ParAnd, {}));
    return t;
  }
  static Formula bot() {
    static const Formula b(make(Kind::Bot, {}, false, Connective::ParAnd, {}));
    return b;
  }
  static Formula lit(Atom a, bool negated = false) {
    return Formula(make(Kind::Lit, std::move(a), negated, Connective::ParAnd, {}));
  }
  static Formula nary(Connective c, std::vector<Formula> kids) {
    if (kids.size() < 2) throw std::invalid_argument("connective needs at least two components");
    return Formula(make(Kind::Nary, {}, false, c, std::move(kids)));
  }

  Kind kind() const { return n_->kind; }
  bool is_top() const { return n_->kind == Kind::Top; }
  bool is_bot() const { return n_->kind == Kind::Bot; }
  bool is_lit() const { return n_->kind == Kind::Lit; }
  bool is_nary() const { return n_->kind == Kind::Nary; }
  bool is(Connective c) const { return is_nary() && n_->conn == c; }

  const Atom& atom() const { return n_->atom; }
  bool negated() const { return n_->negated; }
  Connective connective() const { return n_->conn; }
  const std::vector<Formula>& children() const { return n_->kids; }
  int arity() const { return static_cast<int>(n_->kids.size()); }
  // 1-based
  const Formula& child(int i) const { return n_->kids.at(static_cast<std::size_t>(i - 1)); }

  std::size_t size() const { return n_->size; }
  std::size_t hash() const { return n_->hash; }
  bool same_node(const Formula& o) const { return n_ == o.n_; }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.n_ == b.n_) return true;
    if (a.n_->hash != b.n_->hash || a.n_->size != b.n_->size) return false;
    const Node& x = *a.n_;
    const Node& y = *b.n_;
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case Kind::Top:
      case Kind::Bot: return true;
      case Kind::Lit: return x.negated == y.negated && x.atom == y.atom;
      case Kind::Nary: return x.conn == y.conn && x.kids == y.kids;
    }
    return false;
  }

 private:
  struct Node {
    Kind kind;
    Atom atom;
    bool negated;
    Connective conn;
    std::vector<Formula> kids;
    std::size_t size;
    std::size_t hash;
  };

  explicit Formula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  static std::shared_ptr<const Node> make(Kind k, Atom a, bool neg, Connective c,
                                          std::vector<Formula> kids) {
    auto mix = [](std::size_t h, std::size_t v) {
      return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    };
    std::size_t h = static_cast<std::size_t>(k) * 1315423911u;
    std::size_t sz = 1;
    if (k == Kind::Lit) {
      h = mix(h, std::hash<std::string>{}(a.name));
      h = mix(h, static_cast<std::size_t>(a.kind) * 2 + (neg ? 1 : 0));
    } else if (k == Kind::Nary) {
      h = mix(h, static_cast<std::size_t>(c) + 17);
      for (const auto& f : kids) {
        h = mix(h, f.hash());
        sz += f.size();
      }
    }
    return std::make_shared<const Node>(Node{k, std::move(a), neg, c, std::move(kids), sz, h});
  }

  std::shared_ptr<const Node> n_;
};

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f.hash(); }
};

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

inline void print_to(std::string& out, const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Top: out += '1'; return;
    case Formula::Kind::Bot: out += '0'; return;
    case Formula::Kind::Lit:
      if (f.negated()) out += '~';
      out += f.atom().name;
      return;
    case Formula::Kind::Nary: break;
  }
  bool first = true;
  for (const auto& k : f.children()) {
    if (!first) {
      out += ' ';
      out += token(f.connective());
      out += ' ';
    }
    first = false;
    if (k.is_nary()) {
      out += '(';
      print_to(out, k);
      out += ')';
    } else {
      print_to(out, k);
    }
  }
}

inline std::string print(const Formula& f) {
  std::string s;
  print_to(s, f);
  return s;
}

// ---------------------------------------------------------------------------
// Negation
// ---------------------------------------------------------------------------

inline Formula negate(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Top: return Formula::bot();
    case Formula::Kind::Bot: return Formula::top();
    case Formula::Kind::Lit: return Formula::lit(f.atom(), !f.negated());
    case Formula::Kind::Nary: break;
  }
  std::vector<Formula> kids;
  kids.reserve(f.children().size());
  for (const auto& k : f.children()) kids.push_back(negate(k));
  return Formula::nary(dual(f.connective()), std::move(kids));
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t pos, const std::string& msg)
      : std::runtime_error("at " + std::to_string(pos) + ": " + msg), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Formula run() {
    Formula f = impl();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return f;
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& m) const { throw ParseError(i_, m); }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(std::string_view t) {
    skip();
    if (s_.substr(i_, t.size()) == t) {
      i_ += t.size();
      return true;
    }
    return false;
  }

  // Peeks a connective token without consuming it.
  bool peek_op(Connective& c, std::size_t& len) {
    skip();
    if (i_ >= s_.size()) return false;
    char a = s_[i_];
    char b = i_ + 1 < s_.size() ? s_[i_ + 1] : '\0';
    auto two = [&](Connective and_c, Connective or_c) {
      if (b == '&') { c = and_c; len = 2; return true; }
      if (b == '|') { c = or_c; len = 2; return true; }
      return false;
    };
    switch (a) {
      case '&': c = Connective::ParAnd; len = 1; return true;
      case '|': c = Connective::ParOr; len = 1; return true;
      case '%': if (two(Connective::TogAnd, Connective::TogOr)) return true; break;
      case '$': if (two(Connective::SeqAnd, Connective::SeqOr)) return true; break;
      case '!': if (two(Connective::ChoAnd, Connective::ChoOr)) return true; break;
      default: return false;
    }
    fail("unknown operator starting with '" + std::string(1, a) + "'");
  }

  Formula impl() {
    Formula left = level();
    if (eat("->")) {
      Formula right = impl();
      return Formula::nary(Connective::ParOr, {negate(left), right});
    }
    return left;
  }

  Formula level() {
    std::vector<Formula> parts{unit()};
    Connective c{};
    std::size_t len = 0;
    bool have = false;
    Connective seen{};
    while (peek_op(c, len)) {
      if (have && c != seen)
        fail("mixed connectives '" + std::string(token(seen)) + "' and '" +
             std::string(token(c)) + "' need parentheses");
      have = true;
      seen = c;
      i_ += len;
      parts.push_back(unit());
    }
    if (!have) return parts.front();
    if (parts.size() < 2) fail("connective needs at least two components");
    return Formula::nary(seen, std::move(parts));
  }

  Formula unit() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end of input");
    char ch = s_[i_];
    if (ch == '~') {
      ++i_;
      return negate(unit());
    }
    if (ch == '(') {
      ++i_;
      Formula f = impl();
      if (!eat(")")) fail("expected ')'");
      return f;
    }
    if (ch == ')') fail("unbalanced ')'");
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t j = i_;
      while (j < s_.size() && std::isalnum(static_cast<unsigned char>(s_[j]))) ++j;
      std::string_view num = s_.substr(i_, j - i_);
      if (num == "1") { i_ = j; return Formula::top(); }
      if (num == "0") { i_ = j; return Formula::bot(); }
      fail("bad constant '" + std::string(num) + "'");
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i_;
      while (j < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_'))
        ++j;
      std::string name(s_.substr(i_, j - i_));
      i_ = j;
      if (std::isupper(static_cast<unsigned char>(name[0])))
        return Formula::lit(Atom::general(std::move(name)));
      return Formula::lit(Atom::elementary(std::move(name)));
    }
    fail("unexpected '" + std::string(1, ch) + "'");
  }
};

}  // namespace detail

inline Formula parse(std::string_view text) { return detail::Parser(text).run(); }

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct FormulaClass {
  bool is_elementary = false;
  bool is_quasielementary = false;
  bool is_elementary_base = false;
};

inline FormulaClass classify(const Formula& f) {
  FormulaClass c{true, true, true};
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (g.is_lit()) {
      if (g.atom().is_general()) c = FormulaClass{false, false, false};
      return;
    }
    if (!g.is_nary()) return;
    Connective k = g.connective();
    if (!is_parallel(k)) c.is_elementary = false;
    if (!is_parallel(k) && !is_toggling(k)) c.is_quasielementary = false;
    for (const auto& x : g.children()) go(x);
  };
  go(f);
  return c;
}

inline bool is_quasielementary(const Formula& f) { return classify(f).is_quasielementary; }
inline bool is_elementary(const Formula& f) { return classify(f).is_elementary; }
inline bool is_elementary_base(const Formula& f) { return classify(f).is_elementary_base; }

template <class Fn>
void for_each_literal(const Formula& f, Fn&& fn) {
  if (f.is_lit()) {
    fn(f);
    return;
  }
  for (const auto& k : f.children()) for_each_literal(k, fn);
}

inline std::set<Atom> atoms(const Formula& f) {
  std::set<Atom> out;
  for_each_literal(f, [&](const Formula& l) { out.insert(l.atom()); });
  return out;
}

inline int general_occurrences(const Formula& f) {
  int n = 0;
  for_each_literal(f, [&](const Formula& l) { n += l.atom().is_general() ? 1 : 0; });
  return n;
}

inline bool mentions(const Formula& f, std::string_view name) {
  bool hit = false;
  for_each_literal(f, [&](const Formula& l) { hit = hit || l.atom().name == name; });
  return hit;
}

// ---------------------------------------------------------------------------
// Occurrences and replacement
// ---------------------------------------------------------------------------

// SemisurfaceHeads additionally skips the tails of sequential osubformulas.
enum class Scope : std::uint8_t { Surface, Semisurface, SemisurfaceHeads };

struct Occurrence {
  Path path;
  Formula sub;
  bool positive = true;
};

template <class Pred>
std::vector<Occurrence> occurrences(const Formula& f, Scope scope, Pred&& pred) {
  std::vector<Occurrence> out;
  Path path;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (pred(g)) out.push_back({path, g, !(g.is_lit() && g.negated())});
    if (!g.is_nary()) return;
    Connective c = g.connective();
    int limit = g.arity();
    switch (scope) {
      case Scope::Surface:
        if (!is_parallel(c)) return;
        break;
      case Scope::Semisurface:
        if (is_choice(c)) return;
        break;
      case Scope::SemisurfaceHeads:
        if (is_choice(c)) return;
        if (is_sequential(c)) limit = 1;
        break;
    }
    for (int i = 1; i <= limit; ++i) {
      path.push_back(i);
      go(g.child(i));
      path.pop_back();
    }
  };
  go(f);
  return out;
}

inline auto of_kind(Connective c) {
  return [c](const Formula& g) { return g.is(c); };
}

inline const Formula& at(const Formula& f, const Path& p) {
  const Formula* cur = &f;
  for (int s : p) {
    if (!cur->is_nary() || s < 1 || s > cur->arity())
      throw std::out_of_range("invalid path " + path_text(p));
    cur = &cur->child(s);
  }
  return *cur;
}

inline bool valid_path(const Formula& f, const Path& p) {
  const Formula* cur = &f;
  for (int s : p) {
    if (!cur->is_nary() || s < 1 || s > cur->arity()) return false;
    cur = &cur->child(s);
  }
  return true;
}

inline Formula replace_at(const Formula& f, const Path& p, const Formula& g, std::size_t depth = 0) {
  if (depth == p.size()) return g;
  int s = p[depth];
  if (!f.is_nary() || s < 1 || s > f.arity())
    throw std::out_of_range("invalid path " + path_text(p));
  std::vector<Formula> kids = f.children();
  kids[static_cast<std::size_t>(s - 1)] = replace_at(kids[static_cast<std::size_t>(s - 1)], p, g, depth + 1);
  return Formula::nary(f.connective(), std::move(kids));
}

// E_{i+1} ... E_n of a sequential node, collapsing to the last component when one remains.
inline Formula drop_head(const Formula& seq) {
  std::vector<Formula> rest(seq.children().begin() + 1, seq.children().end());
  if (rest.size() == 1) return rest.front();
  return Formula::nary(seq.connective(), std::move(rest));
}

// ---------------------------------------------------------------------------
// |F| and ||F||
// ---------------------------------------------------------------------------

inline Formula quasielementarize(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Top:
    case Formula::Kind::Bot: return f;
    case Formula::Kind::Lit: return f.atom().is_general() ? Formula::bot() : f;
    case Formula::Kind::Nary: break;
  }
  Connective c = f.connective();
  if (is_sequential(c)) return quasielementarize(f.child(1));
  if (c == Connective::ChoAnd) return Formula::top();
  if (c == Connective::ChoOr) return Formula::bot();
  std::vector<Formula> kids;
  kids.reserve(f.children().size());
  for (const auto& k : f.children()) kids.push_back(quasielementarize(k));
  return Formula::nary(c, std::move(kids));
}

inline Formula elementarize(const Formula& f) {
  if (!is_quasielementary(f))
    throw std::invalid_argument("elementarize needs a quasielementary formula: " + print(f));
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    if (!g.is_nary()) return g;
    if (g.is(Connective::TogAnd)) return Formula::top();
    if (g.is(Connective::TogOr)) return Formula::bot();
    std::vector<Formula> kids;
    for (const auto& k : g.children()) kids.push_back(go(k));
    return Formula::nary(g.connective(), std::move(kids));
  };
  return go(f);
}

}  // namespace cl13

template <>
struct std::hash<cl13::Formula> {
  std::size_t operator()(const cl13::Formula& f) const noexcept { return f.hash(); }
};
