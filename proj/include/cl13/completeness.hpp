#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "formula.hpp"

namespace cl13 {

// Small molecule atoms are elementary atoms named P<a><b> (P<a>_<b> once m > 9). They
// start with the general atom's uppercase letter, so plain parsing reads them as
// general atoms; parse_molecular turns them back into elementary ones.
class MoleculeContext {
 public:
  struct Small {
    std::string general;
    int a = 0;
    int b = 0;
    friend auto operator<=>(const Small&, const Small&) = default;
  };

  static MoleculeContext build(const Formula& f) {
    MoleculeContext ctx;
    std::set<std::string> taken, generals;
    int occ = 0;
    for_each_literal(f, [&](const Formula& l) {
      taken.insert(l.atom().name);
      if (l.atom().is_general()) {
        ++occ;
        generals.insert(l.atom().name);
      }
    });
    ctx.m_ = std::max(occ, 2);
    for (const auto& p : generals) {
      for (int a = 1; a <= ctx.m_; ++a) {
        for (int b = 1; b <= ctx.m_; ++b) {
          std::string name = p + std::to_string(a) + (ctx.m_ > 9 ? "_" : "") + std::to_string(b);
          while (taken.count(name) || ctx.by_name_.count(name)) name += "x";
          ctx.names_[{p, a, b}] = name;
          ctx.by_name_[name] = {p, a, b};
        }
      }
    }
    return ctx;
  }

  int m() const { return m_; }
  bool knows(const std::string& general) const { return names_.count({general, 1, 1}) > 0; }

  Atom atom(const std::string& p, int a, int b) const {
    auto it = names_.find({p, a, b});
    if (it == names_.end()) throw std::out_of_range("no molecule atom for " + p);
    return Atom::elementary(it->second);
  }
  std::optional<Small> small_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  Formula small(const std::string& p, int a, int b) const { return Formula::lit(atom(p, a, b), false); }
  Formula medium(const std::string& p, int a) const {
    std::vector<Formula> k;
    for (int b = 1; b <= m_; ++b) k.push_back(small(p, a, b));
    return Formula::nary(Connective::ChoOr, std::move(k));
  }
  Formula large(const std::string& p) const {
    std::vector<Formula> k;
    for (int a = 1; a <= m_; ++a) k.push_back(medium(p, a));
    return Formula::nary(Connective::ChoAnd, std::move(k));
  }

  // Reads molecule atom names as elementary atoms.
  Formula molecular(const Formula& f) const {
    if (f.is_lit()) {
      if (f.atom().is_general() && by_name_.count(f.atom().name))
        return Formula::lit(Atom::elementary(f.atom().name), f.negated());
      return f;
    }
    if (!f.is_nary()) return f;
    std::vector<Formula> k;
    for (const auto& c : f.children()) k.push_back(molecular(c));
    return Formula::nary(f.connective(), std::move(k));
  }

 private:
  int m_ = 2;
  std::map<std::tuple<std::string, int, int>, std::string> names_;
  std::map<std::string, Small> by_name_;
};

inline Formula parse_molecular(std::string_view text, const MoleculeContext& ctx) {
  return ctx.molecular(parse(text));
}

inline Formula lift(const Formula& f, const MoleculeContext& ctx) {
  if (f.is_lit()) {
    if (!f.atom().is_general()) return f;
    Formula big = ctx.large(f.atom().name);
    return f.negated() ? negate(big) : big;
  }
  if (!f.is_nary()) return f;
  std::vector<Formula> k;
  for (const auto& c : f.children()) k.push_back(lift(c, ctx));
  return Formula::nary(f.connective(), std::move(k));
}

enum class MoleculeSize : std::uint8_t { Small, Medium, Large };

struct MoleculeOccurrence {
  Path path;
  MoleculeSize size = MoleculeSize::Small;
  std::string general;
  int a = 0;  // medium/small
  int b = 0;  // small
  bool positive = true;
  bool semisurface = true;
};

namespace detail {

inline std::optional<MoleculeOccurrence> as_small(const Formula& g, const MoleculeContext& ctx) {
  if (!g.is_lit() || !g.atom().is_elementary()) return std::nullopt;
  auto s = ctx.small_of(g.atom().name);
  if (!s) return std::nullopt;
  MoleculeOccurrence o;
  o.size = MoleculeSize::Small;
  o.general = s->general;
  o.a = s->a;
  o.b = s->b;
  o.positive = !g.negated();
  return o;
}

inline std::optional<MoleculeOccurrence> as_medium(const Formula& g, const MoleculeContext& ctx) {
  if (!g.is_nary() || !is_choice(g.connective()) || g.arity() != ctx.m()) return std::nullopt;
  const bool pos = g.connective() == Connective::ChoOr;
  std::optional<MoleculeOccurrence> first;
  for (int b = 1; b <= g.arity(); ++b) {
    auto s = as_small(g.child(b), ctx);
    if (!s || s->positive != pos || s->b != b) return std::nullopt;
    if (first && (s->general != first->general || s->a != first->a)) return std::nullopt;
    if (!first) first = s;
  }
  MoleculeOccurrence o = *first;
  o.size = MoleculeSize::Medium;
  o.b = 0;
  return o;
}

inline std::optional<MoleculeOccurrence> as_large(const Formula& g, const MoleculeContext& ctx) {
  if (!g.is_nary() || !is_choice(g.connective()) || g.arity() != ctx.m()) return std::nullopt;
  const bool pos = g.connective() == Connective::ChoAnd;
  std::string p;
  for (int a = 1; a <= g.arity(); ++a) {
    auto md = as_medium(g.child(a), ctx);
    if (!md || md->positive != pos || md->a != a) return std::nullopt;
    if (a > 1 && md->general != p) return std::nullopt;
    p = md->general;
  }
  MoleculeOccurrence o;
  o.size = MoleculeSize::Large;
  o.general = p;
  o.positive = pos;
  return o;
}

inline std::optional<MoleculeOccurrence> as_molecule(const Formula& g, const MoleculeContext& ctx) {
  if (auto o = as_large(g, ctx)) return o;
  if (auto o = as_medium(g, ctx)) return o;
  return as_small(g, ctx);
}

}  // namespace detail

// Molecule occurrences not inside a larger molecule, left to right.
inline std::vector<MoleculeOccurrence> independent_molecules(const Formula& e, const MoleculeContext& ctx) {
  std::vector<MoleculeOccurrence> out;
  std::function<void(const Formula&, Path&, bool)> go = [&](const Formula& g, Path& p, bool semi) {
    if (auto o = detail::as_molecule(g, ctx)) {
      o->path = p;
      o->semisurface = semi;
      out.push_back(*o);
      return;
    }
    if (!g.is_nary()) return;
    const bool under = semi && !is_choice(g.connective());
    for (int k = 1; k <= g.arity(); ++k) {
      p.push_back(k);
      go(g.child(k), p, under);
      p.pop_back();
    }
  };
  Path p;
  go(e, p, true);
  return out;
}

inline Formula floorify(const Formula& e, const MoleculeContext& ctx) {
  auto occ = independent_molecules(e, ctx);
  std::map<std::tuple<std::string, int, int>, int> small_count;
  for (const auto& o : occ)
    if (o.size == MoleculeSize::Small) ++small_count[{o.general, o.a, o.b}];
  Formula out = e;
  // Right to left so earlier paths stay valid (replacements never change arity).
  for (auto it = occ.rbegin(); it != occ.rend(); ++it) {
    if (it->size == MoleculeSize::Small && small_count[{it->general, it->a, it->b}] != 1) continue;
    out = replace_at(out, it->path, Formula::lit(Atom::general(it->general), !it->positive));
  }
  return out;
}

struct GoodnessReport {
  std::vector<int> violated;  // conditions 1..4
  bool good() const { return violated.empty(); }
};

inline GoodnessReport is_good(const Formula& e, const MoleculeContext& ctx) {
  GoodnessReport r;
  auto bad = [&](int c) {
    if (std::find(r.violated.begin(), r.violated.end(), c) == r.violated.end()) r.violated.push_back(c);
  };
  auto occ = independent_molecules(e, ctx);
  if (static_cast<int>(occ.size()) > ctx.m()) bad(1);
  std::map<std::tuple<std::string, int, int>, std::pair<int, int>> small;  // pos, neg
  std::map<std::pair<std::string, int>, int> medium_pos;
  std::set<std::pair<std::string, int>> small_pos_rows;
  for (const auto& o : occ) {
    if (!o.semisurface && o.size != MoleculeSize::Large) bad(2);
    if (o.size == MoleculeSize::Small) {
      auto& c = small[{o.general, o.a, o.b}];
      (o.positive ? c.first : c.second)++;
      if (o.positive) small_pos_rows.insert({o.general, o.a});
    } else if (o.size == MoleculeSize::Medium && o.positive) {
      ++medium_pos[{o.general, o.a}];
    }
  }
  for (const auto& [k, c] : small)
    if (c.first > 1 || c.second > 1) bad(3);
  for (const auto& [k, n] : medium_pos)
    if (n > 1 || small_pos_rows.count(k)) bad(4);
  std::sort(r.violated.begin(), r.violated.end());
  return r;
}

}  // namespace cl13
