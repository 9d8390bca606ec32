#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "classical.hpp"
#include "formula.hpp"

namespace cl13 {

// ---------------------------------------------------------------------------
// Rules and premise steps
// ---------------------------------------------------------------------------

enum class Rule : std::uint8_t { TGC, TGD, SQC_ADC, ADD, SQD, MATCH, D_TGD, D_TGC, D_SQD_ADD, D_ADC, D_SQC };

inline constexpr Rule kAllRules[] = {Rule::TGC,   Rule::TGD,   Rule::SQC_ADC,   Rule::ADD,
                                     Rule::SQD,   Rule::MATCH, Rule::D_TGD,     Rule::D_TGC,
                                     Rule::D_SQD_ADD, Rule::D_ADC, Rule::D_SQC};

inline constexpr std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::TGC: return "TGC";
    case Rule::TGD: return "TGD";
    case Rule::SQC_ADC: return "SQC_ADC";
    case Rule::ADD: return "ADD";
    case Rule::SQD: return "SQD";
    case Rule::MATCH: return "MATCH";
    case Rule::D_TGD: return "D_TGD";
    case Rule::D_TGC: return "D_TGC";
    case Rule::D_SQD_ADD: return "D_SQD_ADD";
    case Rule::D_ADC: return "D_ADC";
    case Rule::D_SQC: return "D_SQC";
  }
  return "?";
}

inline std::optional<Rule> parse_rule(std::string_view s) {
  for (Rule r : kAllRules)
    if (rule_name(r) == s) return r;
  return std::nullopt;
}

inline bool is_dual_rule(Rule r) {
  return r == Rule::D_TGD || r == Rule::D_TGC || r == Rule::D_SQD_ADD || r == Rule::D_ADC ||
         r == Rule::D_SQC;
}

// Rules whose premise list is a conjunction (every premise required).
inline bool is_conjunctive_rule(Rule r) {
  return r == Rule::TGC || r == Rule::SQC_ADC || r == Rule::D_TGD || r == Rule::D_SQD_ADD;
}

// The conclusion-to-premise transformation behind one premise.
struct Step {
  enum class Kind : std::uint8_t { Pick, Advance, Match, Senior };
  Kind kind = Kind::Senior;
  Path path;       // Pick/Advance target; Match positive literal
  int pick = 0;    // Pick component
  Path neg_path;   // Match negative literal
  Atom fresh;      // Match atom

  friend bool operator==(const Step&, const Step&) = default;
};

inline Formula apply_step(const Formula& f, const Step& s) {
  switch (s.kind) {
    case Step::Kind::Senior: return quasielementarize(f);
    case Step::Kind::Pick: return replace_at(f, s.path, at(f, s.path).child(s.pick));
    case Step::Kind::Advance: return replace_at(f, s.path, drop_head(at(f, s.path)));
    case Step::Kind::Match: {
      Formula g = replace_at(f, s.path, Formula::lit(s.fresh, false));
      return replace_at(g, s.neg_path, Formula::lit(s.fresh, true));
    }
  }
  return f;
}

inline int max_pseudo_index(const Formula& f) {
  int best = 0;
  for_each_literal(f, [&](const Formula& l) {
    const std::string& n = l.atom().name;
    if (n.size() > 2 && n[0] == '_' && n[1] == 'p' &&
        std::all_of(n.begin() + 2, n.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      best = std::max(best, std::stoi(n.substr(2)));
  });
  return best;
}

inline Atom first_unused_pseudo(const Formula& f) {
  std::set<std::string> used;
  for_each_literal(f, [&](const Formula& l) { used.insert(l.atom().name); });
  for (int k = 1;; ++k) {
    Atom a = Atom::fresh(k);
    if (!used.count(a.name)) return a;
  }
}

struct RuleOptions {
  bool claim45_pruning = false;
};

namespace detail {

inline Scope semisurface_scope(const RuleOptions& o) {
  return o.claim45_pruning ? Scope::SemisurfaceHeads : Scope::Semisurface;
}

inline void add_picks(std::vector<Step>& out, const Formula& f, Scope scope, Connective c) {
  for (const auto& occ : occurrences(f, scope, of_kind(c)))
    for (int i = 1; i <= occ.sub.arity(); ++i) out.push_back(Step{Step::Kind::Pick, occ.path, i, {}, {}});
}

inline void add_advances(std::vector<Step>& out, const Formula& f, Scope scope, Connective c) {
  for (const auto& occ : occurrences(f, scope, of_kind(c)))
    out.push_back(Step{Step::Kind::Advance, occ.path, 0, {}, {}});
}

// Juniors in left-to-right occurrence order over both connective kinds.
inline void add_juniors(std::vector<Step>& out, const Formula& f, Scope scope, Connective choice,
                        Connective seq) {
  auto pred = [&](const Formula& g) { return g.is(choice) || g.is(seq); };
  for (const auto& occ : occurrences(f, scope, pred)) {
    if (occ.sub.is(choice)) {
      for (int i = 1; i <= occ.sub.arity(); ++i) out.push_back(Step{Step::Kind::Pick, occ.path, i, {}, {}});
    } else {
      out.push_back(Step{Step::Kind::Advance, occ.path, 0, {}, {}});
    }
  }
}

}  // namespace detail

// Match steps for every (positive, negative) semisurface pair of each general atom.
inline std::vector<Step> match_steps(const Formula& f, const Atom& fresh, const RuleOptions& o = {}) {
  std::vector<Step> out;
  auto lits = occurrences(f, detail::semisurface_scope(o),
                          [](const Formula& g) { return g.is_lit() && g.atom().is_general(); });
  for (const auto& pos : lits) {
    if (!pos.positive) continue;
    for (const auto& neg : lits) {
      if (neg.positive || neg.sub.atom() != pos.sub.atom()) continue;
      out.push_back(Step{Step::Kind::Match, pos.path, 0, neg.path, fresh});
    }
  }
  return out;
}

// For conjunctive rules: the full required premise list. For the other rules: every
// alternative single premise. nullopt when the side condition fails.
inline std::optional<std::vector<Step>> rule_steps(Rule r, const Formula& f, const RuleOptions& o = {}) {
  using detail::add_advances;
  using detail::add_picks;
  const Scope semi = detail::semisurface_scope(o);
  const bool quasi = is_quasielementary(f);
  std::vector<Step> out;
  switch (r) {
    case Rule::TGC:
      if (!quasi || !is_stable(f)) return std::nullopt;
      add_picks(out, f, Scope::Surface, Connective::TogAnd);
      return out;
    case Rule::TGD:
      if (!quasi) return std::nullopt;
      add_picks(out, f, Scope::Surface, Connective::TogOr);
      return out;
    case Rule::SQC_ADC:
      if (quasi) return std::nullopt;
      out.push_back(Step{});
      detail::add_juniors(out, f, semi, Connective::ChoAnd, Connective::SeqAnd);
      return out;
    case Rule::ADD:
      add_picks(out, f, semi, Connective::ChoOr);
      return out;
    case Rule::SQD:
      add_advances(out, f, semi, Connective::SeqOr);
      return out;
    case Rule::MATCH:
      return match_steps(f, first_unused_pseudo(f), o);
    case Rule::D_TGD:
      if (!quasi || is_stable(f)) return std::nullopt;
      add_picks(out, f, Scope::Surface, Connective::TogOr);
      return out;
    case Rule::D_TGC:
      if (!quasi) return std::nullopt;
      add_picks(out, f, Scope::Surface, Connective::TogAnd);
      return out;
    case Rule::D_SQD_ADD:
      if (quasi) return std::nullopt;
      out.push_back(Step{});
      detail::add_juniors(out, f, semi, Connective::ChoOr, Connective::SeqOr);
      return out;
    case Rule::D_ADC:
      add_picks(out, f, semi, Connective::ChoAnd);
      return out;
    case Rule::D_SQC:
      add_advances(out, f, semi, Connective::SeqAnd);
      return out;
  }
  return std::nullopt;
}

inline std::optional<std::vector<Formula>> premises(Rule r, const Formula& f, const RuleOptions& o = {}) {
  auto steps = rule_steps(r, f, o);
  if (!steps) return std::nullopt;
  std::vector<Formula> out;
  for (const auto& s : *steps) {
    Formula g = apply_step(f, s);
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Proof objects
// ---------------------------------------------------------------------------

struct ProofNode;
using ProofPtr = std::shared_ptr<const ProofNode>;

struct ProofNode {
  int id = 0;
  Formula conclusion;
  Rule rule = Rule::TGC;
  std::vector<ProofPtr> premises;
  std::optional<Step> aux;  // single-premise rules
  int senior_index = -1;    // SQC_ADC / D_SQD_ADD
};

template <class Fn>
void for_each_node(const ProofPtr& root, Fn&& fn) {
  std::set<const ProofNode*> seen;
  std::function<void(const ProofPtr&)> go = [&](const ProofPtr& n) {
    if (!seen.insert(n.get()).second) return;
    for (const auto& p : n->premises) go(p);
    fn(n);
  };
  go(root);
}

inline std::size_t proof_size(const ProofPtr& root) {
  std::size_t n = 0;
  for_each_node(root, [&](const ProofPtr&) { ++n; });
  return n;
}

inline int count_rule(const ProofPtr& root, Rule r) {
  int n = 0;
  for_each_node(root, [&](const ProofPtr& p) { n += p->rule == r ? 1 : 0; });
  return n;
}

// ---------------------------------------------------------------------------
// Decision procedures
// ---------------------------------------------------------------------------

enum class System : std::uint8_t { CL13, CL14, CL14Bar };

inline std::string_view system_name(System s) {
  switch (s) {
    case System::CL13: return "cl13";
    case System::CL14: return "cl14";
    case System::CL14Bar: return "cl14bar";
  }
  return "?";
}

struct DecideOptions {
  bool claim45_pruning = false;
  std::size_t budget = 1000000;
  bool build_proof = true;
};

struct Verdict {
  bool provable = false;
  ProofPtr proof;  // set when provable and a proof was requested
  std::size_t subgoals = 0;
};

// Printed form with pseudo atoms renamed _p1, _p2, ... by first occurrence. General
// atoms carry a trailing quote so they never collide with same-named elementary ones.
inline std::string canonical_key(const Formula& f, bool rename_pseudo = true) {
  std::map<std::string, std::string> ren;
  for_each_literal(f, [&](const Formula& l) {
    if (rename_pseudo && l.atom().pseudo && !ren.count(l.atom().name))
      ren.emplace(l.atom().name, "_p" + std::to_string(ren.size() + 1));
  });
  std::string out;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (g.is_lit()) {
      if (g.negated()) out += '~';
      auto it = ren.find(g.atom().name);
      out += it == ren.end() ? g.atom().name : it->second;
      if (g.atom().is_general()) out += '\'';
      return;
    }
    if (!g.is_nary()) {
      out += g.is_top() ? '1' : '0';
      return;
    }
    out += '(';
    for (int i = 1; i <= g.arity(); ++i) {
      if (i > 1) out += token(g.connective());
      go(g.child(i));
    }
    out += ')';
  };
  go(f);
  return out;
}

class Prover {
 public:
  Prover(System sys, DecideOptions opts) : sys_(sys), opts_(opts) {}

  Verdict decide(const Formula& f) {
    if (sys_ != System::CL13 && !is_elementary_base(f))
      throw std::invalid_argument(std::string(system_name(sys_)) + " needs an elementary-base formula");
    Verdict v;
    v.provable = provable(f);
    if (v.provable && opts_.build_proof) {
      int next = max_pseudo_index(f) + 1;
      v.proof = build(f, next);
      int id = 0;
      for_each_node(v.proof, [&](const ProofPtr& n) { const_cast<ProofNode&>(*n).id = ++id; });
    }
    v.subgoals = opened_;
    return v;
  }

  bool provable(const Formula& f) {
    std::string key = canonical_key(f);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (++opened_ > opts_.budget)
      throw ResourceExhausted("proof search exceeded " + std::to_string(opts_.budget) + " subgoals");
    bool r = sys_ == System::CL14Bar ? search_dual(f) : search(f);
    memo_.emplace(std::move(key), r);
    return r;
  }

 private:
  System sys_;
  DecideOptions opts_;
  std::unordered_map<std::string, bool> memo_;
  std::size_t opened_ = 0;
  std::map<std::pair<std::string, int>, ProofPtr> built_;

  RuleOptions rule_opts() const { return RuleOptions{opts_.claim45_pruning}; }

  bool any_of_rule(Rule r, const Formula& f) {
    auto steps = rule_steps(r, f, rule_opts());
    if (!steps) return false;
    for (const auto& s : *steps)
      if (provable(apply_step(f, s))) return true;
    return false;
  }

  bool all_of_rule(Rule r, const Formula& f) {
    auto steps = rule_steps(r, f, rule_opts());
    if (!steps) return false;
    for (const auto& s : *steps)
      if (!provable(apply_step(f, s))) return false;
    return true;
  }

  bool search(const Formula& f) {
    if (is_quasielementary(f)) return any_of_rule(Rule::TGD, f) || all_of_rule(Rule::TGC, f);
    if (any_of_rule(Rule::ADD, f) || any_of_rule(Rule::SQD, f)) return true;
    if (sys_ == System::CL13 && any_of_rule(Rule::MATCH, f)) return true;
    return all_of_rule(Rule::SQC_ADC, f);
  }

  bool search_dual(const Formula& f) {
    if (is_quasielementary(f)) return any_of_rule(Rule::D_TGC, f) || all_of_rule(Rule::D_TGD, f);
    if (any_of_rule(Rule::D_ADC, f) || any_of_rule(Rule::D_SQC, f)) return true;
    return all_of_rule(Rule::D_SQD_ADD, f);
  }

  // next: smallest pseudo index not yet introduced on the path from the root.
  ProofPtr build(const Formula& f, int next) {
    auto memo_key = std::make_pair(canonical_key(f, false), next);
    if (auto it = built_.find(memo_key); it != built_.end()) return it->second;
    auto node = std::make_shared<ProofNode>();
    node->conclusion = f;
    const bool dual = sys_ == System::CL14Bar;
    const bool quasi = is_quasielementary(f);

    auto try_single = [&](Rule r) -> bool {
      std::optional<std::vector<Step>> steps;
      if (r == Rule::MATCH)
        steps = match_steps(f, Atom::fresh(next), rule_opts());
      else
        steps = rule_steps(r, f, rule_opts());
      if (!steps) return false;
      for (const auto& s : *steps) {
        Formula g = apply_step(f, s);
        if (!provable(g)) continue;
        node->rule = r;
        node->aux = s;
        node->premises.push_back(build(g, r == Rule::MATCH ? next + 1 : next));
        return true;
      }
      return false;
    };
    auto take_all = [&](Rule r) {
      node->rule = r;
      auto steps = rule_steps(r, f, rule_opts());
      std::vector<Formula> seen;
      for (const auto& s : *steps) {
        Formula g = apply_step(f, s);
        if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
        seen.push_back(g);
        node->premises.push_back(build(g, next));
      }
      if (r == Rule::SQC_ADC || r == Rule::D_SQD_ADD) node->senior_index = 0;
    };

    if (!dual) {
      if (quasi) {
        if (!try_single(Rule::TGD)) take_all(Rule::TGC);
      } else if (!try_single(Rule::ADD) && !try_single(Rule::SQD) &&
                 !(sys_ == System::CL13 && try_single(Rule::MATCH))) {
        take_all(Rule::SQC_ADC);
      }
    } else {
      if (quasi) {
        if (!try_single(Rule::D_TGC)) take_all(Rule::D_TGD);
      } else if (!try_single(Rule::D_ADC) && !try_single(Rule::D_SQC)) {
        take_all(Rule::D_SQD_ADD);
      }
    }
    ProofPtr out = node;
    built_.emplace(std::move(memo_key), out);
    return out;
  }
};

inline Verdict decide(const Formula& f, System sys, const DecideOptions& opts = {}) {
  return Prover(sys, opts).decide(f);
}
inline Verdict decide_cl13(const Formula& f, const DecideOptions& opts = {}) {
  return decide(f, System::CL13, opts);
}
inline Verdict decide_cl14(const Formula& f, const DecideOptions& opts = {}) {
  return decide(f, System::CL14, opts);
}
inline Verdict decide_cl14bar(const Formula& f, const DecideOptions& opts = {}) {
  return decide(f, System::CL14Bar, opts);
}

// ---------------------------------------------------------------------------
// Checker
// ---------------------------------------------------------------------------

struct CheckResult {
  bool ok = true;
  int node = 0;
  std::string reason;
};

namespace detail {

inline bool step_matches_aux(const Step& s, const Step& aux) {
  if (s.kind != aux.kind || s.path != aux.path) return false;
  if (s.kind == Step::Kind::Pick) return s.pick == aux.pick;
  if (s.kind == Step::Kind::Match) return s.neg_path == aux.neg_path;
  return true;
}

// Recovers the fresh atom a Match step used from its premise.
inline std::optional<Atom> fresh_from_premise(const Formula& premise, const Step& s) {
  if (!valid_path(premise, s.path)) return std::nullopt;
  const Formula& l = at(premise, s.path);
  if (!l.is_lit() || l.negated()) return std::nullopt;
  return l.atom();
}

}  // namespace detail

// Infers the aux record of a single-premise node whose file line omitted it.
inline std::optional<Step> infer_aux(Rule r, const Formula& f, const Formula& premise,
                                     const RuleOptions& o = {}) {
  auto steps = rule_steps(r, f, o);
  if (!steps) return std::nullopt;
  for (auto s : *steps) {
    if (s.kind == Step::Kind::Match) {
      auto a = detail::fresh_from_premise(premise, s);
      if (!a) continue;
      s.fresh = *a;
    }
    if (apply_step(f, s) == premise) return s;
  }
  return std::nullopt;
}

inline CheckResult check_proof(const ProofPtr& root, const RuleOptions& o = {}) {
  if (!root) return {false, 0, "empty proof"};
  const std::set<Atom> root_atoms = atoms(root->conclusion);

  // Topological order (parents before children) for the inherited fresh-atom sets.
  std::vector<ProofPtr> post;
  for_each_node(root, [&](const ProofPtr& n) { post.push_back(n); });
  std::reverse(post.begin(), post.end());
  std::map<const ProofNode*, std::set<std::string>> above;
  above[root.get()];

  for (const auto& n : post) {
    auto fail = [&](const std::string& why) { return CheckResult{false, n->id, why}; };
    const Formula& f = n->conclusion;
    const std::set<std::string>& introduced_above = above[n.get()];
    std::string introduced;

    if (is_conjunctive_rule(n->rule)) {
      auto req = premises(n->rule, f, o);
      if (!req) return fail(std::string(rule_name(n->rule)) + " side condition fails");
      std::vector<Formula> got;
      for (const auto& p : n->premises) {
        if (std::find(got.begin(), got.end(), p->conclusion) != got.end())
          return fail("duplicate premise " + print(p->conclusion));
        got.push_back(p->conclusion);
      }
      for (const auto& g : got)
        if (std::find(req->begin(), req->end(), g) == req->end()) return fail("extra premise " + print(g));
      for (const auto& g : *req)
        if (std::find(got.begin(), got.end(), g) == got.end()) return fail("missing premise " + print(g));
      if (n->rule == Rule::SQC_ADC || n->rule == Rule::D_SQD_ADD) {
        if (n->senior_index < 0 || n->senior_index >= static_cast<int>(n->premises.size()))
          return fail("senior premise not identified");
        if (n->premises[static_cast<std::size_t>(n->senior_index)]->conclusion != quasielementarize(f))
          return fail("senior premise is not |F|");
      }
    } else {
      if (n->premises.size() != 1) return fail(std::string(rule_name(n->rule)) + " takes exactly one premise");
      const Formula& prem = n->premises.front()->conclusion;
      auto steps = rule_steps(n->rule, f, o);
      if (!steps || steps->empty()) return fail(std::string(rule_name(n->rule)) + " side condition fails");
      std::optional<Step> used;
      if (n->aux) {
        for (auto s : *steps) {
          if (!detail::step_matches_aux(s, *n->aux)) continue;
          if (s.kind == Step::Kind::Match) s.fresh = n->aux->fresh;
          used = s;
          break;
        }
        if (!used) return fail("aux data does not name an eligible osubformula");
        if (apply_step(f, *used) != prem) return fail("premise does not follow by the stated aux data");
      } else {
        used = infer_aux(n->rule, f, prem, o);
        if (!used) return fail("premise does not follow by " + std::string(rule_name(n->rule)));
      }
      if (n->rule == Rule::MATCH) {
        const Atom& a = used->fresh;
        if (!a.is_elementary()) return fail("fresh atom must be elementary");
        if (mentions(f, a.name)) return fail("stale fresh atom " + a.name + " (occurs in conclusion)");
        for (const auto& ra : root_atoms)
          if (ra.name == a.name) return fail("stale fresh atom " + a.name + " (occurs in the proved formula)");
        if (introduced_above.count(a.name)) return fail("stale fresh atom " + a.name + " (introduced below)");
        introduced = a.name;
      }
    }
    for (const auto& p : n->premises) {
      auto& s = above[p.get()];
      s.insert(introduced_above.begin(), introduced_above.end());
      if (!introduced.empty()) s.insert(introduced);
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Proof file format
// ---------------------------------------------------------------------------

class ProofFormatError : public std::runtime_error {
 public:
  ProofFormatError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

inline std::string aux_text(const ProofNode& n) {
  std::string s;
  if (n.aux) {
    const Step& a = *n.aux;
    switch (a.kind) {
      case Step::Kind::Pick: s = "path=" + path_text(a.path) + " pick=" + std::to_string(a.pick); break;
      case Step::Kind::Advance: s = "path=" + path_text(a.path); break;
      case Step::Kind::Match:
        s = "pos=" + path_text(a.path) + " neg=" + path_text(a.neg_path) + " fresh=" + a.fresh.name;
        break;
      case Step::Kind::Senior: break;
    }
  }
  if (n.senior_index >= 0 && n.senior_index < static_cast<int>(n.premises.size()))
    s = "senior=" + std::to_string(n.premises[static_cast<std::size_t>(n.senior_index)]->id);
  return s;
}

inline std::string write_proof(const ProofPtr& root) {
  std::string out = "cl13-proof v1\n";
  for_each_node(root, [&](const ProofPtr& n) {
    std::string ids;
    for (const auto& p : n->premises) {
      if (!ids.empty()) ids += ",";
      ids += std::to_string(p->id);
    }
    out += std::to_string(n->id) + " | " + print(n->conclusion) + " | " + std::string(rule_name(n->rule)) +
           " | " + ids + " | " + aux_text(*n) + "\n";
  });
  out += "qed " + std::to_string(root->id) + "\n";
  return out;
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline int parse_int(std::string_view s, int line) {
  std::string t = trim(s);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw ProofFormatError(line, "expected a node id, got '" + t + "'");
  return std::stoi(t);
}

}  // namespace detail

// Single-premise nodes without aux data get it inferred from their premise.
inline ProofPtr read_proof(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  bool header = false;
  std::map<int, std::shared_ptr<ProofNode>> nodes;
  std::optional<int> root;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = detail::trim(raw);
    if (l.empty() || l[0] == '#') continue;
    if (!header) {
      if (l != "cl13-proof v1") throw ProofFormatError(line, "missing header 'cl13-proof v1'");
      header = true;
      continue;
    }
    if (root) throw ProofFormatError(line, "content after qed");
    if (l.rfind("qed", 0) == 0) {
      root = detail::parse_int(l.substr(3), line);
      continue;
    }
    // id | formula | RULE | premises | aux ; the formula may itself contain '|'.
    std::size_t first = l.find('|');
    std::size_t c3 = l.rfind('|');
    std::size_t c2 = c3 == std::string::npos || c3 == 0 ? std::string::npos : l.rfind('|', c3 - 1);
    std::size_t c1 = c2 == std::string::npos || c2 == 0 ? std::string::npos : l.rfind('|', c2 - 1);
    if (first == std::string::npos || c1 == std::string::npos || c1 <= first)
      throw ProofFormatError(line, "expected 5 '|'-separated fields");
    int id = detail::parse_int(l.substr(0, first), line);
    std::string ftext = detail::trim(l.substr(first + 1, c1 - first - 1));
    std::string rtext = detail::trim(l.substr(c1 + 1, c2 - c1 - 1));
    std::string ptext = detail::trim(l.substr(c2 + 1, c3 - c2 - 1));
    std::string atext = detail::trim(l.substr(c3 + 1));
    if (nodes.count(id)) throw ProofFormatError(line, "duplicate id " + std::to_string(id));
    auto n = std::make_shared<ProofNode>();
    n->id = id;
    try {
      n->conclusion = parse(ftext);
    } catch (const ParseError& e) {
      throw ProofFormatError(line, std::string("formula: ") + e.what());
    }
    auto r = parse_rule(rtext);
    if (!r) throw ProofFormatError(line, "unknown rule '" + rtext + "'");
    n->rule = *r;
    if (!ptext.empty()) {
      std::istringstream ps(ptext);
      std::string tok;
      while (std::getline(ps, tok, ',')) {
        int pid = detail::parse_int(tok, line);
        auto it = nodes.find(pid);
        if (it == nodes.end()) throw ProofFormatError(line, "premise " + std::to_string(pid) + " not defined earlier");
        n->premises.push_back(it->second);
      }
    }
    std::istringstream as(atext);
    std::string kv;
    Step aux;
    bool have_path = false, have_pick = false, have_match = false;
    while (as >> kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ProofFormatError(line, "bad aux '" + kv + "'");
      std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      try {
        if (k == "path" || k == "pos") {
          aux.path = parse_path(v);
          have_path = true;
          have_match = have_match || k == "pos";
        } else if (k == "pick") {
          aux.pick = detail::parse_int(v, line);
          have_pick = true;
        } else if (k == "neg") {
          aux.neg_path = parse_path(v);
          have_match = true;
        } else if (k == "fresh") {
          aux.fresh = Atom::elementary(v);
          have_match = true;
        } else if (k == "senior") {
          int sid = detail::parse_int(v, line);
          for (std::size_t i = 0; i < n->premises.size(); ++i)
            if (n->premises[i]->id == sid) n->senior_index = static_cast<int>(i);
          if (n->senior_index < 0) throw ProofFormatError(line, "senior id is not a premise");
        } else {
          throw ProofFormatError(line, "unknown aux key '" + k + "'");
        }
      } catch (const std::invalid_argument& e) {
        throw ProofFormatError(line, e.what());
      }
    }
    if (have_match) {
      aux.kind = Step::Kind::Match;
      n->aux = aux;
    } else if (have_pick) {
      aux.kind = Step::Kind::Pick;
      n->aux = aux;
    } else if (have_path) {
      aux.kind = Step::Kind::Advance;
      n->aux = aux;
    }
    if (!n->aux && !is_conjunctive_rule(n->rule) && n->premises.size() == 1)
      n->aux = infer_aux(n->rule, n->conclusion, n->premises.front()->conclusion);
    if ((n->rule == Rule::SQC_ADC || n->rule == Rule::D_SQD_ADD) && n->senior_index < 0) {
      Formula senior = quasielementarize(n->conclusion);
      for (std::size_t i = 0; i < n->premises.size(); ++i)
        if (n->premises[i]->conclusion == senior) n->senior_index = static_cast<int>(i);
    }
    nodes.emplace(id, n);
  }
  if (!header) throw ProofFormatError(line, "missing header 'cl13-proof v1'");
  if (!root) throw ProofFormatError(line, "missing 'qed <root>'");
  auto it = nodes.find(*root);
  if (it == nodes.end()) throw ProofFormatError(line, "qed names unknown node " + std::to_string(*root));
  return it->second;
}

}  // namespace cl13
