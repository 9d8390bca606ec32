#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "formula.hpp"
#include "prover.hpp"
#include "semantics.hpp"

namespace cl13 {

// ---------------------------------------------------------------------------
// Hyperformulas
// ---------------------------------------------------------------------------

struct Hyperformula {
  struct Pseudo {
    Atom origin;  // the general atom the pair replaced
    Atom atom;
    Path pos;
    Path neg;
  };

  Formula base;                   // the root formula with (M) substitutions applied
  std::map<Path, int> underline;  // node path -> underlined component
  std::vector<Pseudo> pseudo;

  bool virgin(const Path& p) const { return !underline.count(p); }

  // Inside a non-underlined component of an underlined choice, or left of a
  // sequential underline.
  bool abandoned(const Path& p) const {
    Path pre;
    for (int step : p) {
      auto it = underline.find(pre);
      if (it != underline.end()) {
        Connective c = at(base, pre).connective();
        if (is_choice(c) && step != it->second) return true;
        if (is_sequential(c) && step < it->second) return true;
      }
      pre.push_back(step);
    }
    return false;
  }

  const Pseudo* pseudo_at(const Path& p) const {
    for (const auto& ps : pseudo)
      if (ps.pos == p || ps.neg == p) return &ps;
    return nullptr;
  }

  static Hyperformula root(const Formula& f) {
    Hyperformula h{f, {}, {}};
    std::function<void(const Formula&, Path&)> go = [&](const Formula& g, Path& p) {
      if (!g.is_nary()) return;
      if (is_sequential(g.connective())) h.underline[p] = 1;
      for (int k = 1; k <= g.arity(); ++k) {
        p.push_back(k);
        go(g.child(k), p);
        p.pop_back();
      }
    };
    Path p;
    go(f, p);
    return h;
  }
};

inline std::string hyper_text(const Hyperformula& h) {
  std::string out;
  std::function<void(const Formula&, Path&)> go = [&](const Formula& g, Path& p) {
    if (!g.is_nary()) {
      print_to(out, g);
      return;
    }
    auto u = h.underline.find(p);
    for (int k = 1; k <= g.arity(); ++k) {
      if (k > 1) {
        out += ' ';
        out += token(g.connective());
        out += ' ';
      }
      bool mark = u != h.underline.end() && u->second == k;
      if (mark) out += '_';
      p.push_back(k);
      if (g.child(k).is_nary()) {
        out += '(';
        go(g.child(k), p);
        out += ')';
      } else {
        go(g.child(k), p);
      }
      p.pop_back();
      if (mark) out += '_';
    }
  };
  Path p;
  go(h.base, p);
  return out;
}

// Which recovery of F(b) from H(b) applies: One for nodes justified by MATCH, ADD,
// SQD, SQC_ADC (and their duals); Two for the toggling rules.
enum class Clause : std::uint8_t { One, Two };

inline Clause clause_for(Rule r) {
  switch (r) {
    case Rule::TGC:
    case Rule::TGD:
    case Rule::D_TGC:
    case Rule::D_TGD: return Clause::Two;
    default: return Clause::One;
  }
}

struct Collapsed {
  Formula f;
  std::map<Path, Path> corr;  // path in F(b) -> path in H(b)
};

inline Collapsed collapse(const Hyperformula& h, Clause clause) {
  Collapsed out;
  std::function<Formula(const Formula&, Path&, Path&)> go = [&](const Formula& g, Path& hp,
                                                                Path& fp) -> Formula {
    auto descend = [&](int k) {
      hp.push_back(k);
      Formula r = go(g.child(k), hp, fp);
      hp.pop_back();
      return r;
    };
    if (!g.is_nary()) {
      out.corr[fp] = hp;
      if (clause == Clause::Two && g.is_lit() && g.atom().is_general()) return Formula::bot();
      return g;
    }
    Connective c = g.connective();
    auto u = h.underline.find(hp);
    const bool marked = u != h.underline.end();
    if (is_choice(c)) {
      if (marked) return descend(u->second);
      if (clause == Clause::Two) {
        out.corr[fp] = hp;
        return c == Connective::ChoAnd ? Formula::top() : Formula::bot();
      }
    } else if (is_sequential(c)) {
      int first = marked ? u->second : 1;
      if (clause == Clause::Two || first == g.arity()) return descend(first);
      out.corr[fp] = hp;
      std::vector<Formula> kids;
      for (int k = first; k <= g.arity(); ++k) {
        fp.push_back(k - first + 1);
        kids.push_back(descend(k));
        fp.pop_back();
      }
      return Formula::nary(c, std::move(kids));
    } else if (is_toggling(c) && marked) {
      if (clause == Clause::One) throw std::logic_error("toggling underline under a non-toggling justification");
      return descend(u->second);
    }
    out.corr[fp] = hp;
    std::vector<Formula> kids;
    for (int k = 1; k <= g.arity(); ++k) {
      fp.push_back(k);
      kids.push_back(descend(k));
      fp.pop_back();
    }
    return Formula::nary(c, std::move(kids));
  };
  Path hp, fp;
  out.f = go(h.base, hp, fp);
  return out;
}

// ---------------------------------------------------------------------------
// Annotated proof trees
// ---------------------------------------------------------------------------

class AnnotationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The proof unfolded into a tree whose edges are individual premise replacements, each
// node carrying H(b). Children are expanded on demand.
class AnnotatedTree {
 public:
  struct Node {
    int id = 0;
    ProofPtr proof;
    int parent = -1;
    int via = -1;  // index into the parent's replacements
    int depth = 0;
    Hyperformula hyper;
    Collapsed corr;
    std::vector<Step> replacements;
    std::vector<int> kids;  // per replacement; -1 until expanded
  };

  explicit AnnotatedTree(ProofPtr root) {
    if (!root) throw AnnotationError("empty proof");
    make(root, -1, -1, Hyperformula::root(root->conclusion));
  }

  std::size_t size() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const Formula& formula() const { return nodes_.front().proof->conclusion; }

  int child(int id, int k) {
    Node& n = nodes_.at(static_cast<std::size_t>(id));
    int& slot = n.kids.at(static_cast<std::size_t>(k));
    if (slot >= 0) return slot;
    const Step s = n.replacements[static_cast<std::size_t>(k)];
    Formula want = apply_step(n.proof->conclusion, s);
    ProofPtr prem;
    for (const auto& p : n.proof->premises)
      if (p->conclusion == want) prem = p;
    if (!prem) throw AnnotationError("node " + std::to_string(n.proof->id) + " lacks premise " + print(want));
    Hyperformula h = step_hyper(n, s);
    int c = make(prem, id, k, std::move(h));
    nodes_[static_cast<std::size_t>(id)].kids[static_cast<std::size_t>(k)] = c;
    return c;
  }

  // Expands every replacement edge; returns the node count.
  std::size_t expand_all(std::size_t limit = 200000) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      for (std::size_t k = 0; k < nodes_[i].replacements.size(); ++k) {
        child(static_cast<int>(i), static_cast<int>(k));
        if (nodes_.size() > limit) throw ResourceExhausted("annotated tree exceeds " + std::to_string(limit) + " nodes");
      }
    }
    return nodes_.size();
  }

  bool is_descendant(int d, int a) const {
    while (d >= 0) {
      if (d == a) return true;
      d = node(d).parent;
    }
    return false;
  }

  bool is_leaf(int id) const { return node(id).replacements.empty(); }

 private:
  std::vector<Node> nodes_;

  int make(ProofPtr p, int parent, int via, Hyperformula h) {
    Node n;
    n.id = static_cast<int>(nodes_.size());
    n.proof = p;
    n.parent = parent;
    n.via = via;
    n.depth = parent < 0 ? 0 : node(parent).depth + 1;
    n.corr = collapse(h, clause_for(p->rule));
    if (n.corr.f != p->conclusion)
      throw AnnotationError("hyperformula " + hyper_text(h) + " does not recover " + print(p->conclusion) +
                            " (got " + print(n.corr.f) + ")");
    n.hyper = std::move(h);
    if (is_conjunctive_rule(p->rule)) {
      auto steps = rule_steps(p->rule, p->conclusion);
      if (!steps) throw AnnotationError("node " + std::to_string(p->id) + " violates its rule");
      n.replacements = *steps;
    } else if (p->aux) {
      n.replacements = {*p->aux};
    } else {
      throw AnnotationError("node " + std::to_string(p->id) + " has no aux data");
    }
    n.kids.assign(n.replacements.size(), -1);
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  static Hyperformula step_hyper(const Node& n, const Step& s) {
    Hyperformula h = n.hyper;
    auto hpath = [&](const Path& fp) {
      auto it = n.corr.corr.find(fp);
      if (it == n.corr.corr.end()) throw AnnotationError("no correspondent for path " + path_text(fp));
      return it->second;
    };
    switch (s.kind) {
      case Step::Kind::Senior: break;
      case Step::Kind::Pick: h.underline[hpath(s.path)] = s.pick; break;
      case Step::Kind::Advance: {
        Path p = hpath(s.path);
        h.underline[p] = h.underline.count(p) ? h.underline[p] + 1 : 2;
        break;
      }
      case Step::Kind::Match: {
        Path pos = hpath(s.path), neg = hpath(s.neg_path);
        Atom origin = at(h.base, pos).atom();
        h.base = replace_at(h.base, pos, Formula::lit(s.fresh, false));
        h.base = replace_at(h.base, neg, Formula::lit(s.fresh, true));
        h.pseudo.push_back({origin, s.fresh, pos, neg});
        break;
      }
    }
    return h;
  }
};

inline AnnotatedTree annotate(const ProofPtr& proof, std::size_t limit = 200000) {
  AnnotatedTree t(proof);
  t.expand_all(limit);
  return t;
}

// ---------------------------------------------------------------------------
// Adequacy (checked at every jump in tests)
// ---------------------------------------------------------------------------

struct AdequacyReport {
  std::vector<int> violated;  // clause numbers 1..6
  std::string detail;
  bool ok() const { return violated.empty(); }
};

// `self` is the player the hyperformula's strategy plays for; clauses 5 and 6 only
// apply to the machine side.
inline AdequacyReport check_adequacy(const Hyperformula& h, const Run& run, Player self,
                                     const GameSpec* game = nullptr) {
  AdequacyReport rep;
  auto bad = [&](int c, const std::string& why) {
    if (std::find(rep.violated.begin(), rep.violated.end(), c) == rep.violated.end()) rep.violated.push_back(c);
    rep.detail += "(" + std::to_string(c) + ") " + why + "; ";
  };
  if (game) {
    Legality l = legal(*game, run);
    if (!l.legal) bad(1, "illegal at " + std::to_string(l.index) + ": " + l.why);
  }
  Tracker t(h.base);
  std::vector<Resolution> res;
  for (const auto& lm : run) {
    Resolution r = t.apply(lm);
    if (r.kind == Resolution::Kind::Illegal) bad(1, "illegal " + lm.move.text() + ": " + r.why);
    res.push_back(r);
  }
  const Shape& sh = t.shape();
  for (std::size_t i = 0; i < sh.size(); ++i) {
    const auto& n = sh.node(static_cast<int>(i));
    if (!n.f.is_nary()) continue;
    Connective c = n.f.connective();
    auto u = h.underline.find(n.path);
    const NodeState& ns = t.state(static_cast<int>(i));
    if (is_choice(c)) {
      if (u != h.underline.end()) {
        if (ns.chosen != u->second) bad(3, "choice at " + path_text(n.path) + " not made as underlined");
      } else if (!h.abandoned(n.path) && ns.chosen) {
        bad(2, "virgin choice at " + path_text(n.path) + " was chosen");
      }
    } else if (!is_parallel(c) && u != h.underline.end() && !h.abandoned(n.path)) {
      if (ns.active != u->second) bad(4, "active component at " + path_text(n.path) + " differs from underline");
    }
  }
  if (self == Player::Machine) {
    for (std::size_t i = 0; i < run.size(); ++i) {
      if (res[i].kind != Resolution::Kind::Inner || run[i].by != Player::Machine) continue;
      const Formula& l = at(h.base, res[i].node);
      if (l.atom().is_general()) bad(5, "machine moved inside general literal at " + path_text(res[i].node));
    }
    for (const auto& ps : h.pseudo) {
      if (h.abandoned(ps.pos) || h.abandoned(ps.neg)) continue;
      Run plus, minus;
      for (std::size_t i = 0; i < run.size(); ++i) {
        if (res[i].kind != Resolution::Kind::Inner || res[i].residual.empty()) continue;
        if (res[i].node == ps.pos) plus.push_back({run[i].by, Move{res[i].residual}});
        if (res[i].node == ps.neg) minus.push_back({run[i].by, Move{res[i].residual}});
      }
      if (!is_delay(plus, negate_run(minus), Player::Machine))
        bad(6, "pseudo pair " + ps.atom.name + " is not a machine-delay copy");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

class Agent {
 public:
  virtual ~Agent() = default;
  // Observes the whole position and returns the moves to make now (empty = pass).
  virtual std::vector<Move> act(const Run& position) = 0;
  virtual std::string name() const = 0;
  // Proof-tree node visits, when the agent follows a proof.
  virtual const std::vector<int>* trace() const { return nullptr; }
};

class SilentAgent : public Agent {
 public:
  std::vector<Move> act(const Run&) override { return {}; }
  std::string name() const override { return "silent"; }
};

// Plays fixed move lists, one list per turn.
class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(std::vector<std::vector<Move>> turns) : turns_(std::move(turns)) {}
  std::vector<Move> act(const Run&) override {
    if (next_ >= turns_.size()) return {};
    return turns_[next_++];
  }
  std::string name() const override { return "scripted"; }

 private:
  std::vector<std::vector<Move>> turns_;
  std::size_t next_ = 0;
};

struct RandomAgentOptions {
  int switch_budget = 3;   // per toggling/sequential node
  int max_moves = 12;      // total moves this agent makes
  double pass_probability = 0.35;
  int max_per_turn = 2;
};

// Uniform over legal moves of the actual game, respecting a per-node switch budget.
class RandomAgent : public Agent {
 public:
  RandomAgent(GameSpec g, Player self, std::uint64_t seed, RandomAgentOptions o = {})
      : g_(std::move(g)), self_(self), rng_(seed), o_(o) {}

  std::vector<Move> act(const Run& position) override {
    std::vector<Move> out;
    Tracker t(g_.tree);
    for (const auto& lm : position) t.apply(lm);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int i = 0; i < o_.max_per_turn && made_ < o_.max_moves; ++i) {
      if (coin(rng_) < o_.pass_probability) break;
      std::vector<Move> options;
      for (auto& m : legal_moves(t, self_)) {
        Resolution r = t.resolve(m);
        if (r.kind == Resolution::Kind::Switch && t.state(r.node).switches >= o_.switch_budget) continue;
        options.push_back(std::move(m));
      }
      if (options.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
      Move m = options[pick(rng_)];
      t.apply({self_, m});
      out.push_back(std::move(m));
      ++made_;
    }
    return out;
  }
  std::string name() const override { return "random"; }

 private:
  GameSpec g_;
  Player self_;
  std::mt19937_64 rng_;
  RandomAgentOptions o_;
  int made_ = 0;
};

// Picks a move the bounded solver rates winning; passes when passing is winning or
// nothing is.
class MinimaxAgent : public Agent {
 public:
  MinimaxAgent(GameSpec g, Player self, int switch_budget = 2, std::size_t node_limit = 200000)
      : g_(std::move(g)), self_(self), solver_({switch_budget, node_limit}) {}

  std::vector<Move> act(const Run& position) override {
    Tracker t(g_.tree);
    for (const auto& lm : position) t.apply(lm);
    try {
      if (solver_.solve(t, opponent(self_), true) == self_) return {};
      for (const auto& m : solver_.candidate_moves(t, self_)) {
        Tracker next = t;
        next.apply({self_, m});
        if (solver_.solve(next, opponent(self_), false) == self_) return {m};
      }
    } catch (const ResourceExhausted&) {
      return {};
    }
    return {};
  }
  std::string name() const override { return "minimax"; }

 private:
  GameSpec g_;
  Player self_;
  BoundedSolver solver_;
};

// WORK (self = Machine, CL13 proof) and COUNTERWORK (self = Environment, dual proof).
class ProofAgent : public Agent {
 public:
  struct Jump {
    int node;
    std::size_t position;  // length of the agent's own view of the run at the jump
  };

  ProofAgent(std::shared_ptr<AnnotatedTree> tree, Player self)
      : tree_(std::move(tree)), self_(self), tracker_(tree_->formula()) {}

  std::vector<Move> act(const Run& position) override {
    out_.clear();
    if (halted_) return {};
    if (!started_) {
      started_ = true;
      jump(0);
      descend();
    }
    for (std::size_t k = seen_; k < position.size() && !halted_; ++k) {
      if (position[k].by == self_) continue;
      observe(position[k]);
    }
    seen_ = position.size();
    return out_;
  }

  std::string name() const override { return self_ == Player::Machine ? "work" : "counterwork"; }
  const std::vector<int>* trace() const override { return &trace_; }

  const std::vector<Jump>& jumps() const { return jumps_; }
  // The run in the order the agent processed it (own reactions right after the moves
  // that caused them).
  const Run& view() const { return view_; }
  int current() const { return cur_; }
  bool halted() const { return halted_; }
  const std::string& violation() const { return violation_; }
  const std::vector<std::string>& anomalies() const { return anomalies_; }
  const AnnotatedTree& tree() const { return *tree_; }

 private:
  std::shared_ptr<AnnotatedTree> tree_;
  Player self_;
  Tracker tracker_;
  Run view_;
  std::vector<Resolution> resolved_;
  std::vector<Move> out_;
  std::vector<int> trace_;
  std::vector<Jump> jumps_;
  std::vector<std::string> anomalies_;
  std::string violation_;
  std::size_t seen_ = 0;
  int cur_ = 0;
  bool started_ = false;
  bool halted_ = false;

  bool machine() const { return self_ == Player::Machine; }
  Player adversary() const { return opponent(self_); }

  void jump(int id) {
    cur_ = id;
    trace_.push_back(id);
    jumps_.push_back({id, view_.size()});
  }

  Path hpath(const AnnotatedTree::Node& n, const Path& fp) const {
    auto it = n.corr.corr.find(fp);
    if (it == n.corr.corr.end()) throw AnnotationError("no correspondent for " + path_text(fp));
    return it->second;
  }

  void emit(const Path& node, std::vector<int> tail) {
    auto addr = tracker_.address(node);
    if (!addr) {
      anomalies_.push_back("unreachable node " + path_text(node));
      return;
    }
    addr->insert(addr->end(), tail.begin(), tail.end());
    LabMove lm{self_, Move{*addr}};
    Resolution r = tracker_.apply(lm);
    if (r.kind == Resolution::Kind::Illegal) anomalies_.push_back("own move " + lm.move.text() + " illegal: " + r.why);
    view_.push_back(lm);
    resolved_.push_back(r);
    out_.push_back(lm.move);
  }

  int find_replacement(const AnnotatedTree::Node& n, const Step& want) const {
    for (std::size_t k = 0; k < n.replacements.size(); ++k) {
      const Step& s = n.replacements[k];
      if (s.kind == want.kind && s.path == want.path && s.pick == want.pick) return static_cast<int>(k);
    }
    return -1;
  }

  // Cases 0-5 (and their duals): act and move up until a leaf is reached.
  void descend() {
    for (;;) {
      const AnnotatedTree::Node& n = tree_->node(cur_);
      const Rule r = n.proof->rule;
      if (machine() == is_dual_rule(r)) throw AnnotationError("proof of the wrong calculus for this role");
      if (n.replacements.empty()) return;  // leaf
      const Step s = n.replacements.front();
      switch (r) {
        case Rule::MATCH: {
          Path pos = hpath(n, s.path), neg = hpath(n, s.neg_path);
          std::vector<std::pair<Path, std::vector<int>>> copies;
          for (std::size_t i = 0; i < view_.size(); ++i) {
            if (view_[i].by != adversary() || resolved_[i].kind != Resolution::Kind::Inner) continue;
            if (resolved_[i].node == pos) copies.push_back({neg, resolved_[i].residual});
          }
          for (std::size_t i = 0; i < view_.size(); ++i) {
            if (view_[i].by != adversary() || resolved_[i].kind != Resolution::Kind::Inner) continue;
            if (resolved_[i].node == neg) copies.push_back({pos, resolved_[i].residual});
          }
          for (auto& [target, tail] : copies) emit(target, tail);
          jump(tree_->child(cur_, 0));
          break;
        }
        case Rule::ADD:
        case Rule::TGD:
        case Rule::D_ADC:
        case Rule::D_TGC: {
          Path h = hpath(n, s.path);
          emit(h, {s.pick});
          jump(tree_->child(cur_, 0));
          break;
        }
        case Rule::SQD:
        case Rule::D_SQC: {
          Path h = hpath(n, s.path);
          auto u = n.hyper.underline.find(h);
          emit(h, {(u == n.hyper.underline.end() ? 1 : u->second) + 1});
          jump(tree_->child(cur_, 0));
          break;
        }
        case Rule::SQC_ADC:
        case Rule::D_SQD_ADD:
          jump(tree_->child(cur_, 0));
          break;
        case Rule::TGC:
        case Rule::D_TGD: {
          // Leftmost surface toggling osubformula: its replacements come first.
          int active = tracker_.active(hpath(n, s.path));
          int k = find_replacement(n, Step{Step::Kind::Pick, s.path, active, {}, {}});
          if (k < 0) throw AnnotationError("no child for the active component");
          jump(tree_->child(cur_, k));
          break;
        }
      }
    }
  }

  void observe(const LabMove& lm) {
    Resolution r = tracker_.apply(lm);
    if (r.kind == Resolution::Kind::Illegal) {
      halted_ = true;
      violation_ = std::string(machine() ? "CleanEnvironmentViolation" : "MachineIllegal") + ": " + lm.move.text() +
                   " (" + r.why + ")";
      return;
    }
    view_.push_back(lm);
    resolved_.push_back(r);

    const AnnotatedTree::Node& n = tree_->node(cur_);
    const Hyperformula& h = n.hyper;
    if (h.abandoned(r.node)) return;

    if (r.kind == Resolution::Kind::Inner) {
      const Hyperformula::Pseudo* ps = h.pseudo_at(r.node);
      if (!ps) return;  // general literal
      const Path& other = ps->pos == r.node ? ps->neg : ps->pos;
      if (h.abandoned(other)) return;  // widowed
      emit(other, r.residual);
      return;
    }

    const Connective c = at(h.base, r.node).connective();
    const Rule junction = machine() ? Rule::SQC_ADC : Rule::D_SQD_ADD;
    const Rule toggle = machine() ? Rule::TGC : Rule::D_TGD;
    const Connective adv_choice = machine() ? Connective::ChoAnd : Connective::ChoOr;
    const Connective adv_seq = machine() ? Connective::SeqAnd : Connective::SeqOr;
    const Connective adv_tog = machine() ? Connective::TogAnd : Connective::TogOr;

    if (r.kind == Resolution::Kind::Choice && c == adv_choice) {
      backtrack_junior(r.node, Step{Step::Kind::Pick, {}, r.value, {}, {}}, junction);
    } else if (r.kind == Resolution::Kind::Switch && c == adv_seq) {
      backtrack_junior(r.node, Step{Step::Kind::Advance, {}, 0, {}, {}}, junction);
    } else if (r.kind == Resolution::Kind::Switch && c == adv_tog && !h.virgin(r.node)) {
      backtrack_toggle(r.node, toggle);
    }
  }

  // Events 1 and 2.
  void backtrack_junior(const Path& x, Step want, Rule junction) {
    int d = tree_->node(cur_).parent;
    while (d >= 0 && tree_->node(d).proof->rule != junction) d = tree_->node(d).parent;
    if (d < 0) {
      anomalies_.push_back("no junction predecessor for " + path_text(x));
      return;
    }
    const AnnotatedTree::Node& dn = tree_->node(d);
    for (std::size_t k = 0; k < dn.replacements.size(); ++k) {
      const Step& s = dn.replacements[k];
      if (s.kind != want.kind || (s.kind == Step::Kind::Pick && s.pick != want.pick)) continue;
      if (hpath(dn, s.path) != x) continue;
      jump(tree_->child(d, static_cast<int>(k)));
      descend();
      return;
    }
    anomalies_.push_back("no junior child for " + path_text(x));
  }

  // Event 3.
  void backtrack_toggle(const Path& x, Rule toggle) {
    int d = tree_->node(cur_).parent;
    while (d >= 0 && !(tree_->node(d).proof->rule == toggle && tree_->node(d).hyper.virgin(x)))
      d = tree_->node(d).parent;
    if (d < 0) {
      anomalies_.push_back("no toggling predecessor for " + path_text(x));
      return;
    }
    const AnnotatedTree::Node& dn = tree_->node(d);
    std::vector<Path> groups;  // F(d) paths of surface toggling osubformulas, left to right
    for (const auto& s : dn.replacements)
      if (groups.empty() || groups.back() != s.path) groups.push_back(s.path);
    std::size_t i = 0;
    while (i < groups.size() && hpath(dn, groups[i]) != x) ++i;
    if (i == groups.size()) {
      anomalies_.push_back("switched osubformula is not surface at the predecessor");
      return;
    }
    const Path& gj = groups[(i + 1) % groups.size()];
    int active = tracker_.active(hpath(dn, gj));
    int k = find_replacement(dn, Step{Step::Kind::Pick, gj, active, {}, {}});
    if (k < 0) {
      anomalies_.push_back("no child for the active component");
      return;
    }
    jump(tree_->child(d, k));
    descend();
  }
};

inline std::shared_ptr<ProofAgent> work_agent(std::shared_ptr<AnnotatedTree> t) {
  return std::make_shared<ProofAgent>(std::move(t), Player::Machine);
}
inline std::shared_ptr<ProofAgent> counterwork_agent(std::shared_ptr<AnnotatedTree> t) {
  return std::make_shared<ProofAgent>(std::move(t), Player::Environment);
}

// ---------------------------------------------------------------------------
// Matches
// ---------------------------------------------------------------------------

// Deepest node b of the trace such that every visit after b's last visit is to a
// descendant of b.
template <class IsDescendant>
int limit_node(const std::vector<int>& trace, IsDescendant&& is_desc, std::function<int(int)> depth) {
  if (trace.empty()) throw std::invalid_argument("limit_node: empty trace");
  std::map<int, std::size_t> last;
  for (std::size_t i = 0; i < trace.size(); ++i) last[trace[i]] = i;
  int best = -1;
  for (const auto& [b, li] : last) {
    bool established = true;
    for (std::size_t j = li + 1; j < trace.size() && established; ++j) established = is_desc(trace[j], b);
    if (established && (best < 0 || depth(b) > depth(best))) best = b;
  }
  return best;
}

inline int limit_node(const std::vector<int>& trace, const AnnotatedTree& t) {
  return limit_node(
      trace, [&](int d, int a) { return t.is_descendant(d, a); }, [&](int b) { return t.node(b).depth; });
}

struct MatchResult {
  Run run;
  Player winner = Player::Machine;
  std::vector<int> trace;
  std::optional<int> limit;
  bool illegal = false;
  std::size_t illegal_index = 0;
  Player offender = Player::Machine;
  std::string note;
  bool budget_exhausted = false;
};

inline MatchResult run_match(const GameSpec& g, Agent& machine, Agent& env, std::size_t budget) {
  if (budget == 0) throw std::invalid_argument("run_match: budget must be positive");
  MatchResult res;
  Tracker t(g.tree);
  int passes = 0;
  Player turn = Player::Machine;
  for (;;) {
    Agent& a = turn == Player::Machine ? machine : env;
    std::vector<Move> ms = a.act(res.run);
    if (ms.empty()) {
      if (++passes >= 2) break;
    } else {
      passes = 0;
      for (const auto& m : ms) {
        if (res.run.size() >= budget) {
          res.budget_exhausted = true;
          break;
        }
        LabMove lm{turn, m};
        Resolution r = t.apply(lm);
        if (r.kind == Resolution::Kind::Illegal || r.kind == Resolution::Kind::Inner) {
          res.illegal = true;
          res.illegal_index = res.run.size();
          res.offender = turn;
          res.note = r.why;
          res.run.push_back(lm);
          res.winner = opponent(turn);
          break;
        }
        res.run.push_back(lm);
      }
      if (res.illegal || res.budget_exhausted) break;
    }
    turn = opponent(turn);
  }
  if (!res.illegal) res.winner = winner_of_state(t);
  for (Agent* a : {&machine, &env}) {
    if (const auto* tr = a->trace(); tr && !tr->empty()) {
      res.trace = *tr;
      if (auto* pa = dynamic_cast<ProofAgent*>(a)) res.limit = limit_node(*tr, pa->tree());
    }
  }
  return res;
}

struct TranscriptHeader {
  std::string formula;
  std::string interpretation;
  std::string machine;
  std::string environment;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
};

inline std::string transcript_text(const TranscriptHeader& h, const MatchResult& r) {
  std::string s = "cl13-transcript v1\n";
  s += "formula: " + h.formula + "\n";
  std::string itp = h.interpretation;
  std::replace(itp.begin(), itp.end(), '\n', ';');
  s += "interpretation: " + itp + "\n";
  s += "machine: " + h.machine + "\n";
  s += "environment: " + h.environment + "\n";
  s += "seed: " + std::to_string(h.seed) + "\n";
  s += "budget: " + std::to_string(h.budget) + "\n";
  s += "run: " + run_text(r.run) + "\n";
  s += "winner: " + std::string(player_name(r.winner)) + "\n";
  std::string tr;
  for (int id : r.trace) tr += (tr.empty() ? "" : " ") + std::to_string(id);
  s += "trace: " + tr + "\n";
  s += "limit: " + (r.limit ? std::to_string(*r.limit) : std::string("-")) + "\n";
  if (r.illegal)
    s += "illegal: " + std::to_string(r.illegal_index) + " by " + std::string(player_name(r.offender)) + " (" +
         r.note + ")\n";
  return s;
}

}  // namespace cl13
