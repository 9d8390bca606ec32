#pragma once

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "formula.hpp"

namespace cl13 {

// ---------------------------------------------------------------------------
// Players, moves, runs
// ---------------------------------------------------------------------------

enum class Player : std::uint8_t { Machine, Environment };

inline constexpr Player opponent(Player p) {
  return p == Player::Machine ? Player::Environment : Player::Machine;
}
inline constexpr char player_char(Player p) { return p == Player::Machine ? 'M' : 'E'; }
inline constexpr std::string_view player_name(Player p) {
  return p == Player::Machine ? "Machine" : "Environment";
}

// Dot-separated indices; the last one is the token (switch or choice), the rest the
// address of the subgame.
struct Move {
  std::vector<int> steps;

  int token() const { return steps.back(); }
  std::vector<int> prefix() const { return {steps.begin(), steps.end() - 1}; }
  std::string text() const { return path_text(steps); }

  static Move parse(std::string_view s) {
    Move m{parse_path(s)};
    if (m.steps.empty()) throw std::invalid_argument("empty move");
    return m;
  }
  friend bool operator==(const Move&, const Move&) = default;
};

struct LabMove {
  Player by = Player::Machine;
  Move move;
  friend bool operator==(const LabMove&, const LabMove&) = default;
};

using Run = std::vector<LabMove>;

inline std::string run_text(const Run& r) {
  std::string s;
  for (const auto& lm : r) {
    if (!s.empty()) s += ' ';
    s += player_char(lm.by);
    s += ':';
    s += lm.move.text();
  }
  return s;
}

inline Run parse_run(std::string_view text) {
  Run r;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    if (tok.size() < 3 || tok[1] != ':' || (tok[0] != 'M' && tok[0] != 'E'))
      throw std::invalid_argument("bad labmove '" + tok + "'");
    r.push_back({tok[0] == 'M' ? Player::Machine : Player::Environment, Move::parse(tok.substr(2))});
  }
  return r;
}

inline Run project(const Run& r, int step) {
  Run out;
  for (const auto& lm : r) {
    if (lm.move.steps.size() >= 2 && lm.move.steps.front() == step)
      out.push_back({lm.by, Move{{lm.move.steps.begin() + 1, lm.move.steps.end()}}});
  }
  return out;
}

inline Run negate_run(const Run& r) {
  Run out = r;
  for (auto& lm : out) lm.by = opponent(lm.by);
  return out;
}

// ---------------------------------------------------------------------------
// Game specs and interpretations
// ---------------------------------------------------------------------------

// A closed game: a formula whose only leaves are 1 (won by Machine) and 0.
struct GameSpec {
  Formula tree;

  static GameSpec from(Formula f) {
    bool closed = true;
    for_each_literal(f, [&](const Formula&) { closed = false; });
    if (!closed) throw std::invalid_argument("game spec must not contain atoms: " + print(f));
    return GameSpec{std::move(f)};
  }
  static GameSpec leaf(bool v) { return GameSpec{v ? Formula::top() : Formula::bot()}; }
  static GameSpec parse(std::string_view s) { return from(cl13::parse(s)); }

  friend bool operator==(const GameSpec&, const GameSpec&) = default;
};

inline GameSpec dual(const GameSpec& g) { return GameSpec{negate(g.tree)}; }

struct Interpretation {
  std::map<std::string, bool> elem;
  std::map<std::string, GameSpec> gen;
};

inline Formula substitute(const Formula& f, const Interpretation& itp) {
  switch (f.kind()) {
    case Formula::Kind::Top:
    case Formula::Kind::Bot: return f;
    case Formula::Kind::Lit: {
      const Atom& a = f.atom();
      Formula g;
      if (a.is_general()) {
        auto it = itp.gen.find(a.name);
        if (it == itp.gen.end()) throw std::invalid_argument("interpretation misses general atom " + a.name);
        g = it->second.tree;
      } else {
        auto it = itp.elem.find(a.name);
        if (it == itp.elem.end()) throw std::invalid_argument("interpretation misses elementary atom " + a.name);
        g = it->second ? Formula::top() : Formula::bot();
      }
      return f.negated() ? negate(g) : g;
    }
    case Formula::Kind::Nary: break;
  }
  std::vector<Formula> kids;
  for (const auto& k : f.children()) kids.push_back(substitute(k, itp));
  return Formula::nary(f.connective(), std::move(kids));
}

inline GameSpec interpret(const Formula& f, const Interpretation& itp) {
  return GameSpec{substitute(f, itp)};
}

// Lines `p = true|false|1|0` and `P = <closed formula>`; '#' starts a comment.
inline Interpretation parse_interpretation(std::string_view text) {
  Interpretation itp;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto eq = line.find('=');
    auto blank = line.find_first_not_of(" \t\r");
    if (blank == std::string::npos) continue;
    if (eq == std::string::npos) throw std::invalid_argument("interpretation line " + std::to_string(n) + ": expected '='");
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string name = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (name.empty()) throw std::invalid_argument("interpretation line " + std::to_string(n) + ": missing atom");
    if (std::isupper(static_cast<unsigned char>(name[0]))) {
      itp.gen[name] = GameSpec::parse(value);
    } else if (value == "true" || value == "1") {
      itp.elem[name] = true;
    } else if (value == "false" || value == "0") {
      itp.elem[name] = false;
    } else {
      throw std::invalid_argument("interpretation line " + std::to_string(n) + ": expected a boolean for " + name);
    }
  }
  return itp;
}

inline std::string interpretation_text(const Interpretation& itp) {
  std::string s;
  for (const auto& [k, v] : itp.elem) s += k + " = " + (v ? "true" : "false") + "\n";
  for (const auto& [k, v] : itp.gen) s += k + " = " + print(v.tree) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Position tracking
// ---------------------------------------------------------------------------

// Preorder index of a formula's nodes.
class Shape {
 public:
  struct Node {
    Formula f;
    Path path;
    int parent = -1;
    std::vector<int> kids;
  };

  explicit Shape(const Formula& root) {
    add(root, {}, -1);
  }

  const Formula& root() const { return nodes_.front().f; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return nodes_.size(); }
  int find(const Path& p) const {
    auto it = index_.find(p);
    return it == index_.end() ? -1 : it->second;
  }
  int child(int i, int k) const { return node(i).kids.at(static_cast<std::size_t>(k - 1)); }

 private:
  std::vector<Node> nodes_;
  std::map<Path, int> index_;

  int add(const Formula& f, Path p, int parent) {
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back({f, p, parent, {}});
    index_.emplace(p, id);
    if (f.is_nary()) {
      for (int k = 1; k <= f.arity(); ++k) {
        Path q = p;
        q.push_back(k);
        int c = add(f.child(k), q, id);
        nodes_[static_cast<std::size_t>(id)].kids.push_back(c);
      }
    }
    return id;
  }
};

inline Player owner(Connective c) { return is_conjunctive(c) ? Player::Environment : Player::Machine; }

struct NodeState {
  int chosen = 0;  // choice nodes: chosen component, 0 = none yet
  int active = 1;  // toggling/sequential nodes
  int switches = 0;
  friend bool operator==(const NodeState&, const NodeState&) = default;
};

// What a move means relative to a position.
struct Resolution {
  enum class Kind : std::uint8_t { Choice, Switch, Inner, Illegal };
  Kind kind = Kind::Illegal;
  Path node;                 // target node (formula path, choice steps included)
  int value = 0;             // chosen/switched-to component
  std::vector<int> residual; // Inner: the move relative to the literal at `node`
  std::string why;           // Illegal
};

// Incremental legality/position state over a formula tree. Literal leaves are opaque
// subgames: moves reaching them resolve to Inner.
class Tracker {
 public:
  explicit Tracker(const Formula& root)
      : shape_(std::make_shared<const Shape>(root)), st_(shape_->size()) {}

  const Shape& shape() const { return *shape_; }
  const NodeState& state(int node) const { return st_[static_cast<std::size_t>(node)]; }
  const NodeState& state(const Path& p) const { return st_.at(static_cast<std::size_t>(index(p))); }
  int active(const Path& p) const { return state(p).active; }
  int chosen(const Path& p) const { return state(p).chosen; }

  int index(const Path& p) const {
    int i = shape_->find(p);
    if (i < 0) throw std::out_of_range("no node at " + path_text(p));
    return i;
  }

  Resolution resolve(const Move& m) const {
    Resolution r;
    int cur = 0;
    std::size_t i = 0;
    const auto& s = m.steps;
    if (s.empty()) {
      r.why = "empty move";
      return r;
    }
    for (;;) {
      const Shape::Node& n = shape_->node(cur);
      const Formula& f = n.f;
      r.node = n.path;
      if (f.is_nary() && is_choice(f.connective())) {
        const NodeState& ns = st_[static_cast<std::size_t>(cur)];
        if (ns.chosen) {
          cur = shape_->child(cur, ns.chosen);
          continue;
        }
        if (i + 1 == s.size()) {
          r.kind = Resolution::Kind::Choice;
          r.value = s[i];
          return r;
        }
        r.why = "move inside an unchosen choice component";
        return r;
      }
      if (!f.is_nary()) {
        if (f.is_lit()) {
          r.kind = Resolution::Kind::Inner;
          r.residual.assign(s.begin() + static_cast<long>(i), s.end());
          return r;
        }
        r.why = "no moves are possible in an elementary game";
        return r;
      }
      if (i + 1 == s.size()) {
        r.kind = Resolution::Kind::Switch;
        r.value = s[i];
        return r;
      }
      int k = s[i];
      if (k < 1 || k > f.arity()) {
        r.why = "component " + std::to_string(k) + " out of range";
        return r;
      }
      cur = shape_->child(cur, k);
      ++i;
    }
  }

  // Applies a labmove; on an illegal move returns the Illegal resolution and leaves the
  // state unchanged.
  Resolution apply(const LabMove& lm) {
    Resolution r = resolve(lm.move);
    if (r.kind == Resolution::Kind::Illegal || r.kind == Resolution::Kind::Inner) return r;
    int idx = index(r.node);
    const Formula& f = shape_->node(idx).f;
    NodeState& ns = st_[static_cast<std::size_t>(idx)];
    Connective c = f.connective();
    auto illegal = [&](std::string why) {
      r.kind = Resolution::Kind::Illegal;
      r.why = std::move(why);
      return r;
    };
    if (r.value < 1 || r.value > f.arity()) return illegal("component " + std::to_string(r.value) + " out of range");
    if (r.kind == Resolution::Kind::Choice) {
      if (owner(c) != lm.by) return illegal("choice belongs to " + std::string(player_name(owner(c))));
      ns.chosen = r.value;
      return r;
    }
    if (is_parallel(c)) return illegal("parallel combinations have no switch moves");
    if (owner(c) != lm.by) return illegal("switch belongs to " + std::string(player_name(owner(c))));
    if (is_sequential(c) && r.value != ns.active + 1)
      return illegal("sequential switch must go to component " + std::to_string(ns.active + 1));
    ns.active = r.value;
    ++ns.switches;
    return r;
  }

  // Move prefix addressing the node at `p`, or nullopt when an enclosing choice has
  // not been resolved toward it.
  std::optional<std::vector<int>> address(const Path& p) const {
    std::vector<int> out;
    int cur = 0;
    for (int step : p) {
      const Formula& f = shape_->node(cur).f;
      if (!f.is_nary() || step < 1 || step > f.arity()) return std::nullopt;
      if (is_choice(f.connective())) {
        if (st_[static_cast<std::size_t>(cur)].chosen != step) return std::nullopt;
      } else {
        out.push_back(step);
      }
      cur = shape_->child(cur, step);
    }
    return out;
  }

  // Compact key of the game-relevant state.
  std::string key() const {
    std::string k;
    for (std::size_t i = 0; i < st_.size(); ++i) {
      const Formula& f = shape_->node(static_cast<int>(i)).f;
      if (!f.is_nary() || is_parallel(f.connective())) continue;
      k += std::to_string(st_[i].chosen) + ',' + std::to_string(st_[i].active) + ',' +
           std::to_string(st_[i].switches) + ';';
    }
    return k;
  }

 private:
  std::shared_ptr<const Shape> shape_;
  std::vector<NodeState> st_;
};

// ---------------------------------------------------------------------------
// Legality and winning
// ---------------------------------------------------------------------------

struct Legality {
  bool legal = true;
  std::size_t index = 0;  // first illegal labmove
  Player offender = Player::Machine;
  std::string why;
};

inline Legality legal(const GameSpec& g, const Run& run) {
  Tracker t(g.tree);
  for (std::size_t i = 0; i < run.size(); ++i) {
    Resolution r = t.apply(run[i]);
    if (r.kind == Resolution::Kind::Illegal) return {false, i, run[i].by, r.why};
    if (r.kind == Resolution::Kind::Inner) return {false, i, run[i].by, "move into an atom"};
  }
  return {};
}

inline Player winner_of_state(const Tracker& t, int node = 0) {
  const Formula& f = t.shape().node(node).f;
  switch (f.kind()) {
    case Formula::Kind::Top: return Player::Machine;
    case Formula::Kind::Bot: return Player::Environment;
    case Formula::Kind::Lit: throw std::invalid_argument("winner: unresolved atom " + f.atom().name);
    case Formula::Kind::Nary: break;
  }
  Connective c = f.connective();
  const NodeState& ns = t.state(node);
  if (is_parallel(c)) {
    Player want = c == Connective::ParAnd ? Player::Environment : Player::Machine;
    for (int k = 1; k <= f.arity(); ++k)
      if (winner_of_state(t, t.shape().child(node, k)) == want) return want;
    return opponent(want);
  }
  if (is_choice(c)) {
    if (!ns.chosen) return opponent(owner(c));
    return winner_of_state(t, t.shape().child(node, ns.chosen));
  }
  return winner_of_state(t, t.shape().child(node, ns.active));
}

inline Player winner(const GameSpec& g, const Run& run) {
  Tracker t(g.tree);
  for (std::size_t i = 0; i < run.size(); ++i) {
    Resolution r = t.apply(run[i]);
    if (r.kind == Resolution::Kind::Illegal || r.kind == Resolution::Kind::Inner)
      throw std::invalid_argument("winner: illegal move " + std::to_string(i) + " (" + r.why + ")");
  }
  return winner_of_state(t);
}

// Winner with the convention that the first illegal mover loses.
inline Player outcome(const GameSpec& g, const Run& run) {
  Legality l = legal(g, run);
  if (!l.legal) return opponent(l.offender);
  return winner(g, run);
}

namespace detail {

inline void collect_moves(const Tracker& t, int node, std::vector<int>& addr, Player by,
                          std::vector<Move>& out) {
  const Formula& f = t.shape().node(node).f;
  if (!f.is_nary()) return;
  Connective c = f.connective();
  const NodeState& ns = t.state(node);
  if (is_choice(c)) {
    if (ns.chosen) {
      collect_moves(t, t.shape().child(node, ns.chosen), addr, by, out);
    } else if (owner(c) == by) {
      for (int k = 1; k <= f.arity(); ++k) {
        addr.push_back(k);
        out.push_back(Move{addr});
        addr.pop_back();
      }
    }
    return;
  }
  if (owner(c) == by && !is_parallel(c)) {
    if (is_toggling(c)) {
      for (int k = 1; k <= f.arity(); ++k) {
        addr.push_back(k);
        out.push_back(Move{addr});
        addr.pop_back();
      }
    } else if (ns.active < f.arity()) {
      addr.push_back(ns.active + 1);
      out.push_back(Move{addr});
      addr.pop_back();
    }
  }
  for (int k = 1; k <= f.arity(); ++k) {
    addr.push_back(k);
    collect_moves(t, t.shape().child(node, k), addr, by, out);
    addr.pop_back();
  }
}

}  // namespace detail

inline std::vector<Move> legal_moves(const Tracker& t, Player by) {
  std::vector<Move> out;
  std::vector<int> addr;
  detail::collect_moves(t, 0, addr, by, out);
  return out;
}

inline std::vector<Move> legal_moves(const GameSpec& g, const Run& position, Player by) {
  Tracker t(g.tree);
  for (const auto& lm : position) {
    Resolution r = t.apply(lm);
    if (r.kind == Resolution::Kind::Illegal || r.kind == Resolution::Kind::Inner)
      throw std::invalid_argument("legal_moves: illegal position");
  }
  return legal_moves(t, by);
}

// ---------------------------------------------------------------------------
// Delays
// ---------------------------------------------------------------------------

// omega is a p-delay of gamma: same per-player move sequences, and p's moves in omega
// never come earlier (relative to the opponent's moves) than in gamma.
inline bool is_delay(const Run& omega, const Run& gamma, Player p) {
  auto split = [](const Run& r, Player who) {
    std::vector<Move> ms;
    for (const auto& lm : r)
      if (lm.by == who) ms.push_back(lm.move);
    return ms;
  };
  if (omega.size() != gamma.size()) return false;
  if (split(omega, p) != split(gamma, p) || split(omega, opponent(p)) != split(gamma, opponent(p))) return false;
  // For the k-th p-move, the number of opponent moves before it.
  auto before = [&](const Run& r) {
    std::vector<int> out;
    int others = 0;
    for (const auto& lm : r) {
      if (lm.by == p)
        out.push_back(others);
      else
        ++others;
    }
    return out;
  };
  auto a = before(omega), b = before(gamma);
  for (std::size_t k = 0; k < a.size(); ++k)
    if (b[k] > a[k]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Bounded solver
// ---------------------------------------------------------------------------

struct SolveOptions {
  int switch_budget = 2;
  std::size_t node_limit = 2000000;
};

// Minimax over the move-or-pass game: players alternate turns (Machine first), each
// either passing or making one legal move; two consecutive passes end the play. Every
// toggling/sequential node takes at most switch_budget switches. Switches to the
// already active component are omitted: they never change the outcome.
class BoundedSolver {
 public:
  explicit BoundedSolver(SolveOptions o) : o_(o) {}

  Player solve(const Tracker& t, Player to_move, bool prev_passed) {
    std::string key = t.key();
    key += player_char(to_move);
    key += prev_passed ? 'p' : '-';
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= o_.node_limit)
      throw ResourceExhausted("bounded solver exceeded " + std::to_string(o_.node_limit) + " positions");
    Player result = opponent(to_move);
    Player on_pass = prev_passed ? winner_of_state(t) : solve(t, opponent(to_move), true);
    if (on_pass == to_move) {
      result = to_move;
    } else {
      for (const auto& m : candidate_moves(t, to_move)) {
        Tracker next = t;
        next.apply({to_move, m});
        if (solve(next, opponent(to_move), false) == to_move) {
          result = to_move;
          break;
        }
      }
    }
    memo_.emplace(std::move(key), result);
    return result;
  }

  std::vector<Move> candidate_moves(const Tracker& t, Player who) const {
    std::vector<Move> out;
    for (auto& m : legal_moves(t, who)) {
      Resolution r = t.resolve(m);
      if (r.kind == Resolution::Kind::Switch) {
        const NodeState& ns = t.state(r.node);
        if (ns.switches >= o_.switch_budget || ns.active == r.value) continue;
      }
      out.push_back(std::move(m));
    }
    return out;
  }

  std::size_t positions() const { return memo_.size(); }

 private:
  SolveOptions o_;
  std::unordered_map<std::string, Player> memo_;
};

inline Player solve_bounded(const GameSpec& g, int switch_budget, std::size_t node_limit = 2000000) {
  BoundedSolver s({switch_budget, node_limit});
  return s.solve(Tracker(g.tree), Player::Machine, false);
}

}  // namespace cl13
