#include <gtest/gtest.h>

#include <algorithm>
#include <optional>
#include <random>

#include "cl13/semantics.hpp"
#include "support/generators.hpp"

using namespace cl13;

namespace {

// Reference semantics straight from the projection-based definitions. nullopt = illegal.
std::optional<Player> reference(const Formula& f, const cl13::Run& run) {
  if (!f.is_nary()) {
    if (!run.empty()) return std::nullopt;
    return f.is_top() ? Player::Machine : Player::Environment;
  }
  const Connective c = f.connective();
  const int n = f.arity();
  const Player own = is_conjunctive(c) ? Player::Environment : Player::Machine;
  if (is_choice(c)) {
    if (run.empty()) return opponent(own);
    const auto& first = run.front();
    if (first.by != own || first.move.steps.size() != 1) return std::nullopt;
    int k = first.move.steps[0];
    if (k < 1 || k > n) return std::nullopt;
    return reference(f.child(k), cl13::Run(run.begin() + 1, run.end()));
  }
  int active = 1;
  for (const auto& lm : run) {
    const auto& s = lm.move.steps;
    if (s.front() < 1 || s.front() > n) return std::nullopt;
    if (s.size() > 1) continue;
    if (is_parallel(c) || lm.by != own) return std::nullopt;
    if (is_sequential(c) && s[0] != active + 1) return std::nullopt;
    active = s[0];
  }
  std::vector<Player> results;
  for (int i = 1; i <= n; ++i) {
    auto w = reference(f.child(i), project(run, i));
    if (!w) return std::nullopt;
    results.push_back(*w);
  }
  if (is_parallel(c)) {
    auto machine = [](Player w) { return w == Player::Machine; };
    bool won = c == Connective::ParAnd ? std::all_of(results.begin(), results.end(), machine)
                                       : std::any_of(results.begin(), results.end(), machine);
    return won ? Player::Machine : Player::Environment;
  }
  return results[static_cast<std::size_t>(active - 1)];
}

std::vector<Move> all_moves(int depth, int width) {
  std::vector<Move> out;
  std::vector<Move> layer{Move{}};
  for (int d = 0; d < depth; ++d) {
    std::vector<Move> next;
    for (const auto& m : layer)
      for (int k = 1; k <= width; ++k) {
        Move x = m;
        x.steps.push_back(k);
        next.push_back(x);
        out.push_back(x);
      }
    layer = std::move(next);
  }
  return out;
}

std::vector<std::string> texts(const std::vector<Move>& ms) {
  std::vector<std::string> out;
  for (const auto& m : ms) out.push_back(m.text());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Interpret, Examples) {
  Interpretation itp;
  itp.elem["p"] = true;
  EXPECT_EQ(interpret(parse("~p | p"), itp).tree, parse("0 | 1"));

  Interpretation gen;
  gen.gen["P"] = GameSpec::parse("1 !| 0");
  EXPECT_EQ(interpret(parse("~P"), gen).tree, parse("0 !& 1"));

  EXPECT_THROW(interpret(parse("p | q"), itp), std::invalid_argument);
  EXPECT_THROW(GameSpec::parse("p | 1"), std::invalid_argument);
}

TEST(Interpret, NegationIsDual) {
  std::mt19937_64 rng(3);
  cl13::testing::FormulaGen g;
  g.general = {"P", "Q"};
  for (int i = 0; i < 200; ++i) {
    Formula f = cl13::testing::random_formula(rng, g);
    Interpretation itp;
    for (const char* a : {"p", "q", "r", "s"}) itp.elem[a] = std::bernoulli_distribution(0.5)(rng);
    itp.gen["P"] = cl13::testing::random_game(rng, 3);
    itp.gen["Q"] = cl13::testing::random_game(rng, 3);
    EXPECT_EQ(interpret(negate(f), itp), dual(interpret(f, itp))) << print(f);
  }
}

TEST(Interpret, Text) {
  auto itp = parse_interpretation("p = true\nq=0  # comment\n\nP = 1 !| 0\n");
  EXPECT_EQ(itp.elem, (std::map<std::string, bool>{{"p", true}, {"q", false}}));
  EXPECT_EQ(itp.gen.at("P").tree, parse("1 !| 0"));
  EXPECT_EQ(parse_interpretation(interpretation_text(itp)).gen.at("P"), itp.gen.at("P"));
  EXPECT_THROW(parse_interpretation("p = maybe"), std::invalid_argument);
  EXPECT_THROW(parse_interpretation("p"), std::invalid_argument);
}

TEST(Runs, TextRoundTrip) {
  cl13::Run r = parse_run("M:1.1 E:2.1.1 M:2");
  EXPECT_EQ(r.size(), 3u);
  EXPECT_EQ(run_text(r), "M:1.1 E:2.1.1 M:2");
  EXPECT_EQ(run_text(negate_run(r)), "E:1.1 M:2.1.1 E:2");
  EXPECT_THROW(parse_run("X:1"), std::invalid_argument);
  EXPECT_THROW(Move::parse(""), std::invalid_argument);
}

TEST(Legal, Examples) {
  auto g = GameSpec::parse("(1 !| 0) & ((1 !& 0) %| (0 !& 1))");
  EXPECT_TRUE(legal(g, parse_run("M:1.1 E:2.1.1 M:2.2 E:2.2.2 M:2.1")).legal);

  auto l = legal(GameSpec::parse("1 %| 0"), parse_run("E:1"));
  EXPECT_FALSE(l.legal);
  EXPECT_EQ(l.index, 0u);
  EXPECT_EQ(l.offender, Player::Environment);

  l = legal(GameSpec::parse("1 $& 0 $& 1"), parse_run("E:3"));
  EXPECT_FALSE(l.legal);
  EXPECT_EQ(l.offender, Player::Environment);
  EXPECT_TRUE(legal(GameSpec::parse("1 $& 0 $& 1"), parse_run("E:2 E:3")).legal);

  l = legal(GameSpec::parse("1 !| 0"), parse_run("M:1 E:1"));
  EXPECT_FALSE(l.legal);
  EXPECT_EQ(l.index, 1u);
}

TEST(Winner, Examples) {
  EXPECT_EQ(winner(GameSpec::leaf(true), {}), Player::Machine);
  EXPECT_EQ(winner(GameSpec::parse("1 !| 1"), {}), Player::Environment);
  EXPECT_EQ(winner(GameSpec::parse("0 !& 0"), {}), Player::Machine);
  EXPECT_EQ(winner(GameSpec::parse("0 %| 1"), parse_run("M:2")), Player::Machine);
  EXPECT_EQ(winner(GameSpec::parse("0 %| 1"), {}), Player::Environment);
  EXPECT_THROW(winner(GameSpec::parse("0 %| 1"), parse_run("E:2")), std::invalid_argument);
  EXPECT_EQ(outcome(GameSpec::parse("0 %| 1"), parse_run("E:2")), Player::Machine);
}

TEST(Project, Examples) {
  EXPECT_EQ(run_text(project(parse_run("M:1.1 E:2.1.1"), 2)), "E:1.1");
  EXPECT_TRUE(project({}, 1).empty());
  cl13::Run r = parse_run("M:1.1 E:2.1.1 M:2.2 E:2.2.2 M:2.1");
  Tracker t(parse("(1 !| 0) & ((1 !& 0) %| (0 !& 1))"));
  for (const auto& lm : r) t.apply(lm);
  EXPECT_EQ(t.active({2}), 1);
  EXPECT_EQ(t.state(Path{2}).switches, 2);
}

TEST(LegalMoves, Examples) {
  auto cho = GameSpec::parse("1 !| 0");
  EXPECT_EQ(texts(legal_moves(cho, {}, Player::Machine)), (std::vector<std::string>{"1", "2"}));
  EXPECT_TRUE(legal_moves(cho, {}, Player::Environment).empty());
  auto tog = legal_moves(GameSpec::parse("1 %| 0"), {}, Player::Machine);
  EXPECT_EQ(texts(tog), (std::vector<std::string>{"1", "2"}));
  EXPECT_TRUE(legal_moves(GameSpec::leaf(true), {}, Player::Machine).empty());
}

TEST(Delay, Examples) {
  cl13::Run gamma = parse_run("M:1 E:2");
  EXPECT_TRUE(is_delay(gamma, gamma, Player::Machine));
  EXPECT_TRUE(is_delay(parse_run("E:2 M:1"), gamma, Player::Machine));
  EXPECT_FALSE(is_delay(gamma, parse_run("E:2 M:1"), Player::Machine));
  EXPECT_FALSE(is_delay(parse_run("M:1 E:3"), gamma, Player::Machine));
  EXPECT_FALSE(is_delay(parse_run("M:1"), gamma, Player::Machine));
}

TEST(Solver, Examples) {
  EXPECT_EQ(solve_bounded(GameSpec::leaf(true), 0), Player::Machine);
  Interpretation itp;
  itp.elem["p"] = true;
  EXPECT_EQ(solve_bounded(interpret(parse("~p %| p"), itp), 1), Player::Machine);
  EXPECT_EQ(solve_bounded(interpret(parse("~p %| p"), itp), 0), Player::Environment);
  for (bool pv : {false, true})
    for (bool qv : {false, true}) {
      Interpretation i2;
      i2.elem = {{"p", pv}, {"q", qv}};
      // One component is always true and the machine owns the switches.
      EXPECT_EQ(solve_bounded(interpret(parse("~(p & q) %| (p & q)"), i2), 2), Player::Machine);
      // The environment picks the false component of the toggling conjunction.
      EXPECT_EQ(solve_bounded(interpret(parse("~(p & q) %& (p & q)"), i2), 2), Player::Environment);
    }
  EXPECT_EQ(solve_bounded(GameSpec::parse("(0 !| 1) & (1 !& 0)"), 1), Player::Environment);
  EXPECT_EQ(solve_bounded(GameSpec::parse("(0 !| 1) | (1 !& 0)"), 1), Player::Machine);
}

TEST(Solver, NodeLimit) {
  EXPECT_THROW(solve_bounded(GameSpec::parse("(0 %| 1 %| 0) & (1 %& 0 %& 1) & (0 !| 1)"), 3, 5), ResourceExhausted);
}

class SemanticsProperties : public ::testing::TestWithParam<int> {};

TEST_P(SemanticsProperties, AgreesWithReference) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  int legal_runs = 0;
  for (int i = 0; i < 400; ++i) {
    GameSpec g = cl13::testing::random_game(rng, 5);
    cl13::Run run = cl13::testing::random_run(g, rng, 8, 0.2);
    SCOPED_TRACE(print(g.tree) + " / " + run_text(run));
    auto ref = reference(g.tree, run);
    Legality l = legal(g, run);
    ASSERT_EQ(l.legal, ref.has_value());
    if (l.legal) {
      ++legal_runs;
      EXPECT_EQ(winner(g, run), *ref);
      EXPECT_EQ(winner(g, run), winner(g, run));
    } else {
      cl13::Run before(run.begin(), run.begin() + static_cast<long>(l.index));
      cl13::Run through(run.begin(), run.begin() + static_cast<long>(l.index) + 1);
      EXPECT_TRUE(reference(g.tree, before).has_value());
      EXPECT_FALSE(reference(g.tree, through).has_value());
      EXPECT_EQ(l.offender, run[l.index].by);
    }
  }
  EXPECT_GT(legal_runs, 50);
}

TEST_P(SemanticsProperties, LegalMovesAreComplete) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 50);
  const auto candidates = all_moves(4, 3);
  for (int i = 0; i < 60; ++i) {
    GameSpec g = cl13::testing::random_game(rng, 4);
    cl13::Run pos = cl13::testing::random_run(g, rng, 5, 0.0);
    if (!legal(g, pos).legal) continue;
    for (Player by : {Player::Machine, Player::Environment}) {
      auto listed = texts(legal_moves(g, pos, by));
      for (const auto& m : candidates) {
        cl13::Run ext = pos;
        ext.push_back({by, m});
        bool ok = legal(g, ext).legal;
        bool in = std::binary_search(listed.begin(), listed.end(), m.text());
        EXPECT_EQ(ok, in) << print(g.tree) << " after " << run_text(pos) << ": " << player_char(by) << m.text();
      }
    }
  }
}

TEST_P(SemanticsProperties, SolverAgreesOnChoiceOnlyGames) {
  // Without toggling or sequential nodes the game is a finite choice tree and its value
  // is plain minimax over the choices.
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 90);
  cl13::testing::FormulaGen fg;
  fg.constant_probability = 1.0;
  fg.max_connectives = 5;
  fg.connectives = {Connective::ChoAnd, Connective::ChoOr};
  std::function<Player(const Formula&)> value = [&](const Formula& f) -> Player {
    if (!f.is_nary()) return f.is_top() ? Player::Machine : Player::Environment;
    Player own = owner(f.connective());
    for (const auto& k : f.children())
      if (value(k) == own) return own;
    return opponent(own);
  };
  for (int i = 0; i < 100; ++i) {
    GameSpec g{cl13::testing::random_formula(rng, fg)};
    EXPECT_EQ(solve_bounded(g, 0), value(g.tree)) << print(g.tree);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SemanticsProperties, ::testing::Range(1, 5));
