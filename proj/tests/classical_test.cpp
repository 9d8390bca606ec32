#include <gtest/gtest.h>

#include <random>

#include "cl13/classical.hpp"
#include "support/generators.hpp"

using namespace cl13;

TEST(Eval, Examples) {
  EXPECT_TRUE(eval(parse("1"), {}));
  EXPECT_TRUE(eval(parse("(s & 1) | (~s | 0)"), {{"s", false}}));
  EXPECT_FALSE(eval(parse("p & ~p"), {{"p", true}}));
}

TEST(Eval, Errors) {
  EXPECT_THROW(eval(parse("p | q"), {{"p", false}}), std::invalid_argument);
  EXPECT_THROW(eval(parse("p %| q"), {{"p", true}, {"q", true}}), std::invalid_argument);
  EXPECT_THROW(eval(parse("P"), {}), std::invalid_argument);
}

TEST(Tautology, Examples) {
  EXPECT_TRUE(tautology_or_countermodel(parse("~p | p")).tautology);
  auto v = tautology_or_countermodel(parse("p"));
  EXPECT_FALSE(v.tautology);
  EXPECT_EQ(v.countermodel, (Model{{"p", false}}));
  EXPECT_TRUE(tautology_or_countermodel(parse("((~p|~q)&(~r|~s))|((p|r)&(q|s))")).tautology);
}

TEST(Tautology, FirstCountermodelIsLexicographic) {
  // Falsified by (p,q) = (0,0), (0,1) and (1,0); the first of those is returned.
  auto v = tautology_or_countermodel(parse("p & q"));
  ASSERT_FALSE(v.tautology);
  EXPECT_EQ(v.countermodel, (Model{{"p", false}, {"q", false}}));
  v = tautology_or_countermodel(parse("~p | q"));
  ASSERT_FALSE(v.tautology);
  EXPECT_EQ(v.countermodel, (Model{{"p", true}, {"q", false}}));
}

TEST(Tautology, AtomBound) {
  EXPECT_THROW(tautology_or_countermodel(parse("p | q | r"), 2), std::length_error);
}

TEST(Stability, Examples) {
  EXPECT_TRUE(is_stable(parse("(p | q) | (~p | ~q)")));
  EXPECT_FALSE(is_stable(parse("p %| q")));
  EXPECT_TRUE(is_stable(parse("1")));
  EXPECT_TRUE(is_stable(parse("(p %& ~p) | 1")));
  EXPECT_THROW(is_stable(parse("p $| q")), std::invalid_argument);
}

namespace {

// Plain recursive truth table, independent of the bit-parallel checker.
bool brute_tautology(const Formula& f) {
  std::vector<std::string> names;
  for (const auto& a : atoms(f)) names.push_back(a.name);
  for (std::uint64_t x = 0; x < (1ULL << names.size()); ++x) {
    Model m;
    for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = (x >> i) & 1;
    if (!eval(f, m)) return false;
  }
  return true;
}

}  // namespace

TEST(Tautology, AgreesWithBruteForce) {
  std::mt19937_64 rng(7);
  cl13::testing::FormulaGen g;
  g.connectives = {Connective::ParAnd, Connective::ParOr};
  g.max_connectives = 10;
  g.elementary = {"p", "q", "r", "s", "t"};
  int tautologies = 0;
  for (int i = 0; i < 2000; ++i) {
    Formula f = cl13::testing::random_formula(rng, g);
    auto v = tautology_or_countermodel(f);
    ASSERT_EQ(v.tautology, brute_tautology(f)) << print(f);
    if (!v.tautology) {
      EXPECT_FALSE(eval(f, v.countermodel)) << print(f);
    } else {
      ++tautologies;
      for (int k = 0; k < 100; ++k) {
        Model m;
        for (const auto& a : atoms(f)) m[a.name] = std::bernoulli_distribution(0.5)(rng);
        EXPECT_TRUE(eval(f, m));
      }
    }
  }
  EXPECT_GT(tautologies, 0);
}
