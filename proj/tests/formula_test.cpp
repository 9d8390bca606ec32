#include <gtest/gtest.h>

#include <random>

#include "cl13/classical.hpp"
#include "cl13/formula.hpp"
#include "support/generators.hpp"

using namespace cl13;

namespace {

Formula P(bool neg = false) { return Formula::lit(Atom::general("P"), neg); }
Formula Q(bool neg = false) { return Formula::lit(Atom::general("Q"), neg); }
Formula p(bool neg = false) { return Formula::lit(Atom::elementary("p"), neg); }
Formula q(bool neg = false) { return Formula::lit(Atom::elementary("q"), neg); }

}  // namespace

TEST(Parse, NegationOfGeneralAtom) {
  EXPECT_EQ(parse("~P | P"), Formula::nary(Connective::ParOr, {P(true), P()}));
}

TEST(Parse, ImplicationIsSugar) {
  EXPECT_EQ(parse("p -> p"), Formula::nary(Connective::ParOr, {p(true), p()}));
}

TEST(Parse, ImplicationAssociatesRight) {
  EXPECT_EQ(parse("p -> q -> p"), parse("p -> (q -> p)"));
  EXPECT_NE(parse("p -> q -> p"), parse("(p -> q) -> p"));
}

TEST(Parse, DeMorganPushesNegationDown) {
  EXPECT_EQ(parse("~(p & q)"), Formula::nary(Connective::ParOr, {p(true), q(true)}));
  EXPECT_EQ(parse("~(P $& Q)"), parse("~P $| ~Q"));
  EXPECT_EQ(parse("~(P !| Q)"), parse("~P !& ~Q"));
  EXPECT_EQ(parse("~1"), Formula::bot());
  EXPECT_EQ(parse("~~p"), p());
}

TEST(Parse, ChainsFlatten) {
  Formula f = parse("p $| q $| P");
  ASSERT_TRUE(f.is(Connective::SeqOr));
  EXPECT_EQ(f.arity(), 3);
  // Parenthesized nesting is kept: the connectives are not associative in general.
  EXPECT_EQ(parse("(p $| q) $| P").arity(), 2);
}

TEST(Parse, Atoms) {
  EXPECT_TRUE(parse("p").atom().is_elementary());
  EXPECT_TRUE(parse("Foo").atom().is_general());
  EXPECT_TRUE(parse("_p3").atom().pseudo);
  EXPECT_FALSE(parse("p3").atom().pseudo);
}

TEST(Parse, Errors) {
  for (const char* bad : {"", "p &", "(p & q", "p & q)", "p & q | r", "p # q", "~", "p q", "->p", "P -> "}) {
    EXPECT_THROW(parse(bad), ParseError) << bad;
  }
}

TEST(Parse, ErrorPosition) {
  try {
    parse("p & q | r");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 6u);
  }
}

TEST(Print, Canonical) {
  EXPECT_EQ(print(Formula::nary(Connective::ParOr, {p(true), p()})), "~p | p");
  EXPECT_EQ(print(Formula::nary(Connective::TogAnd, {P(), Q()})), "P %& Q");
  EXPECT_EQ(print(Formula::top()), "1");
  EXPECT_EQ(print(parse("(p | q) & r")), "(p | q) & r");
}

TEST(Negate, Examples) {
  EXPECT_EQ(negate(p()), p(true));
  EXPECT_EQ(negate(Formula::top()), Formula::bot());
  Formula e1 = parse("P %| q"), e2 = parse("p !& Q");
  EXPECT_EQ(negate(Formula::nary(Connective::SeqAnd, {e1, e2})),
            Formula::nary(Connective::SeqOr, {negate(e1), negate(e2)}));
}

TEST(Classify, Examples) {
  auto c = classify(parse("p %& q"));
  EXPECT_TRUE(c.is_quasielementary);
  EXPECT_FALSE(c.is_elementary);
  EXPECT_TRUE(c.is_elementary_base);

  c = classify(parse("p & q"));
  EXPECT_TRUE(c.is_elementary && c.is_quasielementary && c.is_elementary_base);

  c = classify(parse("P %& q"));
  EXPECT_FALSE(c.is_elementary || c.is_quasielementary || c.is_elementary_base);

  c = classify(parse("p $& q"));
  EXPECT_FALSE(c.is_quasielementary);
  EXPECT_TRUE(c.is_elementary_base);
}

TEST(Occurrences, Scopes) {
  Formula f = parse("(P %| q) | (p !& r)");
  auto tog = occurrences(f, Scope::Surface, of_kind(Connective::TogOr));
  ASSERT_EQ(tog.size(), 1u);
  EXPECT_EQ(tog[0].path, (Path{1}));

  auto cho = occurrences(f, Scope::Semisurface, of_kind(Connective::ChoAnd));
  ASSERT_EQ(cho.size(), 1u);
  EXPECT_EQ(cho[0].path, (Path{2}));

  auto hidden = occurrences(parse("p !& (q %| r)"), Scope::Surface,
                            [](const Formula& g) { return g.is(Connective::TogOr) || g.is(Connective::TogAnd); });
  EXPECT_TRUE(hidden.empty());
}

TEST(Occurrences, Polarity) {
  auto lits = occurrences(parse("~P | P"), Scope::Surface, [](const Formula& g) { return g.is_lit(); });
  ASSERT_EQ(lits.size(), 2u);
  EXPECT_FALSE(lits[0].positive);
  EXPECT_TRUE(lits[1].positive);
}

TEST(Occurrences, SemisurfaceHeadsSkipTails) {
  Formula f = parse("(p $& q) | r");
  auto all = occurrences(f, Scope::Semisurface, [](const Formula& g) { return g.is_lit(); });
  auto heads = occurrences(f, Scope::SemisurfaceHeads, [](const Formula& g) { return g.is_lit(); });
  EXPECT_EQ(all.size(), 3u);
  EXPECT_EQ(heads.size(), 2u);
}

TEST(ReplaceAt, Examples) {
  Formula f = parse("A $| B $| C"), g = parse("p");
  EXPECT_EQ(replace_at(f, {}, g), g);
  EXPECT_EQ(replace_at(f, {}, drop_head(f)), parse("B $| C"));
  EXPECT_EQ(replace_at(parse("p | (A $| B)"), {2}, parse("B")), parse("p | B"));
  EXPECT_THROW(replace_at(f, {4}, g), std::out_of_range);
  EXPECT_THROW(replace_at(f, {1, 1}, g), std::out_of_range);
}

TEST(Quasielementarize, WorkedExample) {
  EXPECT_EQ(quasielementarize(parse("((P %| q) | ((p & ~P) $& (Q & R))) %& (q !& (r !| s))")),
            parse("((0 %| q) | (p & 0)) %& 1"));
  Formula e = parse("p & (q | ~r)");
  EXPECT_EQ(quasielementarize(e), e);
}

TEST(Elementarize, WorkedExample) {
  EXPECT_EQ(elementarize(parse("(s & (p %& (q %| r))) | (~s | (p %| r))")), parse("(s & 1) | (~s | 0)"));
  EXPECT_EQ(elementarize(parse("p %| q")), Formula::bot());
  Formula e = parse("p & (q | ~r)");
  EXPECT_EQ(elementarize(e), e);
  EXPECT_THROW(elementarize(parse("p $| q")), std::invalid_argument);
}

class FormulaProperties : public ::testing::TestWithParam<int> {};

TEST_P(FormulaProperties, Hold) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  cl13::testing::FormulaGen g;
  g.general = {"P", "Q"};
  for (int i = 0; i < 200; ++i) {
    Formula f = cl13::testing::random_formula(rng, g);
    SCOPED_TRACE(print(f));

    EXPECT_EQ(parse(print(f)), f);
    EXPECT_EQ(print(parse(print(f))), print(f));
    EXPECT_EQ(negate(negate(f)), f);

    Formula qe = quasielementarize(f);
    EXPECT_TRUE(classify(qe).is_quasielementary);
    EXPECT_EQ(quasielementarize(qe), qe);
    EXPECT_TRUE(classify(elementarize(qe)).is_elementary);
    if (classify(f).is_quasielementary) {
      EXPECT_EQ(qe, f);
    }

    auto cls = classify(f);
    if (cls.is_elementary) {
      EXPECT_TRUE(cls.is_quasielementary && cls.is_elementary_base);
    }

    auto toggling_or_parallel = [](const Formula& x) {
      return x.is_nary() && (is_toggling(x.connective()) || is_parallel(x.connective()));
    };
    auto surf = occurrences(f, Scope::Surface, toggling_or_parallel);
    auto semi = occurrences(f, Scope::Semisurface, toggling_or_parallel);
    for (const auto& o : surf) {
      bool found = false;
      for (const auto& s : semi) found = found || s.path == o.path;
      EXPECT_TRUE(found) << path_text(o.path);
    }
    for (const auto& o : semi) EXPECT_EQ(at(f, o.path), o.sub);
  }
}

TEST_P(FormulaProperties, NegationIsClassicalComplement) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 99);
  cl13::testing::FormulaGen g;
  g.connectives = {Connective::ParAnd, Connective::ParOr};
  for (int i = 0; i < 100; ++i) {
    Formula f = cl13::testing::random_formula(rng, g);
    Model m;
    for (const char* a : {"p", "q", "r", "s"}) m[a] = std::bernoulli_distribution(0.5)(rng);
    EXPECT_NE(eval(f, m), eval(negate(f), m)) << print(f);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, FormulaProperties, ::testing::Range(1, 6));
