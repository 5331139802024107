#include <gtest/gtest.h>

#include "hri/logic.hpp"

using namespace hri;

namespace {

FactSet facts(std::initializer_list<const char*> atoms) {
  FactSet out;
  for (const char* a : atoms) out.insert(parse_atom(a));
  return out;
}

std::vector<std::string> numbers(int n) {
  std::vector<std::string> c;
  for (int i = 0; i < n; ++i) c.push_back(std::to_string(i));
  return c;
}

}  // namespace

// Even/Aux chain over zero(0), succ(0,1), succ(1,2).
TEST(ForwardChain, EvenAuxExample) {
  const auto program = parse_program(
      "even(X) :- zero(X).\n"
      "even(X) :- even(Y), aux(Y,X).\n"
      "aux(X,Y) :- succ(X,Z), succ(Z,Y).\n",
      "even");
  const FactSet bg = facts({"zero(0)", "succ(0,1)", "succ(1,2)"});
  const FactSet out = forward_chain(program, bg, numbers(3), 10);
  FactSet derived;
  for (const auto& a : out)
    if (!bg.count(a)) derived.insert(a);
  EXPECT_EQ(derived, facts({"aux(0,2)", "even(0)", "even(2)"}));
}

TEST(ForwardChain, EmptyProgramKeepsFacts) {
  SymbolicProgram p;
  p.target = {"target", 2, PredicateKind::target};
  const FactSet bg = facts({"succ(0,1)", "zero(0)"});
  EXPECT_EQ(forward_chain(p, bg, numbers(2), 5), bg);
}

TEST(ForwardChain, LessThanIsStrictOrder) {
  const auto program = parse_program("target(X,Y) :- target(X,Z), target(Z,Y).\ntarget(X,Y) :- succ(X,Y).\n");
  FactSet bg;
  for (int i = 0; i + 1 < 5; ++i) bg.insert({"succ", {std::to_string(i), std::to_string(i + 1)}});
  const FactSet out = forward_chain(program, bg, numbers(5), 20);
  FactSet expected;
  for (int x = 0; x < 5; ++x)
    for (int y = x + 1; y < 5; ++y) expected.insert({"target", {std::to_string(x), std::to_string(y)}});
  FactSet got;
  for (const auto& a : out)
    if (a.predicate == "target") got.insert(a);
  EXPECT_EQ(got, expected);
}

TEST(ForwardChain, MonotoneAndReachesFixpoint) {
  const auto program = parse_program("target(X,Y) :- target(X,Z), target(Z,Y).\ntarget(X,Y) :- succ(X,Y).\n");
  FactSet bg;
  for (int i = 0; i + 1 < 8; ++i) bg.insert({"succ", {std::to_string(i), std::to_string(i + 1)}});
  const auto trace = forward_chain_trace(program, bg, numbers(8), 100);
  EXPECT_TRUE(trace.fixpoint);
  for (std::size_t i = 1; i < trace.sizes.size(); ++i) EXPECT_GE(trace.sizes[i], trace.sizes[i - 1]);
  EXPECT_GE(trace.facts.size(), bg.size());
}

TEST(ForwardChain, TruncatesAtMaxSteps) {
  const auto program = parse_program("target(X,Y) :- target(X,Z), target(Z,Y).\ntarget(X,Y) :- succ(X,Y).\n");
  FactSet bg;
  for (int i = 0; i + 1 < 6; ++i) bg.insert({"succ", {std::to_string(i), std::to_string(i + 1)}});
  const auto one = forward_chain(program, bg, numbers(6), 1);
  EXPECT_TRUE(one.count(parse_atom("target(0,1)")));
  EXPECT_FALSE(one.count(parse_atom("target(0,2)")));
}

TEST(ForwardChain, UnknownBodyPredicateIsNamed) {
  const auto program = parse_program("target(X,Y) :- nosuch(X,Y).\n");
  try {
    forward_chain(program, {}, numbers(2), 3);
    FAIL() << "expected LogicError";
  } catch (const LogicError& e) {
    EXPECT_NE(std::string(e.what()).find("nosuch"), std::string::npos);
  }
}

TEST(ForwardChain, HeadOnlyVariableRangesOverConstants) {
  const auto program = parse_program("target(X,Y) :- zero(X).\n");
  const auto out = forward_chain(program, facts({"zero(0)"}), numbers(3), 2);
  EXPECT_TRUE(out.count(parse_atom("target(0,2)")));
  EXPECT_FALSE(out.count(parse_atom("target(1,0)")));
}

TEST(Mse, Oracles) {
  std::map<GroundAtom, double> pred{{parse_atom("t(a)"), 1.0}, {parse_atom("t(b)"), 0.0}};
  std::map<GroundAtom, int> truth{{parse_atom("t(a)"), 1}, {parse_atom("t(b)"), 0}};
  EXPECT_DOUBLE_EQ(mse(pred, truth), 0.0);
  for (auto& [k, v] : pred) v = 0.5;
  EXPECT_DOUBLE_EQ(mse(pred, truth), 0.25);
  pred = {{parse_atom("t(a)"), 0.0}, {parse_atom("t(b)"), 0.0}};
  EXPECT_DOUBLE_EQ(mse(pred, truth), 0.5);
}

TEST(Mse, MismatchedAtomsThrow) {
  std::map<GroundAtom, double> pred{{parse_atom("t(a)"), 1.0}};
  std::map<GroundAtom, int> truth{{parse_atom("t(b)"), 1}};
  EXPECT_THROW(mse(pred, truth), LogicError);
  EXPECT_THROW(mse({}, {}), LogicError);
}

TEST(Normalize, ConjunctOnly) {
  const Literal head{"target", {'X', 'Y'}};
  const auto out = normalize_aux_clause(head, {{"succ", {'X', 'Z'}}, {"succ", {'Z', 'Y'}}}, std::nullopt);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(to_string(out[0]), "target(X,Y) :- succ(X,Z), succ(Z,Y).");
}

TEST(Normalize, TrueEliminationAndDisjunct) {
  const Literal head{"aux1", {'X', 'Y'}};
  const auto out = normalize_aux_clause(head, {{"mother", {'X', 'Y'}}, {"true", {}}}, Literal{"father", {'X', 'Y'}});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(to_string(out[0]), "aux1(X,Y) :- mother(X,Y).");
  EXPECT_EQ(to_string(out[1]), "aux1(X,Y) :- father(X,Y).");
}

TEST(Normalize, FalseDisjunctAndFalseConjunct) {
  const Literal head{"aux1", {'X', 'Y'}};
  auto out = normalize_aux_clause(head, {{"edge", {'X', 'Y'}}, {"edge", {'Y', 'X'}}}, Literal{"false", {}});
  EXPECT_EQ(out.size(), 1u);
  out = normalize_aux_clause(head, {{"edge", {'X', 'Y'}}, {"false", {}}}, Literal{"edge", {'X', 'Y'}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(to_string(out[0]), "aux1(X,Y) :- edge(X,Y).");
}

TEST(RuleText, RoundTrip) {
  const std::string text = "target(X,Y) :- aux1(X,Z), aux1(Z,Y).\naux1(X,Y) :- mother(X,Y).\n";
  EXPECT_EQ(to_string(parse_program(text)), text);
  EXPECT_EQ(to_string(parse_atom("succ(0,1).")), "succ(0,1)");
  EXPECT_THROW(parse_clause("Target(X) :- a(X)."), LogicError);
  EXPECT_THROW(parse_clause("t(X) :- a(X"), LogicError);
}

TEST(RuleText, ArityClashRejected) {
  EXPECT_THROW(parse_program("target(X,Y) :- a(X,Y).\ntarget(X) :- a(X,X).\n"), LogicError);
}
