#include <gtest/gtest.h>

#include <filesystem>

#include "hri/tasks.hpp"

using namespace hri;

namespace {

FactSet facts(std::initializer_list<const char*> atoms) {
  FactSet out;
  for (const char* a : atoms) out.insert(parse_atom(a));
  return out;
}

const std::string kData = HRI_TEST_DATA;

}  // namespace

TEST(Generate, PredecessorFourConstants) {
  const auto t = generate_task({"predecessor", 4, 0});
  EXPECT_EQ(t.background, facts({"zero(0)", "succ(0,1)", "succ(1,2)", "succ(2,3)"}));
  EXPECT_EQ(t.positives, facts({"target(1,0)", "target(2,1)", "target(3,2)"}));
  EXPECT_EQ(t.negatives.size(), 16u - 3u);
  EXPECT_FALSE(t.negatives.count(parse_atom("target(1,0)")));
}

TEST(Generate, UndirectedEdgePath) {
  const auto t = label_task("undirected_edge", {"a", "b", "c"}, facts({"edge(a,b)", "edge(b,c)"}));
  EXPECT_EQ(t.positives, facts({"target(a,b)", "target(b,a)", "target(b,c)", "target(c,b)"}));
  for (const char* a : {"target(a,c)", "target(c,a)"}) EXPECT_TRUE(t.negatives.count(parse_atom(a))) << a;
  EXPECT_TRUE(t.positives.size() + t.negatives.size() == 9u);
}

TEST(Generate, LessThanIsStrictOrder) {
  const auto t = generate_task({"less_than", 5, 0});
  for (int x = 0; x < 5; ++x)
    for (int y = 0; y < 5; ++y) {
      const GroundAtom a{"target", {std::to_string(x), std::to_string(y)}};
      EXPECT_EQ(t.positives.count(a), x < y ? 1u : 0u);
      EXPECT_EQ(t.negatives.count(a), x < y ? 0u : 1u);
    }
}

TEST(Generate, DeterministicAndValid) {
  for (const auto& name : task_names()) {
    const auto d = task_defaults(name);
    for (std::uint64_t seed : {0u, 7u}) {
      const auto a = generate_task({name, d.train_num_constants, seed});
      const auto b = generate_task({name, d.train_num_constants, seed});
      EXPECT_EQ(a, b) << name;
      EXPECT_EQ(task_to_json(a), task_to_json(b)) << name;
      EXPECT_NO_THROW(validate_task(a)) << name;
      EXPECT_FALSE(a.positives.empty()) << name;
    }
    if (d.deterministic)
      EXPECT_EQ(generate_task({name, d.eval_num_constants, 1}), generate_task({name, d.eval_num_constants, 2})) << name;
  }
}

TEST(Generate, Errors) {
  EXPECT_THROW(generate_task({"nosuch", 5, 0}), TaskError);
  EXPECT_THROW(generate_task({"predecessor", 1, 0}), TaskError);
}

// Every printed solution labels P as 1 and N as 0 at train and eval sizes.
TEST(ReferenceSolutions, LabelGeneratedTasks) {
  int checked = 0;
  for (const auto& name : task_names()) {
    const auto program = reference_solution(name);
    if (!program) continue;
    const auto d = task_defaults(name);
    for (int n : {d.train_num_constants, d.eval_num_constants})
      for (std::uint64_t seed : {0u, 1u, 2u}) {
        const auto t = generate_task({name, n, seed});
        const auto trace = forward_chain_trace(*program, t.background, t.constants, 1000);
        EXPECT_TRUE(trace.fixpoint) << name;
        for (const auto& a : t.positives) EXPECT_TRUE(trace.facts.count(a)) << name << " misses " << to_string(a);
        for (const auto& a : t.negatives) EXPECT_FALSE(trace.facts.count(a)) << name << " derives " << to_string(a);
      }
    ++checked;
  }
  EXPECT_EQ(checked, 15);
}

TEST(TaskFile, RoundTrip) {
  const auto t = generate_task({"grandparent", 9, 3});
  EXPECT_EQ(task_from_json(task_to_json(t)), t);
  const auto path = std::filesystem::temp_directory_path() / "hri_task_roundtrip.json";
  save_task(t, path);
  EXPECT_EQ(load_task(path), t);
  std::filesystem::remove(path);
}

TEST(TaskFile, HandWrittenEvenSucc2) {
  EXPECT_EQ(load_task(kData + "/even_succ2_11.json"), generate_task({"even_succ2", 11, 0}));
}

TEST(TaskFile, RejectsUnknownConstant) {
  try {
    load_task(kData + "/bad_constant.json");
    FAIL() << "expected TaskError";
  } catch (const TaskError& e) {
    EXPECT_NE(std::string(e.what()).find("positives"), std::string::npos) << e.what();
  }
}

TEST(TaskFile, RejectsOverlap) {
  auto t = generate_task({"predecessor", 3, 0});
  t.negatives.insert(*t.positives.begin());
  EXPECT_THROW(task_from_json(task_to_json(t)), TaskError);
}

TEST(Subsample, KeepsPositivesAndShrinksNegatives) {
  const auto t = generate_task({"connectedness", 5, 4});
  const auto s = subsample_negatives(t, {0.5, 9});
  EXPECT_EQ(s.positives, t.positives);
  EXPECT_LE(s.negatives.size(), t.negatives.size());
  for (const auto& a : s.negatives) EXPECT_TRUE(t.negatives.count(a));
  EXPECT_THROW(subsample_negatives(t, {0.0, 1}), TaskError);
}
