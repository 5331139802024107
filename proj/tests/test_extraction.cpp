#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "hri/extraction.hpp"
#include "hri/inference.hpp"
#include "support.hpp"

using namespace hri;
using hri::testing::one_hot_cases;
using hri::testing::one_hot_model;

namespace {

const hri::testing::OneHotCase& case_for(const std::string& task) {
  for (const auto& c : one_hot_cases())
    if (c.task == task) return c;
  throw std::out_of_range(task);
}

ExtractionResult with_program(const std::string& text, const IlpTask& task) {
  ExtractionResult r;
  r.program = parse_program(text);
  r.program.target = task.target;
  r.symbols = task.input_predicates;
  r.symbols.push_back(task.target);
  return r;
}

}  // namespace

TEST(Extract, Predecessor) {
  const IlpTask t = generate_task({"predecessor", 5, 0});
  const auto ex = extract_program(one_hot_model(case_for("predecessor"), t));
  EXPECT_EQ(to_string(ex.program), "target(X,Y) :- succ(Y,X).\n");
  EXPECT_FALSE(ex.degenerate);
  EXPECT_EQ(ex.pruned.size(), 7u);
}

TEST(Extract, Grandparent) {
  const IlpTask t = generate_task({"grandparent", 9, 0});
  const auto ex = extract_program(one_hot_model(case_for("grandparent"), t));
  EXPECT_EQ(to_string(ex.program),
            "target(X,Y) :- aux1(X,Z), aux1(Z,Y).\n"
            "aux1(X,Y) :- mother(X,Y).\n"
            "aux1(X,Y) :- father(X,Y).\n");
  EXPECT_TRUE(symbolic_evaluate(ex, t, 4).success);
}

TEST(Extract, AdjacentToRedPrintsUnaryOnFirstVariable) {
  const IlpTask t = generate_task({"adjacent_to_red", 7, 0});
  const auto ex = extract_program(one_hot_model(case_for("adjacent_to_red"), t));
  EXPECT_EQ(to_string(ex.program),
            "target(X) :- aux1(X,Z), aux2(Z).\n"
            "aux1(X,Y) :- edge(Y,X).\n"
            "aux2(X) :- colour(X,Z), red(Z).\n");
}

TEST(Extract, OneHotSolutionsEvaluateCleanly) {
  for (const auto& c : one_hot_cases()) {
    const auto d = task_defaults(c.task);
    const IlpTask t = generate_task({c.task, d.eval_num_constants, 1});
    const auto ex = extract_program(one_hot_model(c, t));
    const auto s = symbolic_evaluate(ex, t, d.eval_steps);
    EXPECT_EQ(s.mse, 0.0) << c.task << "\n" << to_string(ex.program);
    EXPECT_TRUE(s.success);
  }
}

TEST(Extract, Idempotent) {
  const IlpTask t = generate_task({"grandparent", 6, 0});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ModelConfig c;
    c.max_depth = 3;
    Model m = build_model(c, t.input_predicates, t.target, seed);
    const auto first = extract_program(m);
    std::vector<int> choice;
    for (const auto& s : first.slot_assignments) choice.push_back(s.chosen);
    m.config.temperature = 1e-3;
    align_embeddings(m, choice);
    const auto second = extract_program(m);
    EXPECT_EQ(to_string(second.program), to_string(first.program));
  }
}

TEST(Extract, DegenerateTrueDisjunct) {
  const IlpTask t = generate_task({"predecessor", 4, 0});
  hri::testing::OneHotCase c{"predecessor", 1, {{"aux_l1_c0:2", "true"}}, "aux_l1_c0"};
  const auto ex = extract_program(one_hot_model(c, t));
  EXPECT_TRUE(ex.degenerate);
  EXPECT_EQ(to_string(ex.program), "target(X,Y) :- true.\n");
  EXPECT_FALSE(ex.notes.empty());
}

TEST(Extract, TieBreakLowestLayerThenName) {
  const IlpTask t = generate_task({"predecessor", 4, 0});
  hri::testing::OneHotCase c{"predecessor", 1, {{"aux_l1_i0:0", "succ"}}, "aux_l1_i0"};
  Model m = one_hot_model(c, t);
  const auto& aux = *m.aux_for(m.predicate_index("aux_l1_i0"));
  auto slot = m.slot_embedding(aux.slots[0]);
  std::fill(slot.begin(), slot.end(), 0.0);
  slot[static_cast<std::size_t>(m.predicate_index("zero"))] = 1.0;
  slot[static_cast<std::size_t>(m.predicate_index("succ"))] = 1.0;
  slot[static_cast<std::size_t>(m.predicate_index("aux_l1_b0"))] = 1.0;
  const auto choices = argmax_assignment(m);
  const auto& chosen = choices[static_cast<std::size_t>(aux.slots[0])];
  EXPECT_TRUE(chosen.tied);
  EXPECT_EQ(m.predicates[static_cast<std::size_t>(chosen.chosen)].name, "succ");
}

// Small τ with clearly separated scores: soft output approaches the crisp program.
TEST(Extract, TemperatureLimitMatchesOracle) {
  const IlpTask t = generate_task({"grandparent", 6, 4});
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelConfig c;
    c.max_depth = 2;
    Model m = build_model(c, t.input_predicates, t.target, seed);
    bool separated = true;
    const auto base = slot_scores(m);
    for (int s = 0; s < m.num_slots; ++s) {
      std::vector<double> sims;
      for (int p : slot_candidates(m, s)) sims.push_back(similarity(Similarity::cosine, m.slot_embedding(s), m.predicate_embedding(p)));
      std::sort(sims.rbegin(), sims.rend());
      if (sims.size() > 1 && sims[0] - sims[1] < 1e-2) separated = false;
    }
    if (!separated) continue;
    m.config.temperature = 1e-4;
    const auto ex = extract_program(m);
    const auto oracle = forward_chain(ex.program, t.background, t.constants, 4, ex.symbols);
    const auto soft = target_predictions(run_inference(m, make_instance(m, t), 4).target, t.constants, "target");
    for (const auto& [atom, v] : soft) EXPECT_LT(std::fabs(v - (oracle.count(atom) ? 1.0 : 0.0)), 1e-3) << to_string(atom);
    ++compared;
  }
  EXPECT_GT(compared, 0);
}

TEST(Symbolic, Oracles) {
  const IlpTask lt = generate_task({"less_than", 12, 0});
  const auto solution = with_program("target(X,Y) :- target(X,Z), target(Z,Y).\ntarget(X,Y) :- succ(X,Y).\n", lt);
  EXPECT_EQ(symbolic_evaluate(solution, lt, 12).mse, 0.0);
  const auto wrong = symbolic_evaluate(with_program("target(X,Y) :- succ(X,Y).\n", lt), lt, 12);
  EXPECT_GT(wrong.mse, 0.0);
  EXPECT_FALSE(wrong.success);
  const auto empty = symbolic_evaluate(with_program("", lt), lt, 12);
  EXPECT_DOUBLE_EQ(empty.mse, static_cast<double>(lt.positives.size()) /
                                  static_cast<double>(lt.positives.size() + lt.negatives.size()));
}

TEST(Json, Dump) {
  const IlpTask t = generate_task({"grandparent", 6, 0});
  const Model m = one_hot_model(case_for("grandparent"), t);
  const auto doc = nlohmann::json::parse(extraction_to_json(extract_program(m), m));
  EXPECT_EQ(doc["target"], "target");
  EXPECT_EQ(doc["slots"].size(), static_cast<std::size_t>(m.num_slots));
  EXPECT_EQ(doc["slots"].back()["chosen"], "aux_l2_b0");
  EXPECT_EQ(doc["slots"].back()["printed_as"], "target");
}
