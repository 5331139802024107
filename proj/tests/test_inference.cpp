#include <gtest/gtest.h>

#include <cmath>

#include "hri/extraction.hpp"
#include "hri/inference.hpp"
#include "support.hpp"

using namespace hri;
using hri::testing::one_hot_cases;
using hri::testing::one_hot_model;
using hri::testing::oracle_mismatches;

namespace {

std::span<const double> sp(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace

TEST(Project, Oracles) {
  Valuation bin{2, 2, {0.1, 0.2, 0.3, 0.4}};
  EXPECT_EQ(project(bin, 2).data, bin.data);
  Valuation un{1, 2, {1.0, 0.0}};
  EXPECT_EQ(project(un, 2).data, (std::vector<double>{1, 1, 0, 0}));
  Valuation t{0, 3, {1.0}};
  EXPECT_EQ(project(t, 3).data, std::vector<double>(9, 1.0));
}

TEST(Unification, Oracles) {
  const std::vector<double> s{1.0, 0.0}, e1{1.0, 0.0}, e2{0.0, 1.0};
  EXPECT_EQ(unification_scores(sp(s), {sp(e1)}, 0.1, Similarity::cosine), std::vector<double>{1.0});
  const auto same = unification_scores(sp(s), {sp(e2), sp(e2)}, 0.1, Similarity::cosine);
  EXPECT_DOUBLE_EQ(same[0], 0.5);
  EXPECT_DOUBLE_EQ(same[1], 0.5);
  const auto a = unification_scores(sp(s), {sp(e1), sp(e2)}, 0.1, Similarity::cosine);
  EXPECT_NEAR(a[0], std::exp(10.0) / (std::exp(10.0) + 1.0), 1e-15);
  EXPECT_NEAR(a[0], 0.9999546, 1e-7);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_THROW(unification_scores(sp(zero), {sp(e1)}, 0.1, Similarity::cosine), std::domain_error);
}

TEST(Unification, GumbelStaysOnSimplex) {
  Rng rng(3);
  const std::vector<double> s{1.0, 0.2}, e1{1.0, 0.0}, e2{0.0, 1.0}, e3{0.5, 0.5};
  const auto clean = unification_scores(sp(s), {sp(e1), sp(e2), sp(e3)}, 0.1, Similarity::cosine);
  const auto noisy = unification_scores(sp(s), {sp(e1), sp(e2), sp(e3)}, 0.1, Similarity::cosine, 1.0, &rng);
  double sum = 0.0;
  for (double x : noisy) {
    EXPECT_GE(x, 0.0);
    sum += x;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NE(clean, noisy);
}

TEST(Similarity, Kinds) {
  const std::vector<double> a{1.0, 2.0}, b{2.0, 0.0};
  EXPECT_DOUBLE_EQ(similarity(Similarity::scalar_product, sp(a), sp(b)), 2.0);
  EXPECT_DOUBLE_EQ(similarity(Similarity::l1, sp(a), sp(b)), -3.0);
  EXPECT_DOUBLE_EQ(similarity(Similarity::l2, sp(a), sp(b)), -std::sqrt(5.0));
  EXPECT_NEAR(similarity(Similarity::cosine, sp(a), sp(b)), 1.0 / std::sqrt(5.0), 1e-15);
}

TEST(Step, ZeroInputsStayZero) {
  const IlpTask t = label_task("predecessor", {"0", "1", "2"}, {});
  ModelConfig c;
  c.max_depth = 2;
  const Model m = build_model(c, t.input_predicates, t.target, 1);
  Instance inst = make_instance(m, t);
  // Switch `true` off as well so every candidate is zero.
  inst.inputs[0].data[0] = 0.0;
  const auto r = run_inference(m, inst, 3);
  for (double v : r.target.data) EXPECT_EQ(v, 0.0);
  for (const auto& v : r.valuations)
    for (double x : v.data) EXPECT_EQ(x, 0.0);
}

// One-hot B(succ, succ): aux(0,2) from succ(0,1), succ(1,2).
TEST(Step, OneHotChainDerivesAux) {
  const IlpTask t = label_task("even_odd", {"0", "1", "2"}, {parse_atom("zero(0)"), parse_atom("succ(0,1)"), parse_atom("succ(1,2)")});
  hri::testing::OneHotCase c{"even_odd", 1, {{"aux_l1_b0:0", "succ"}, {"aux_l1_b0:1", "succ"}}, "aux_l1_a0"};
  const Model m = one_hot_model(c, t);
  const auto r = run_inference(m, make_instance(m, t), 1);
  const auto& aux = r.valuations[static_cast<std::size_t>(m.predicate_index("aux_l1_b0"))];
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) EXPECT_EQ(aux.at(x, y), x == 0 && y == 2 ? 1.0 : 0.0);
}

// α = (0.6, 0.4) over two candidates valued 1 and 0 at an atom.
TEST(Target, ConvexPooling) {
  const IlpTask t = generate_task({"predecessor", 3, 0});
  hri::testing::OneHotCase c{"predecessor", 1, {{"aux_l1_i0:0", "succ"}}, "aux_l1_i0"};
  Model m = one_hot_model(c, t, 0.01);
  const int i0 = m.predicate_index("aux_l1_i0"), c0 = m.predicate_index("aux_l1_c0");
  const double d = 0.01 * std::log(1.5);
  const double a = (d + std::sqrt(2.0 - d * d)) / 2.0, b = a - d;
  auto slot = m.slot_embedding(m.target_slot);
  std::fill(slot.begin(), slot.end(), 0.0);
  slot[static_cast<std::size_t>(i0)] = a;
  slot[static_cast<std::size_t>(c0)] = b;
  const auto r = run_inference(m, make_instance(m, t), 1);
  EXPECT_NEAR(r.target.at(1, 0), 0.6, 1e-12);
  EXPECT_NEAR(r.target.at(0, 1), 0.0, 1e-12);
}

TEST(Rollout, OneHotMatchesTruncatedOracle) {
  for (const auto& c : one_hot_cases()) {
    const auto d = task_defaults(c.task);
    const IlpTask t = generate_task({c.task, d.eval_num_constants, 5});
    const Model m = one_hot_model(c, t);
    const auto ex = extract_program(m);
    for (int steps : {1, 2, d.eval_steps}) {
      const auto r = run_inference(m, make_instance(m, t), steps);
      const auto oracle = forward_chain(ex.program, t.background, t.constants, steps, ex.symbols);
      EXPECT_EQ(oracle_mismatches(r.target, oracle, t), 0) << c.task << " steps " << steps;
    }
  }
}

TEST(Rollout, PredecessorSingleStep) {
  const IlpTask t = generate_task({"predecessor", 6, 0});
  const Model m = one_hot_model(one_hot_cases()[0], t);
  const Instance inst = make_instance(m, t);
  const auto r = run_inference(m, inst, 1);
  EXPECT_EQ(soft_mse(r.target, inst), 0.0);
}

TEST(Rollout, BoundedAndMonotoneOnRandomEmbeddings) {
  const IlpTask t = generate_task({"grandparent", 6, 2});
  for (auto pool : {PoolOp::sum, PoolOp::max})
    for (auto and_op : {AndOp::min, AndOp::product})
      for (auto or_op : {OrOp::max, OrOp::prodminus}) {
        ModelConfig c;
        c.max_depth = 2;
        c.ops = {pool, and_op, or_op, Similarity::cosine};
        const Model m = build_model(c, t.input_predicates, t.target, 9);
        const auto r = run_inference(m, make_instance(m, t), 4, {}, true);
        for (std::size_t s = 0; s < r.trace.size(); ++s)
          for (std::size_t p = 0; p < r.trace[s].size(); ++p)
            for (std::size_t i = 0; i < r.trace[s][p].data.size(); ++i) {
              const double v = r.trace[s][p].data[i];
              ASSERT_GE(v, 0.0);
              ASSERT_LE(v, 1.0);
              if (s > 0) ASSERT_GE(v, r.trace[s - 1][p].data[i]);
            }
      }
}

TEST(Rollout, OperationCount) {
  // Depth 1, R*, 5 inputs: every conjunctive aux sees k = 9 candidates.
  IlpTask t = generate_task({"predecessor", 4, 0});
  ModelConfig c;
  c.max_depth = 1;
  const Model m = build_model(c, t.input_predicates, t.target, 1);
  ASSERT_EQ(m.num_inputs, 4);
  const std::uint64_t k = m.aux.front().candidates.size();
  op_counter::reset();
  run_inference(m, make_instance(m, t), 1);
  const std::uint64_t n = 4;
  EXPECT_EQ(op_counter::get(), k * k * (n * n * n + 2 * n * n));
  op_counter::reset();
  run_inference(m, make_instance(m, t), 3);
  EXPECT_EQ(op_counter::get(), 3 * k * k * (n * n * n + 2 * n * n));
}

TEST(Instance, RejectsMissingInput) {
  const IlpTask pred = generate_task({"predecessor", 3, 0});
  const IlpTask gp = generate_task({"grandparent", 4, 0});
  ModelConfig c;
  c.max_depth = 1;
  const Model m = build_model(c, pred.input_predicates, pred.target, 1);
  EXPECT_THROW(make_instance(m, gp), std::invalid_argument);
}

TEST(Dump, Lines) {
  Valuation v{1, 2, {1.0, 0.25}};
  EXPECT_EQ(dump_valuation(v, "p", {"a", "b"}), "p(a) = 1\np(b) = 0.25\n");
}
