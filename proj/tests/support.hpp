#pragma once

// Hand-picked slot assignments that encode known solutions, shared by the
// unit tests and the acceptance binary.

#include <map>
#include <string>
#include <vector>

#include "hri/extraction.hpp"
#include "hri/inference.hpp"
#include "hri/model.hpp"
#include "hri/tasks.hpp"

namespace hri::testing {

struct OneHotCase {
  std::string task;
  int max_depth = 2;
  std::map<std::string, std::string> slots;
  std::string target_choice;
};

inline const std::vector<OneHotCase>& one_hot_cases() {
  static const std::vector<OneHotCase> cases = {
      {"predecessor", 2, {{"aux_l2_i0:0", "succ"}}, "aux_l2_i0"},
      {"grandparent",
       2,
       {{"aux_l1_c0:0", "mother"},
        {"aux_l1_c0:1", "true"},
        {"aux_l1_c0:2", "father"},
        {"aux_l2_b0:0", "aux_l1_c0"},
        {"aux_l2_b0:1", "aux_l1_c0"}},
       "aux_l2_b0"},
      {"undirected_edge",
       2,
       {{"aux_l1_i0:0", "edge"}, {"aux_l2_c0:0", "edge"}, {"aux_l2_c0:1", "true"}, {"aux_l2_c0:2", "aux_l1_i0"}},
       "aux_l2_c0"},
      {"adjacent_to_red",
       2,
       {{"aux_l1_a0:0", "colour"},
        {"aux_l1_a0:1", "red"},
        {"aux_l1_i0:0", "edge"},
        {"aux_l2_a0:0", "aux_l1_i0"},
        {"aux_l2_a0:1", "aux_l1_a0"}},
       "aux_l2_a0"},
      {"less_than", 1, {{"aux_l1_b0:0", "aux_l1_b0"}, {"aux_l1_b0:1", "aux_l1_b0"}, {"aux_l1_b0:2", "succ"}}, "aux_l1_b0"},
  };
  return cases;
}

/// Model with orthonormal predicate embeddings and slots copying the chosen
/// predicate. At τ = 1e-3 every α is exactly one-hot in double precision.
inline Model one_hot_model(const OneHotCase& c, const IlpTask& task, double temperature = 1e-3) {
  ModelConfig cfg;
  cfg.max_depth = c.max_depth;
  cfg.temperature = temperature;
  Model m = build_model(cfg, task.input_predicates, task.target, 0);
  align_embeddings(m, named_assignment(m, c.slots, c.target_choice));
  return m;
}

/// Number of target groundings where the soft output differs from the crisp
/// oracle (any difference counts, no tolerance).
inline int oracle_mismatches(const Valuation& soft, const FactSet& oracle, const IlpTask& task) {
  int bad = 0;
  const auto pred = target_predictions(soft, task.constants, task.target.name);
  for (const auto& [atom, v] : pred) {
    const double want = oracle.count(atom) ? 1.0 : 0.0;
    if (v != want) ++bad;
  }
  return bad;
}

}  // namespace hri::testing
