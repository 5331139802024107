#pragma once

#include <map>
#include <string>
#include <vector>

#include "hri/logic.hpp"
#include "hri/model.hpp"
#include "hri/tasks.hpp"

namespace hri {

struct SlotChoice {
  int slot = 0;
  /// Aux predicate owning the slot, or -1 for the target slot.
  int owner = -1;
  int chosen = 0;  // predicate index
  double alpha = 0.0;
  /// Another candidate reached the same score and lost the tie-break.
  bool tied = false;
};

struct ExtractionResult {
  SymbolicProgram program;
  /// Choices of every slot, reachable or not.
  std::vector<SlotChoice> slot_assignments;
  /// Printed name per model predicate ("" when pruned).
  std::vector<std::string> names;
  /// Aux predicates not reachable from the target.
  std::vector<std::string> pruned;
  /// Symbols used in clause bodies, for the crisp evaluator.
  std::vector<PredicateSymbol> symbols;
  /// Clauses of the form `head :- true.`
  bool degenerate = false;
  std::vector<std::string> notes;
};

/// Per-slot argmax of the noise-free scores. Ties go to the lowest layer,
/// then the smallest name.
std::vector<SlotChoice> argmax_assignment(const Model& model);

ExtractionResult extract_program(const Model& model);

/// Overwrites all embeddings with one-hot-aligned ones: predicate p gets the
/// unit vector e_p, and each slot copies the embedding of `choice[slot]`.
/// Needs dim >= number of predicates.
void align_embeddings(Model& model, const std::vector<int>& choice);

/// Slot choice vector from names: keys are "<aux name>:<slot index>" and
/// values predicate names. Unlisted slots pick `false`; the target slot
/// picks `target_choice`.
std::vector<int> named_assignment(const Model& model, const std::map<std::string, std::string>& slots,
                                  const std::string& target_choice);

struct SymbolicScore {
  double mse = 1.0;
  bool success = false;
  int errors = 0;
};

SymbolicScore symbolic_evaluate(const ExtractionResult& result, const IlpTask& task, int max_steps);

/// Structured audit dump with the program text and per-slot scores.
std::string extraction_to_json(const ExtractionResult& result, const Model& model);

}  // namespace hri
