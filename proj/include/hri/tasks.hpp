#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hri/logic.hpp"

namespace hri {

class TaskError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IlpTask {
  std::string name;
  std::vector<std::string> constants;
  FactSet background;
  FactSet positives;
  FactSet negatives;
  PredicateSymbol target;
  /// Always contains true/false first.
  std::vector<PredicateSymbol> input_predicates;

  friend bool operator==(const IlpTask&, const IlpTask&) = default;
};

struct TaskSpec {
  std::string name;
  int num_constants = 0;
  std::uint64_t seed = 0;
};

/// Per-task sizes and inference steps.
struct TaskDefaults {
  int max_depth = 4;
  int train_steps = 4;
  int eval_steps = 4;
  int train_num_constants = 0;
  int eval_num_constants = 0;
  int min_constants = 2;
  /// True for tasks whose data only depends on the number of constants.
  bool deterministic = false;
};

const std::vector<std::string>& task_names();
TaskDefaults task_defaults(const std::string& name);

/// Deterministic in (name, num_constants, seed); deterministic tasks ignore
/// the seed. Throws TaskError for unknown names or too few constants.
IlpTask generate_task(const TaskSpec& spec);

/// Options for tasks whose negatives are "a subset" of the complement.
struct NegativeSampling {
  /// Fraction of the complement to keep, in (0, 1]. 1 keeps everything.
  double keep_fraction = 1.0;
  std::uint64_t seed = 0;
};
IlpTask subsample_negatives(const IlpTask& task, const NegativeSampling& sampling);

/// Builds a task from explicit background facts, labelling every grounding of
/// the target with the task's ground-truth relation. Used for hand-made
/// instances such as small worked examples.
IlpTask label_task(const std::string& name, std::vector<std::string> constants, FactSet background);

/// Checks the IlpTask invariants (disjoint P/N, atoms grounded over the
/// constants with declared arities, true/false present).
void validate_task(const IlpTask& task);

/// Reference program for the task, if one exists. Inverse relations are
/// spelled out as explicit auxiliary predicates.
std::optional<SymbolicProgram> reference_solution(const std::string& name);

// JSON task files.
std::string task_to_json(const IlpTask& task);
IlpTask task_from_json(const std::string& text);
void save_task(const IlpTask& task, const std::filesystem::path& path);
IlpTask load_task(const std::filesystem::path& path);

}  // namespace hri
