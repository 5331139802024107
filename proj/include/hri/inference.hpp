#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hri/autodiff.hpp"
#include "hri/model.hpp"
#include "hri/random.hpp"
#include "hri/tasks.hpp"

namespace hri {

/// Truth degrees of one predicate: a scalar, an n-vector or a row-major n×n
/// matrix depending on arity.
struct Valuation {
  int arity = 0;
  int n = 0;
  std::vector<double> data;

  double at(int a = 0, int b = 0) const {
    if (arity == 0) return data[0];
    if (arity == 1) return data[static_cast<std::size_t>(a)];
    return data[static_cast<std::size_t>(a) * static_cast<std::size_t>(n) + static_cast<std::size_t>(b)];
  }
  static Valuation zeros(int arity, int n);
};

/// Broadcasts a valuation of arity <= 2 to an n×n matrix: V̄[x,z] = V[x].
Valuation project(const Valuation& v, int n);

/// Raw similarity between two embeddings. L1/L2 are negated distances.
/// Throws std::domain_error on a zero vector under cosine.
double similarity(Similarity kind, std::span<const double> a, std::span<const double> b);

/// softmax((sim + g·Gumbel) / τ) over the candidates. `rng` is only used
/// when gumbel_scale > 0.
std::vector<double> unification_scores(std::span<const double> slot, const std::vector<std::span<const double>>& candidates,
                                       double temperature, Similarity kind, double gumbel_scale = 0.0,
                                       Rng* rng = nullptr);

/// Background valuations and labels of one task, laid out for a model.
struct Instance {
  int n = 0;
  std::vector<std::string> constants;
  std::vector<Valuation> inputs;  // indexed like the model's input predicates
  int target_arity = 2;
  std::vector<double> labels;     // n^arity, 0/1
  std::vector<char> labelled;     // 1 where the atom is in P ∪ N
};

/// Throws std::invalid_argument if the task misses one of the model inputs
/// or the target arity differs.
Instance make_instance(const Model& model, const IlpTask& task);

struct NoiseConfig {
  double gumbel_scale = 0.0;
  Rng* rng = nullptr;
};

/// Differentiable rollout recorded on a tape.
struct InferenceGraph {
  Tape tape;
  Tape::Id weights = 0;
  std::vector<Tape::Id> alpha;    // per slot
  std::vector<Tape::Id> current;  // per predicate, own arity, after the last step
  Tape::Id target = 0;
  /// Per step: valuations of every predicate then the target.
  std::vector<std::vector<Valuation>> trace;
};

/// `weights` replaces model.weights (e.g. a noisy copy); pass model.weights
/// for a clean pass. When `requires_grad` is false no backward closures are
/// kept.
InferenceGraph build_inference_graph(const Model& model, std::span<const double> weights, const Instance& inst,
                                     int steps, const NoiseConfig& noise, bool requires_grad, bool keep_trace = false);

struct InferenceResult {
  std::vector<Valuation> valuations;  // per predicate
  Valuation target;
  std::vector<std::vector<double>> scores;  // α per slot
  std::vector<std::vector<Valuation>> trace;
};

InferenceResult run_inference(const Model& model, const Instance& inst, int steps, const NoiseConfig& noise = {},
                              bool keep_trace = false);

/// Noise-free α per slot.
std::vector<std::vector<double>> slot_scores(const Model& model);

/// Candidate list of a slot (the target slot included).
const std::vector<int>& slot_candidates(const Model& model, int slot);

/// Target predictions keyed by atom, for all target groundings.
std::map<GroundAtom, double> target_predictions(const Valuation& target, const std::vector<std::string>& constants,
                                                const std::string& target_name);
/// 0/1 labels of the labelled atoms.
std::map<GroundAtom, int> target_truth(const IlpTask& task);
/// MSE over labelled atoms.
double soft_mse(const Valuation& target, const Instance& inst);

/// `pred(a,b) = 0.5` lines, one per grounding.
std::string dump_valuation(const Valuation& v, const std::string& name, const std::vector<std::string>& constants);

/// Nominal work of the conjunction kernels: k1·k2·n^3 for B, k1·k2·n^2 for
/// A and C, summed over calls on this thread.
namespace op_counter {
void reset();
std::uint64_t get();
}  // namespace op_counter

}  // namespace hri
