#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hri/logic.hpp"
#include "hri/operators.hpp"

namespace hri {

/// Proto-rule templates. Slot variable patterns:
///   A*: H(X)   <- (B1(X,Y) ∧ B2(Y,X)) ∨ B3(X,T)     Y, T existential
///   B*: H(X,Y) <- (B1(X,Z) ∧ B2(Z,Y)) ∨ B3(X,Y)     Z existential
///   C*: H(X,Y) <- (B1(X,Y) ∧ B2(Y,X)) ∨ B3(X,Y)
///   I:  H(X,Y) <- F(Y,X)
/// Without the disjunct (the R0 set) only B1 and B2 remain.
enum class ProtoRuleId { A, B, C, I };

struct ProtoRule {
  ProtoRuleId id = ProtoRuleId::B;
  bool disjunct = true;

  int head_arity() const { return id == ProtoRuleId::A ? 1 : 2; }
  int slot_count() const { return id == ProtoRuleId::I ? 1 : (disjunct ? 3 : 2); }
  std::string_view tag() const;

  friend bool operator==(const ProtoRule&, const ProtoRule&) = default;
};

enum class ProtoSet { r0, r0_or, r_star };
enum class Recursivity { none, iso, full };

std::vector<ProtoRule> proto_rules(ProtoSet set);

std::string to_string(ProtoSet s);
std::string to_string(Recursivity r);
ProtoSet parse_proto_set(std::string_view text);
Recursivity parse_recursivity(std::string_view text);

struct ModelConfig {
  int max_depth = 4;
  /// 0 selects max(16, |inputs| + |aux|).
  int embedding_dim = 0;
  Recursivity recursivity = Recursivity::full;
  double temperature = 0.1;
  ProtoSet proto_set = ProtoSet::r_star;
  OperatorConfig ops;
  int aux_per_rule = 1;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void validate(const ModelConfig& config);

struct AuxPredicate {
  int predicate = 0;  // index into Model::predicates
  ProtoRule rule;
  int layer = 1;
  std::vector<int> candidates;  // predicate indices, shared by all slots
  std::vector<int> slots;       // slot indices, one per body slot
};

/// Layered collection of auxiliary predicates over the input predicates.
/// All embeddings live in one flat buffer: predicate embeddings first, then
/// one embedding per body slot, then the target slot.
class Model {
 public:
  ModelConfig config;
  int dim = 0;
  std::vector<PredicateSymbol> predicates;  // inputs first, then aux by layer
  std::vector<int> layer_of;                // 0 for inputs
  int num_inputs = 0;
  std::vector<AuxPredicate> aux;            // ascending layer
  PredicateSymbol target;
  std::vector<int> target_candidates;
  int target_slot = 0;
  int num_slots = 0;
  std::uint64_t seed = 0;
  std::vector<double> weights;

  std::span<double> predicate_embedding(int p) { return {weights.data() + offset_pred(p), span_len()}; }
  std::span<const double> predicate_embedding(int p) const { return {weights.data() + offset_pred(p), span_len()}; }
  std::span<double> slot_embedding(int s) { return {weights.data() + offset_slot(s), span_len()}; }
  std::span<const double> slot_embedding(int s) const { return {weights.data() + offset_slot(s), span_len()}; }

  /// Start of the slot block in `weights`; coordinates before it are
  /// predicate embeddings.
  std::size_t rule_offset() const { return predicates.size() * static_cast<std::size_t>(dim); }
  int predicate_index(std::string_view name) const;
  /// Aux entry defining predicate `p`, or nullptr for inputs.
  const AuxPredicate* aux_for(int p) const;

 private:
  std::size_t span_len() const { return static_cast<std::size_t>(dim); }
  std::size_t offset_pred(int p) const { return static_cast<std::size_t>(p) * span_len(); }
  std::size_t offset_slot(int s) const { return rule_offset() + static_cast<std::size_t>(s) * span_len(); }
};

/// Builds layers 1..max_depth with aux_per_rule aux predicates per
/// proto-rule; embeddings are i.i.d. N(0, 1/d).
Model build_model(const ModelConfig& config, const std::vector<PredicateSymbol>& inputs,
                  const PredicateSymbol& target, std::uint64_t seed);

/// Predicates an aux predicate at `layer` may use in its body:
/// none -> layers < layer; iso -> layers < layer plus itself; full -> layers <= layer.
std::vector<int> candidate_set(const Model& model, int layer, int aux_predicate);

// Checkpoints are JSON; doubles round-trip exactly.
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace hri
