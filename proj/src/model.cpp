#include "hri/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hri/random.hpp"

namespace hri {

std::string_view ProtoRule::tag() const {
  switch (id) {
    case ProtoRuleId::A: return "a";
    case ProtoRuleId::B: return "b";
    case ProtoRuleId::C: return "c";
    case ProtoRuleId::I: return "i";
  }
  return "?";
}

std::vector<ProtoRule> proto_rules(ProtoSet set) {
  switch (set) {
    case ProtoSet::r0:
      return {{ProtoRuleId::A, false}, {ProtoRuleId::B, false}, {ProtoRuleId::C, false}};
    case ProtoSet::r0_or:
      return {{ProtoRuleId::A, true}, {ProtoRuleId::B, true}, {ProtoRuleId::C, true}};
    case ProtoSet::r_star:
      return {{ProtoRuleId::A, true}, {ProtoRuleId::B, true}, {ProtoRuleId::C, true}, {ProtoRuleId::I, false}};
  }
  return {};
}

std::string to_string(ProtoSet s) {
  switch (s) {
    case ProtoSet::r0: return "R0";
    case ProtoSet::r0_or: return "R0or";
    case ProtoSet::r_star: return "R*";
  }
  return "?";
}

std::string to_string(Recursivity r) {
  switch (r) {
    case Recursivity::none: return "none";
    case Recursivity::iso: return "iso";
    case Recursivity::full: return "full";
  }
  return "?";
}

ProtoSet parse_proto_set(std::string_view text) {
  if (text == "R0" || text == "r0") return ProtoSet::r0;
  if (text == "R0or" || text == "r0or" || text == "R0v") return ProtoSet::r0_or;
  if (text == "R*" || text == "r*" || text == "rstar" || text == "Rstar") return ProtoSet::r_star;
  throw std::invalid_argument("unknown proto-rule set '" + std::string(text) + "'");
}

Recursivity parse_recursivity(std::string_view text) {
  if (text == "none") return Recursivity::none;
  if (text == "iso" || text == "iso-recursive") return Recursivity::iso;
  if (text == "full") return Recursivity::full;
  throw std::invalid_argument("unknown recursivity '" + std::string(text) + "'");
}

void validate(const ModelConfig& config) {
  if (config.max_depth < 1) throw std::invalid_argument("max-depth must be >= 1");
  if (!(config.temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (config.embedding_dim != 0 && config.embedding_dim < 2) throw std::invalid_argument("embedding dim must be >= 2");
  if (config.aux_per_rule < 1) throw std::invalid_argument("aux-per-rule must be >= 1");
}

int Model::predicate_index(std::string_view name) const {
  for (std::size_t i = 0; i < predicates.size(); ++i)
    if (predicates[i].name == name) return static_cast<int>(i);
  return -1;
}

const AuxPredicate* Model::aux_for(int p) const {
  if (p < num_inputs) return nullptr;
  return &aux[static_cast<std::size_t>(p - num_inputs)];
}

std::vector<int> candidate_set(const Model& model, int layer, int aux_predicate) {
  std::vector<int> out;
  for (std::size_t p = 0; p < model.predicates.size(); ++p) {
    const int l = model.layer_of[p];
    const bool take = l < layer || (model.config.recursivity == Recursivity::full && l == layer) ||
                      (model.config.recursivity == Recursivity::iso && static_cast<int>(p) == aux_predicate);
    if (take && model.predicates[p].arity <= 2) out.push_back(static_cast<int>(p));
  }
  return out;
}

Model build_model(const ModelConfig& config, const std::vector<PredicateSymbol>& inputs,
                  const PredicateSymbol& target, std::uint64_t seed) {
  validate(config);
  const auto has = [&](std::string_view name) {
    return std::any_of(inputs.begin(), inputs.end(), [&](const auto& p) { return p.name == name; });
  };
  if (!has(kTrue) || !has(kFalse)) throw std::invalid_argument("inputs must include true and false");
  if (target.arity < 1 || target.arity > 2) throw std::invalid_argument("target arity must be 1 or 2");

  Model m;
  m.config = config;
  m.seed = seed;
  m.target = target;
  m.predicates = inputs;
  m.num_inputs = static_cast<int>(inputs.size());
  m.layer_of.assign(inputs.size(), 0);

  const auto rules = proto_rules(config.proto_set);
  for (int layer = 1; layer <= config.max_depth; ++layer) {
    for (const auto& rule : rules) {
      for (int k = 0; k < config.aux_per_rule; ++k) {
        AuxPredicate aux;
        aux.predicate = static_cast<int>(m.predicates.size());
        aux.rule = rule;
        aux.layer = layer;
        m.predicates.push_back({"aux_l" + std::to_string(layer) + "_" + std::string(rule.tag()) + std::to_string(k),
                                rule.head_arity(), PredicateKind::auxiliary});
        m.layer_of.push_back(layer);
        m.aux.push_back(std::move(aux));
      }
    }
  }
  int slot = 0;
  for (auto& aux : m.aux) {
    aux.candidates = candidate_set(m, aux.layer, aux.predicate);
    for (int s = 0; s < aux.rule.slot_count(); ++s) aux.slots.push_back(slot++);
  }
  for (const auto& aux : m.aux)
    if (aux.layer == config.max_depth && aux.rule.head_arity() == target.arity)
      m.target_candidates.push_back(aux.predicate);
  if (m.target_candidates.empty())
    throw std::invalid_argument("no layer-" + std::to_string(config.max_depth) + " aux predicate of arity " +
                                std::to_string(target.arity));
  m.target_slot = slot++;
  m.num_slots = slot;

  m.dim = config.embedding_dim > 0 ? config.embedding_dim : std::max<int>(16, static_cast<int>(m.predicates.size()));
  m.weights.resize((m.predicates.size() + static_cast<std::size_t>(m.num_slots)) * static_cast<std::size_t>(m.dim));
  Rng rng(mix_seed({seed, 0x6d6f64656cULL}));
  const double scale = 1.0 / std::sqrt(static_cast<double>(m.dim));
  for (auto& w : m.weights) w = rng.normal() * scale;
  return m;
}

// ---------------------------------------------------------------------------

namespace {
using nlohmann::json;

json config_json(const ModelConfig& c) {
  return {{"max-depth", c.max_depth},
          {"embedding-dim", c.embedding_dim},
          {"recursivity", to_string(c.recursivity)},
          {"temperature", c.temperature},
          {"proto-set", to_string(c.proto_set)},
          {"pool", to_string(c.ops.pool)},
          {"fuzzy-and", to_string(c.ops.and_op)},
          {"fuzzy-or", to_string(c.ops.or_op)},
          {"similarity", to_string(c.ops.similarity)},
          {"aux-per-rule", c.aux_per_rule}};
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.max_depth = j.at("max-depth").get<int>();
  c.embedding_dim = j.at("embedding-dim").get<int>();
  c.recursivity = parse_recursivity(j.at("recursivity").get<std::string>());
  c.temperature = j.at("temperature").get<double>();
  c.proto_set = parse_proto_set(j.at("proto-set").get<std::string>());
  c.ops.pool = parse_pool(j.at("pool").get<std::string>());
  c.ops.and_op = parse_and(j.at("fuzzy-and").get<std::string>());
  c.ops.or_op = parse_or(j.at("fuzzy-or").get<std::string>());
  c.ops.similarity = parse_similarity(j.at("similarity").get<std::string>());
  c.aux_per_rule = j.at("aux-per-rule").get<int>();
  return c;
}
}  // namespace

std::string model_to_json(const Model& model) {
  json doc;
  doc["format"] = "hri-model";
  doc["version"] = 1;
  doc["config"] = config_json(model.config);
  doc["seed"] = model.seed;
  doc["dim"] = model.dim;
  doc["inputs"] = json::array();
  for (int p = 0; p < model.num_inputs; ++p)
    doc["inputs"].push_back({{"name", model.predicates[p].name}, {"arity", model.predicates[p].arity}});
  doc["target"] = {{"name", model.target.name}, {"arity", model.target.arity}};
  doc["weights"] = model.weights;
  return doc.dump() + "\n";
}

Model model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed checkpoint: ") + e.what());
  }
  if (doc.value("format", std::string()) != "hri-model") throw std::runtime_error("not a model checkpoint");
  if (doc.value("version", 0) != 1) throw std::runtime_error("unsupported checkpoint version");
  try {
    std::vector<PredicateSymbol> inputs;
    for (const auto& p : doc.at("inputs"))
      inputs.push_back({p.at("name").get<std::string>(), p.at("arity").get<int>(), PredicateKind::input});
    const PredicateSymbol target{doc.at("target").at("name").get<std::string>(),
                                 doc.at("target").at("arity").get<int>(), PredicateKind::target};
    auto config = config_from(doc.at("config"));
    config.embedding_dim = doc.at("dim").get<int>();
    Model m = build_model(config, inputs, target, doc.at("seed").get<std::uint64_t>());
    m.config.embedding_dim = doc.at("config").at("embedding-dim").get<int>();
    auto weights = doc.at("weights").get<std::vector<double>>();
    if (weights.size() != m.weights.size())
      throw std::runtime_error("checkpoint holds " + std::to_string(weights.size()) + " weights, model needs " +
                               std::to_string(m.weights.size()));
    m.weights = std::move(weights);
    return m;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model_to_json(model);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace hri
