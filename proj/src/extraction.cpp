#include "hri/extraction.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include <json.hpp>

#include "hri/inference.hpp"

namespace hri {

namespace {

Literal make_literal(const std::string& name, int arity, char v1, char v2) {
  if (arity == 0) return {name, {}};
  if (arity == 1) return {name, {v1}};
  return {name, {v1, v2}};
}

}  // namespace

std::vector<SlotChoice> argmax_assignment(const Model& model) {
  const auto scores = slot_scores(model);
  std::vector<int> owner(static_cast<std::size_t>(model.num_slots), -1);
  for (const auto& aux : model.aux)
    for (int s : aux.slots) owner[static_cast<std::size_t>(s)] = aux.predicate;
  std::vector<SlotChoice> out;
  for (int s = 0; s < model.num_slots; ++s) {
    const auto& cands = slot_candidates(model, s);
    const auto& a = scores[static_cast<std::size_t>(s)];
    std::size_t best = 0;
    bool tied = false;
    for (std::size_t i = 1; i < cands.size(); ++i) {
      if (a[i] > a[best]) {
        best = i;
        tied = false;
      } else if (a[i] == a[best]) {
        tied = true;
        const int pb = cands[best], pi = cands[i];
        const auto key = [&](int p) {
          return std::make_pair(model.layer_of[static_cast<std::size_t>(p)], model.predicates[static_cast<std::size_t>(p)].name);
        };
        if (key(pi) < key(pb)) best = i;
      }
    }
    out.push_back({s, owner[static_cast<std::size_t>(s)], cands[best], a[best], tied});
  }
  return out;
}

ExtractionResult extract_program(const Model& model) {
  ExtractionResult r;
  r.slot_assignments = argmax_assignment(model);
  r.program.target = model.target;
  const std::size_t np = model.predicates.size();
  r.names.assign(np, "");
  for (int p = 0; p < model.num_inputs; ++p) r.names[static_cast<std::size_t>(p)] = model.predicates[static_cast<std::size_t>(p)].name;

  const int q = r.slot_assignments[static_cast<std::size_t>(model.target_slot)].chosen;
  r.names[static_cast<std::size_t>(q)] = model.target.name;
  int next_aux = 1;
  std::deque<int> queue{q};
  std::vector<char> seen(np, 0);
  seen[static_cast<std::size_t>(q)] = 1;

  auto use = [&](int p) {
    if (p < model.num_inputs || seen[static_cast<std::size_t>(p)]) return;
    seen[static_cast<std::size_t>(p)] = 1;
    r.names[static_cast<std::size_t>(p)] = "aux" + std::to_string(next_aux++);
    queue.push_back(p);
  };

  while (!queue.empty()) {
    const int p = queue.front();
    queue.pop_front();
    const AuxPredicate& aux = *model.aux_for(p);
    std::vector<int> chosen;
    for (int s : aux.slots) chosen.push_back(r.slot_assignments[static_cast<std::size_t>(s)].chosen);
    const auto lit = [&](int c, char v1, char v2) {
      // Naming happens lazily so only literals that survive normalization
      // pull their predicate into the program.
      const auto& sym = model.predicates[static_cast<std::size_t>(c)];
      std::string name = r.names[static_cast<std::size_t>(c)];
      if (name.empty()) name = "\x01" + std::to_string(c);
      return make_literal(name, sym.arity, v1, v2);
    };
    const int arity = aux.rule.head_arity();
    const Literal head = arity == 1 ? Literal{r.names[static_cast<std::size_t>(p)], {'X'}}
                                    : Literal{r.names[static_cast<std::size_t>(p)], {'X', 'Y'}};
    std::vector<DefiniteClause> clauses;
    switch (aux.rule.id) {
      case ProtoRuleId::A:
        clauses = normalize_aux_clause(head, {lit(chosen[0], 'X', 'Z'), lit(chosen[1], 'Z', 'X')},
                                       aux.rule.disjunct ? std::optional<Literal>(lit(chosen[2], 'X', 'T')) : std::nullopt,
                                       aux.layer);
        break;
      case ProtoRuleId::B:
        clauses = normalize_aux_clause(head, {lit(chosen[0], 'X', 'Z'), lit(chosen[1], 'Z', 'Y')},
                                       aux.rule.disjunct ? std::optional<Literal>(lit(chosen[2], 'X', 'Y')) : std::nullopt,
                                       aux.layer);
        break;
      case ProtoRuleId::C:
        clauses = normalize_aux_clause(head, {lit(chosen[0], 'X', 'Y'), lit(chosen[1], 'Y', 'X')},
                                       aux.rule.disjunct ? std::optional<Literal>(lit(chosen[2], 'X', 'Y')) : std::nullopt,
                                       aux.layer);
        break;
      case ProtoRuleId::I: {
        const Literal body = lit(chosen[0], 'Y', 'X');
        if (body.predicate != kFalse) clauses.push_back({head, {body}, aux.layer});
        break;
      }
    }
    for (auto& clause : clauses) {
      for (auto& b : clause.body) {
        if (!b.predicate.empty() && b.predicate[0] == '\x01') {
          const int c = std::stoi(b.predicate.substr(1));
          use(c);
          b.predicate = r.names[static_cast<std::size_t>(c)];
        }
      }
      if (clause.body.size() == 1 && clause.body[0].predicate == kTrue) {
        r.degenerate = true;
        r.notes.push_back("degenerate clause: " + to_string(clause));
      }
      r.program.clauses.push_back(std::move(clause));
    }
  }
  // Names used in bodies may refer to aux predicates visited after their
  // user; patch any that were still placeholders.
  for (auto& clause : r.program.clauses)
    for (auto& b : clause.body)
      if (!b.predicate.empty() && b.predicate[0] == '\x01')
        b.predicate = r.names[static_cast<std::size_t>(std::stoi(b.predicate.substr(1)))];

  for (std::size_t p = 0; p < np; ++p) {
    const auto& sym = model.predicates[p];
    if (static_cast<int>(p) < model.num_inputs) {
      r.symbols.push_back(sym);
    } else if (!r.names[p].empty()) {
      if (r.names[p] != model.target.name) r.symbols.push_back({r.names[p], sym.arity, PredicateKind::auxiliary});
    } else {
      r.pruned.push_back(sym.name);
    }
  }
  r.symbols.push_back(model.target);
  return r;
}

void align_embeddings(Model& model, const std::vector<int>& choice) {
  const std::size_t np = model.predicates.size();
  if (static_cast<std::size_t>(model.dim) < np) throw std::invalid_argument("embedding dim too small for one-hot alignment");
  if (choice.size() != static_cast<std::size_t>(model.num_slots)) throw std::invalid_argument("one choice per slot needed");
  std::fill(model.weights.begin(), model.weights.end(), 0.0);
  for (std::size_t p = 0; p < np; ++p) model.predicate_embedding(static_cast<int>(p))[p] = 1.0;
  for (int s = 0; s < model.num_slots; ++s) {
    const int c = choice[static_cast<std::size_t>(s)];
    const auto& cands = slot_candidates(model, s);
    if (std::find(cands.begin(), cands.end(), c) == cands.end())
      throw std::invalid_argument("predicate '" + model.predicates[static_cast<std::size_t>(c)].name +
                                  "' is not a candidate of slot " + std::to_string(s));
    model.slot_embedding(s)[static_cast<std::size_t>(c)] = 1.0;
  }
}

std::vector<int> named_assignment(const Model& model, const std::map<std::string, std::string>& slots,
                                  const std::string& target_choice) {
  const auto index = [&](const std::string& name) {
    const int p = model.predicate_index(name);
    if (p < 0) throw std::invalid_argument("unknown predicate '" + name + "'");
    return p;
  };
  std::vector<int> choice(static_cast<std::size_t>(model.num_slots), index(std::string(kFalse)));
  for (const auto& [key, pred] : slots) {
    const auto colon = key.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("slot key '" + key + "' needs <aux>:<index>");
    const auto* aux = model.aux_for(index(key.substr(0, colon)));
    if (!aux) throw std::invalid_argument("'" + key + "' does not name an aux predicate");
    const auto k = static_cast<std::size_t>(std::stoi(key.substr(colon + 1)));
    if (k >= aux->slots.size()) throw std::invalid_argument("slot index out of range in '" + key + "'");
    choice[static_cast<std::size_t>(aux->slots[k])] = index(pred);
  }
  choice[static_cast<std::size_t>(model.target_slot)] = index(target_choice);
  return choice;
}

SymbolicScore symbolic_evaluate(const ExtractionResult& result, const IlpTask& task, int max_steps) {
  const auto facts = forward_chain(result.program, task.background, task.constants, max_steps, result.symbols);
  SymbolicScore score;
  const std::size_t total = task.positives.size() + task.negatives.size();
  if (total == 0) {
    score.mse = 0.0;
    score.success = true;
    return score;
  }
  for (const auto& a : task.positives)
    if (!facts.count(a)) ++score.errors;
  for (const auto& a : task.negatives)
    if (facts.count(a)) ++score.errors;
  score.mse = static_cast<double>(score.errors) / static_cast<double>(total);
  score.success = score.mse < 1e-4;
  return score;
}

std::string extraction_to_json(const ExtractionResult& result, const Model& model) {
  using nlohmann::json;
  const auto scores = slot_scores(model);
  json doc;
  doc["program"] = to_string(result.program);
  doc["target"] = model.target.name;
  doc["degenerate"] = result.degenerate;
  doc["pruned"] = result.pruned;
  doc["notes"] = result.notes;
  json slots = json::array();
  for (const auto& choice : result.slot_assignments) {
    json s;
    s["slot"] = choice.slot;
    s["owner"] = choice.owner < 0 ? std::string("<target>") : model.predicates[static_cast<std::size_t>(choice.owner)].name;
    s["printed_as"] = choice.owner < 0 ? model.target.name : result.names[static_cast<std::size_t>(choice.owner)];
    s["chosen"] = model.predicates[static_cast<std::size_t>(choice.chosen)].name;
    s["alpha"] = choice.alpha;
    s["tied"] = choice.tied;
    json cands = json::object();
    const auto& cs = slot_candidates(model, choice.slot);
    for (std::size_t i = 0; i < cs.size(); ++i)
      cands[model.predicates[static_cast<std::size_t>(cs[i])].name] = scores[static_cast<std::size_t>(choice.slot)][i];
    s["scores"] = cands;
    slots.push_back(s);
  }
  doc["slots"] = slots;
  return doc.dump(2) + "\n";
}

}  // namespace hri
