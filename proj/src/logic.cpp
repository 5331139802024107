#include "hri/logic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace hri {

PredicateSymbol true_symbol() { return {std::string(kTrue), 0, PredicateKind::input}; }
PredicateSymbol false_symbol() { return {std::string(kFalse), 0, PredicateKind::input}; }
PredicateSymbol equal_symbol() { return {"equal", 2, PredicateKind::input}; }

FactSet equality_facts(const std::vector<std::string>& constants) {
  FactSet out;
  for (const auto& c : constants) out.insert({"equal", {c, c}});
  return out;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

namespace {

std::string join_args(const std::vector<std::string>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    out += args[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits `name(a,b)` into name and raw argument strings.
std::pair<std::string, std::vector<std::string>> split_term(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos) {
    std::string name(text);
    if (!is_identifier(name)) throw LogicError("invalid predicate name '" + name + "'");
    return {name, {}};
  }
  if (text.back() != ')') throw LogicError("missing ')' in '" + std::string(text) + "'");
  std::string name(trim(text.substr(0, open)));
  if (!is_identifier(name)) throw LogicError("invalid predicate name '" + name + "'");
  std::vector<std::string> args;
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  std::size_t start = 0;
  while (start <= inner.size()) {
    const auto comma = inner.find(',', start);
    const auto piece = trim(inner.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start));
    if (piece.empty()) throw LogicError("empty argument in '" + std::string(text) + "'");
    args.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (args.size() > 2) throw LogicError("arity > 2 is not supported: '" + std::string(text) + "'");
  return {name, args};
}

Literal to_literal(std::string_view text) {
  auto [name, args] = split_term(text);
  Literal lit{name, {}};
  for (const auto& a : args) {
    if (a.size() != 1 || !std::isupper(static_cast<unsigned char>(a[0])))
      throw LogicError("expected a single uppercase variable, got '" + a + "'");
    lit.vars.push_back(a[0]);
  }
  return lit;
}

// Splits a clause body on top-level commas.
std::vector<std::string_view> split_body(std::string_view body) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '(') ++depth;
    if (body[i] == ')') --depth;
    if (body[i] == ',' && depth == 0) {
      parts.push_back(trim(body.substr(start, i - start)));
      start = i + 1;
    }
  }
  parts.push_back(trim(body.substr(start)));
  return parts;
}

}  // namespace

std::string to_string(const GroundAtom& atom) {
  if (atom.args.empty()) return atom.predicate;
  return atom.predicate + "(" + join_args(atom.args) + ")";
}

std::string to_string(const Literal& literal) {
  if (literal.vars.empty()) return literal.predicate;
  std::string out = literal.predicate + "(";
  for (std::size_t i = 0; i < literal.vars.size(); ++i) {
    if (i) out += ',';
    out += literal.vars[i];
  }
  return out + ")";
}

std::string to_string(const DefiniteClause& clause) {
  std::string out = to_string(clause.head);
  if (!clause.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < clause.body.size(); ++i) {
      if (i) out += ", ";
      out += to_string(clause.body[i]);
    }
  }
  return out + ".";
}

std::string to_string(const SymbolicProgram& program) {
  std::string out;
  for (const auto& c : program.clauses) out += to_string(c) + "\n";
  return out;
}

GroundAtom parse_atom(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  auto [name, args] = split_term(text);
  for (const auto& a : args)
    if (!is_identifier(a)) throw LogicError("invalid constant '" + a + "' in '" + std::string(text) + "'");
  return {name, args};
}

DefiniteClause parse_clause(std::string_view text) {
  text = trim(text);
  if (text.empty() || text.back() != '.') throw LogicError("clause must end with '.': " + std::string(text));
  text.remove_suffix(1);
  DefiniteClause clause;
  const auto arrow = text.find(":-");
  if (arrow == std::string_view::npos) {
    clause.head = to_literal(text);
    return clause;
  }
  clause.head = to_literal(text.substr(0, arrow));
  for (auto part : split_body(text.substr(arrow + 2))) {
    if (part.empty()) throw LogicError("empty body literal in: " + std::string(text));
    clause.body.push_back(to_literal(part));
  }
  return clause;
}

SymbolicProgram parse_program(std::string_view text, std::string_view target_name) {
  SymbolicProgram program;
  program.target = {std::string(target_name), -1, PredicateKind::target};
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::map<std::string, std::size_t> arity;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '%') continue;
    try {
      program.clauses.push_back(parse_clause(body));
      const auto& c = program.clauses.back();
      auto check = [&](const Literal& l) {
        auto [it, fresh] = arity.emplace(l.predicate, l.vars.size());
        if (!fresh && it->second != l.vars.size())
          throw LogicError("predicate '" + l.predicate + "' used with arities " + std::to_string(it->second) +
                           " and " + std::to_string(l.vars.size()));
      };
      check(c.head);
      for (const auto& b : c.body) check(b);
    } catch (const LogicError& e) {
      throw LogicError("line " + std::to_string(lineno) + ": " + e.what());
    }
    const auto& head = program.clauses.back().head;
    if (head.predicate == target_name && program.target.arity < 0)
      program.target.arity = static_cast<int>(head.vars.size());
  }
  if (program.target.arity < 0) program.target.arity = 0;
  return program;
}

// ---------------------------------------------------------------------------

namespace {

struct Table {
  int arity = 0;
  std::vector<char> truth;
};

class Chainer {
 public:
  Chainer(const SymbolicProgram& program, const FactSet& facts, const std::vector<std::string>& constants,
          const std::vector<PredicateSymbol>& known)
      : program_(program), constants_(constants), n_(static_cast<int>(constants.size())) {
    for (int i = 0; i < n_; ++i) index_.emplace(constants[i], i);

    declare(std::string(kTrue), 0);
    declare(std::string(kFalse), 0);
    tables_[std::string(kTrue)].truth[0] = 1;
    for (const auto& p : known) declare(p.name, p.arity);
    for (const auto& atom : facts) {
      declare(atom.predicate, static_cast<int>(atom.args.size()));
      tables_[atom.predicate].truth[offset(atom)] = 1;
    }
    for (const auto& clause : program.clauses) declare(clause.head.predicate, arity(clause.head));
    for (const auto& clause : program.clauses) {
      for (const auto& lit : clause.body) {
        auto it = tables_.find(lit.predicate);
        if (it == tables_.end()) throw LogicError("unknown predicate '" + lit.predicate + "' in program body");
        if (it->second.arity != arity(lit))
          throw LogicError("predicate '" + lit.predicate + "' used with arity " + std::to_string(arity(lit)) +
                           ", declared " + std::to_string(it->second.arity));
      }
      strata_[clause.stratum].push_back(&clause);
    }
    builtin_true_in_facts_ = facts.count(GroundAtom{std::string(kTrue), {}}) > 0;
  }

  ChainTrace run(int max_steps) {
    ChainTrace trace;
    for (int pass = 0; pass < max_steps; ++pass) {
      bool changed = false;
      for (auto& [stratum, clauses] : strata_) {
        const auto snapshot = tables_;
        for (const auto* clause : clauses) changed |= fire(*clause, snapshot);
      }
      ++trace.passes;
      trace.sizes.push_back(count());
      if (!changed) {
        trace.fixpoint = true;
        break;
      }
    }
    if (max_steps <= 0) trace.fixpoint = program_.clauses.empty();
    trace.facts = collect();
    return trace;
  }

 private:
  static int arity(const Literal& lit) { return static_cast<int>(lit.vars.size()); }

  void declare(const std::string& name, int ar) {
    auto [it, inserted] = tables_.try_emplace(name);
    if (inserted) {
      it->second.arity = ar;
      std::size_t size = 1;
      for (int i = 0; i < ar; ++i) size *= static_cast<std::size_t>(n_);
      it->second.truth.assign(size, 0);
    } else if (it->second.arity != ar) {
      throw LogicError("predicate '" + name + "' used with arities " + std::to_string(it->second.arity) +
                       " and " + std::to_string(ar));
    }
  }

  std::size_t offset(const GroundAtom& atom) const {
    std::size_t off = 0;
    for (const auto& a : atom.args) {
      auto it = index_.find(a);
      if (it == index_.end()) throw LogicError("constant '" + a + "' of " + to_string(atom) + " is not in the domain");
      off = off * static_cast<std::size_t>(n_) + static_cast<std::size_t>(it->second);
    }
    return off;
  }

  std::size_t offset(const Literal& lit, const std::array<int, 26>& binding) const {
    std::size_t off = 0;
    for (char v : lit.vars) off = off * static_cast<std::size_t>(n_) + static_cast<std::size_t>(binding[v - 'A']);
    return off;
  }

  // Joins the body against `snapshot` and writes head groundings into the
  // live tables. Returns true if anything new was derived.
  bool fire(const DefiniteClause& clause, const std::map<std::string, Table>& snapshot) {
    std::vector<char> order;
    auto add_var = [&order](char v) {
      if (std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);
    };
    for (const auto& lit : clause.body)
      for (char v : lit.vars) add_var(v);
    for (char v : clause.head.vars) add_var(v);

    // Literal i can be checked once the variable at depth check_at[i] is bound.
    std::vector<std::vector<const Literal*>> checks(order.size() + 1);
    std::vector<const Table*> body_tables;
    for (const auto& lit : clause.body) {
      std::size_t depth = 0;
      for (char v : lit.vars) {
        const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), v) - order.begin()) + 1;
        depth = std::max(depth, pos);
      }
      checks[depth].push_back(&lit);
    }

    auto& head = tables_.at(clause.head.predicate);
    std::array<int, 26> binding{};
    bool changed = false;

    auto holds = [&](const Literal* lit) {
      return snapshot.at(lit->predicate).truth[offset(*lit, binding)] != 0;
    };
    std::function<void(std::size_t)> bind = [&](std::size_t depth) {
      for (const auto* lit : checks[depth])
        if (!holds(lit)) return;
      if (depth == order.size()) {
        auto& cell = head.truth[offset(clause.head, binding)];
        if (!cell) {
          cell = 1;
          changed = true;
        }
        return;
      }
      for (int c = 0; c < n_; ++c) {
        binding[order[depth] - 'A'] = c;
        bind(depth + 1);
      }
    };
    bind(0);
    return changed;
  }

  std::size_t count() const {
    std::size_t total = 0;
    for (const auto& [name, table] : tables_)
      total += static_cast<std::size_t>(std::count(table.truth.begin(), table.truth.end(), 1));
    return total;
  }

  FactSet collect() const {
    FactSet out;
    for (const auto& [name, table] : tables_) {
      if (name == kFalse) continue;
      if (name == kTrue && !builtin_true_in_facts_) continue;
      for (std::size_t off = 0; off < table.truth.size(); ++off) {
        if (!table.truth[off]) continue;
        GroundAtom atom{name, {}};
        if (table.arity == 1) atom.args = {constants_[off]};
        if (table.arity == 2)
          atom.args = {constants_[off / static_cast<std::size_t>(n_)], constants_[off % static_cast<std::size_t>(n_)]};
        out.insert(std::move(atom));
      }
    }
    return out;
  }

  const SymbolicProgram& program_;
  const std::vector<std::string>& constants_;
  int n_;
  std::unordered_map<std::string, int> index_;
  std::map<std::string, Table> tables_;
  std::map<int, std::vector<const DefiniteClause*>> strata_;
  bool builtin_true_in_facts_ = false;
};

}  // namespace

ChainTrace forward_chain_trace(const SymbolicProgram& program, const FactSet& facts,
                               const std::vector<std::string>& constants, int max_steps,
                               const std::vector<PredicateSymbol>& known) {
  for (const auto& clause : program.clauses) {
    if (clause.head.vars.size() > 2) throw LogicError("head arity > 2: " + to_string(clause));
    for (const auto& lit : clause.body)
      if (lit.vars.size() > 2) throw LogicError("body arity > 2: " + to_string(clause));
  }
  Chainer chainer(program, facts, constants, known);
  return chainer.run(max_steps);
}

FactSet forward_chain(const SymbolicProgram& program, const FactSet& facts, const std::vector<std::string>& constants,
                      int max_steps, const std::vector<PredicateSymbol>& known) {
  return forward_chain_trace(program, facts, constants, max_steps, known).facts;
}

double mse(const std::map<GroundAtom, double>& predicted, const std::map<GroundAtom, int>& truth) {
  if (predicted.size() != truth.size()) throw LogicError("mse: predicted and truth cover different atom sets");
  if (truth.empty()) throw LogicError("mse: empty atom set");
  double total = 0.0;
  auto p = predicted.begin();
  for (const auto& [atom, value] : truth) {
    if (p->first != atom) throw LogicError("mse: atom " + to_string(atom) + " missing from predictions");
    const double d = p->second - static_cast<double>(value);
    total += d * d;
    ++p;
  }
  return total / static_cast<double>(truth.size());
}

std::vector<DefiniteClause> normalize_aux_clause(const Literal& head, const std::pair<Literal, Literal>& conj,
                                                 const std::optional<Literal>& disj, int stratum) {
  std::vector<DefiniteClause> out;
  const auto is = [](const Literal& l, std::string_view name) { return l.vars.empty() && l.predicate == name; };

  if (!is(conj.first, kFalse) && !is(conj.second, kFalse)) {
    DefiniteClause clause{head, {}, stratum};
    for (const auto* lit : {&conj.first, &conj.second})
      if (!is(*lit, kTrue)) clause.body.push_back(*lit);
    if (clause.body.empty()) clause.body.push_back(Literal{std::string(kTrue), {}});
    out.push_back(std::move(clause));
  }
  if (disj && !is(*disj, kFalse)) out.push_back(DefiniteClause{head, {*disj}, stratum});
  return out;
}

}  // namespace hri
