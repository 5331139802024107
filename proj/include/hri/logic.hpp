#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hri {

/// Raised for malformed rule text, unknown symbols and inconsistent arities.
class LogicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PredicateKind { input, auxiliary, target };

struct PredicateSymbol {
  std::string name;
  int arity = 0;
  PredicateKind kind = PredicateKind::input;

  friend bool operator==(const PredicateSymbol&, const PredicateSymbol&) = default;
};

inline constexpr std::string_view kTrue = "true";
inline constexpr std::string_view kFalse = "false";

PredicateSymbol true_symbol();
PredicateSymbol false_symbol();

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

/// A predicate applied to variables. Variables are single uppercase letters.
struct Literal {
  std::string predicate;
  std::vector<char> vars;

  friend bool operator==(const Literal&, const Literal&) = default;
};

/// head :- body. Clauses sharing a stratum fire synchronously within a pass;
/// strata are evaluated in ascending order, each one seeing the facts derived
/// by lower strata earlier in the same pass.
struct DefiniteClause {
  Literal head;
  std::vector<Literal> body;
  int stratum = 0;

  friend bool operator==(const DefiniteClause&, const DefiniteClause&) = default;
};

struct SymbolicProgram {
  std::vector<DefiniteClause> clauses;
  PredicateSymbol target;
};

using FactSet = std::set<GroundAtom>;

// ---------------------------------------------------------------------------
// Rule text format
//
//   clause:  head(X,Y) :- lit1(X,Z), lit2(Z,Y).
//   fact:    pred(c1,c2).
//
// Zero-ary predicates are written without parentheses (`true`).

std::string to_string(const GroundAtom& atom);
std::string to_string(const Literal& literal);
std::string to_string(const DefiniteClause& clause);
/// One clause per line, each terminated by '\n'.
std::string to_string(const SymbolicProgram& program);

/// Parses `pred(c1,c2)` with or without the trailing period.
GroundAtom parse_atom(std::string_view text);
DefiniteClause parse_clause(std::string_view text);
/// Parses newline separated clauses. Blank lines and `%` comments are skipped.
/// The target symbol is taken from `target_name`; its arity is read from the
/// first clause defining it.
SymbolicProgram parse_program(std::string_view text, std::string_view target_name = "target");

bool is_identifier(std::string_view text);

// ---------------------------------------------------------------------------
// Forward chaining

struct ChainTrace {
  FactSet facts;
  /// Number of passes that were executed (a pass with no new fact counts).
  int passes = 0;
  bool fixpoint = false;
  /// facts.size() after each pass, for monotonicity checks.
  std::vector<std::size_t> sizes;
};

/// Bottom-up evaluation. Body predicates must be defined by some clause head,
/// appear in `facts`, be listed in `known`, or be one of the builtins
/// true/false. Existential variables are enumerated over `constants`.
ChainTrace forward_chain_trace(const SymbolicProgram& program, const FactSet& facts,
                               const std::vector<std::string>& constants, int max_steps,
                               const std::vector<PredicateSymbol>& known = {});

FactSet forward_chain(const SymbolicProgram& program, const FactSet& facts,
                      const std::vector<std::string>& constants, int max_steps,
                      const std::vector<PredicateSymbol>& known = {});

/// Mean squared error between predicted degrees and 0/1 truth over the same
/// atom set. Throws LogicError if the key sets differ or are empty.
double mse(const std::map<GroundAtom, double>& predicted, const std::map<GroundAtom, int>& truth);

/// Splits `head <- (conj.first ∧ conj.second) ∨ disj` into definite clauses.
/// `true` is dropped from a conjunction that has another literal; a conjunct
/// containing `false` never fires and is removed; a `false` or absent
/// disjunct is removed. A `true` disjunct yields `head :- true.`
std::vector<DefiniteClause> normalize_aux_clause(const Literal& head,
                                                 const std::pair<Literal, Literal>& conj,
                                                 const std::optional<Literal>& disj,
                                                 int stratum = 0);

/// Optional builtin equality over the constant domain (not added to tasks by
/// default).
PredicateSymbol equal_symbol();
FactSet equality_facts(const std::vector<std::string>& constants);

}  // namespace hri
