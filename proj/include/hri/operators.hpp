#pragma once

#include <string>
#include <string_view>

namespace hri {

enum class PoolOp { sum, max };
enum class AndOp { min, product };
/// prodminus(a, b) = a + b - a*b.
enum class OrOp { max, prodminus };
/// L1 and L2 enter the softmax as negated distances, scalar_product raw.
enum class Similarity { cosine, l1, l2, scalar_product };

/// Fuzzy operators of one inference step. MERGE is always max.
struct OperatorConfig {
  PoolOp pool = PoolOp::sum;
  AndOp and_op = AndOp::min;
  OrOp or_op = OrOp::max;
  Similarity similarity = Similarity::cosine;

  friend bool operator==(const OperatorConfig&, const OperatorConfig&) = default;
};

std::string to_string(PoolOp op);
std::string to_string(AndOp op);
std::string to_string(OrOp op);
std::string to_string(Similarity s);

PoolOp parse_pool(std::string_view text);
AndOp parse_and(std::string_view text);
OrOp parse_or(std::string_view text);
Similarity parse_similarity(std::string_view text);

inline double fuzzy_and(AndOp op, double a, double b) { return op == AndOp::min ? (a < b ? a : b) : a * b; }
inline double fuzzy_or(OrOp op, double a, double b) { return op == OrOp::max ? (a < b ? b : a) : a + b - a * b; }

}  // namespace hri
