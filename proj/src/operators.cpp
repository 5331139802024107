#include "hri/operators.hpp"

#include <stdexcept>

namespace hri {

std::string to_string(PoolOp op) { return op == PoolOp::sum ? "sum" : "max"; }
std::string to_string(AndOp op) { return op == AndOp::min ? "min" : "product"; }
std::string to_string(OrOp op) { return op == OrOp::max ? "max" : "prodminus"; }

std::string to_string(Similarity s) {
  switch (s) {
    case Similarity::cosine: return "cosine";
    case Similarity::l1: return "l1";
    case Similarity::l2: return "l2";
    case Similarity::scalar_product: return "scalar_product";
  }
  return "?";
}

PoolOp parse_pool(std::string_view text) {
  if (text == "sum") return PoolOp::sum;
  if (text == "max") return PoolOp::max;
  throw std::invalid_argument("unknown pool operator '" + std::string(text) + "'");
}

AndOp parse_and(std::string_view text) {
  if (text == "min") return AndOp::min;
  if (text == "product" || text == "prod") return AndOp::product;
  throw std::invalid_argument("unknown fuzzy and '" + std::string(text) + "'");
}

OrOp parse_or(std::string_view text) {
  if (text == "max") return OrOp::max;
  if (text == "prodminus" || text == "prod_minus") return OrOp::prodminus;
  throw std::invalid_argument("unknown fuzzy or '" + std::string(text) + "'");
}

Similarity parse_similarity(std::string_view text) {
  if (text == "cosine") return Similarity::cosine;
  if (text == "l1") return Similarity::l1;
  if (text == "l2") return Similarity::l2;
  if (text == "scalar_product" || text == "dot") return Similarity::scalar_product;
  throw std::invalid_argument("unknown similarity '" + std::string(text) + "'");
}

}  // namespace hri
