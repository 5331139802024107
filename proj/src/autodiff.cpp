#include "hri/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hri {

Tape::Id Tape::constant(std::vector<double> value) {
  nodes_.push_back({std::move(value), {}, false, {}});
  return nodes_.size() - 1;
}

Tape::Id Tape::variable(std::vector<double> value) {
  nodes_.push_back({std::move(value), {}, true, {}});
  return nodes_.size() - 1;
}

Tape::Id Tape::record(std::vector<double> value, std::span<const Id> parents, Backward backward) {
  bool needs = false;
  for (Id p : parents) needs = needs || nodes_[p].requires_grad;
  nodes_.push_back({std::move(value), {}, needs, needs ? std::move(backward) : Backward{}});
  return nodes_.size() - 1;
}

double* Tape::grad(Id id) {
  auto& node = nodes_[id];
  if (!node.requires_grad) return nullptr;
  if (node.grad.size() != node.value.size()) node.grad.assign(node.value.size(), 0.0);
  return node.grad.data();
}

std::span<const double> Tape::grad_view(Id id) const { return nodes_[id].grad; }

void Tape::backward(Id root) {
  if (nodes_[root].value.size() != 1) throw std::logic_error("backward() needs a scalar root");
  if (!nodes_[root].requires_grad) return;
  grad(root)[0] = 1.0;
  for (Id id = root + 1; id-- > 0;) {
    auto& node = nodes_[id];
    if (node.backward && !node.grad.empty()) node.backward(*this, id);
  }
}

namespace tie_monitor {
namespace {
thread_local bool g_active = false;
thread_local double g_threshold = 0.0;
thread_local double g_min_gap = std::numeric_limits<double>::infinity();
}  // namespace

void start(double threshold) {
  g_active = true;
  g_threshold = threshold;
  g_min_gap = std::numeric_limits<double>::infinity();
}

double stop() {
  g_active = false;
  return g_min_gap;
}

bool active() { return g_active; }

void observe(double a, double b) {
  // Scaled by the operands: a kink between 0 and 1e-9 moves nothing that a
  // finite difference at h = 1e-5 could see.
  const double gap = std::fabs(a - b);
  const double scale = std::max(std::fabs(a), std::fabs(b));
  if (gap > 0.0 && gap < g_threshold * std::min(1.0, scale) && gap < g_min_gap) g_min_gap = gap;
}

}  // namespace tie_monitor

}  // namespace hri
