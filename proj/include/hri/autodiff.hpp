#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace hri {

/// Minimal reverse-mode tape over flat double buffers. Nodes are appended in
/// evaluation order, so replaying them backwards is a valid topological
/// order. Each op owns the meaning of its buffer shape.
class Tape {
 public:
  using Id = std::size_t;
  using Backward = std::function<void(Tape&, Id)>;

  Id constant(std::vector<double> value);
  Id variable(std::vector<double> value);
  /// Records an op result. `backward` is dropped when no parent needs a
  /// gradient.
  Id record(std::vector<double> value, std::span<const Id> parents, Backward backward);
  Id record(std::vector<double> value, std::initializer_list<Id> parents, Backward backward) {
    return record(std::move(value), std::span<const Id>(parents.begin(), parents.size()), std::move(backward));
  }

  const std::vector<double>& value(Id id) const { return nodes_[id].value; }
  bool requires_grad(Id id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of `id`, allocated on first use; nullptr when the node
  /// does not require a gradient.
  double* grad(Id id);
  std::span<const double> grad_view(Id id) const;

  /// Seeds d(root)/d(root) = 1 for a scalar root and propagates.
  void backward(Id root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::deque<Node> nodes_;  // stable references across appends
};

/// Records nearly-tied comparisons inside min/max kernels while active. A
/// gap counts when it is below threshold * min(1, max(|a|, |b|)).
/// Finite-difference checks resample points that sit on a kink.
namespace tie_monitor {
void start(double threshold);
double stop();  // smallest observed gap in (0, threshold), or +inf
void observe(double a, double b);
bool active();
}  // namespace tie_monitor

}  // namespace hri
