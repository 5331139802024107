#include "hri/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace hri {

Valuation Valuation::zeros(int arity, int n) {
  std::size_t size = arity == 0 ? 1 : (arity == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n);
  return {arity, n, std::vector<double>(size, 0.0)};
}

Valuation project(const Valuation& v, int n) {
  if (v.arity == 2) return v;
  Valuation out = Valuation::zeros(2, n);
  for (int x = 0; x < n; ++x)
    for (int z = 0; z < n; ++z) out.data[static_cast<std::size_t>(x) * n + z] = v.arity == 0 ? v.data[0] : v.data[x];
  return out;
}

namespace {

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// d sim(a, b) / da and / db, scaled by `scale` and added to ga, gb.
void similarity_grad(Similarity kind, std::span<const double> a, std::span<const double> b, double scale, double* ga,
                     double* gb) {
  const std::size_t d = a.size();
  switch (kind) {
    case Similarity::cosine: {
      const double na = norm(a), nb = norm(b);
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += a[i] * b[i];
      const double s = dot / (na * nb);
      for (std::size_t i = 0; i < d; ++i) {
        if (ga) ga[i] += scale * (b[i] / (na * nb) - s * a[i] / (na * na));
        if (gb) gb[i] += scale * (a[i] / (na * nb) - s * b[i] / (nb * nb));
      }
      break;
    }
    case Similarity::scalar_product:
      for (std::size_t i = 0; i < d; ++i) {
        if (ga) ga[i] += scale * b[i];
        if (gb) gb[i] += scale * a[i];
      }
      break;
    case Similarity::l2: {
      double dist = 0.0;
      for (std::size_t i = 0; i < d; ++i) dist += (a[i] - b[i]) * (a[i] - b[i]);
      dist = std::sqrt(dist);
      if (dist == 0.0) break;
      for (std::size_t i = 0; i < d; ++i) {
        const double g = -(a[i] - b[i]) / dist;
        if (ga) ga[i] += scale * g;
        if (gb) gb[i] -= scale * g;
      }
      break;
    }
    case Similarity::l1:
      for (std::size_t i = 0; i < d; ++i) {
        const double diff = a[i] - b[i];
        const double g = diff > 0 ? -1.0 : (diff < 0 ? 1.0 : 0.0);
        if (ga) ga[i] += scale * g;
        if (gb) gb[i] -= scale * g;
      }
      break;
  }
}

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    s += v;
  }
  for (double& v : z) v /= s;
}

thread_local std::uint64_t g_ops = 0;

}  // namespace

double similarity(Similarity kind, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("embedding size mismatch");
  switch (kind) {
    case Similarity::cosine: {
      const double na = norm(a), nb = norm(b);
      if (na == 0.0 || nb == 0.0) throw std::domain_error("cosine similarity of a zero-norm embedding");
      double dot = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
      return dot / (na * nb);
    }
    case Similarity::scalar_product: {
      double dot = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
      return dot;
    }
    case Similarity::l2: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      return -std::sqrt(s);
    }
    case Similarity::l1: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
      return -s;
    }
  }
  return 0.0;
}

std::vector<double> unification_scores(std::span<const double> slot, const std::vector<std::span<const double>>& candidates,
                                       double temperature, Similarity kind, double gumbel_scale, Rng* rng) {
  if (candidates.empty()) throw std::invalid_argument("empty candidate set");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  std::vector<double> z;
  z.reserve(candidates.size());
  for (const auto& c : candidates) {
    double s = similarity(kind, c, slot);
    if (gumbel_scale > 0.0) {
      if (!rng) throw std::invalid_argument("gumbel noise needs an rng");
      s += gumbel_scale * rng->gumbel();
    }
    z.push_back(s / temperature);
  }
  softmax_inplace(z);
  return z;
}

Instance make_instance(const Model& model, const IlpTask& task) {
  Instance inst;
  inst.n = static_cast<int>(task.constants.size());
  inst.constants = task.constants;
  const int n = inst.n;
  if (task.target.arity != model.target.arity)
    throw std::invalid_argument("task target arity " + std::to_string(task.target.arity) + " differs from model's " +
                                std::to_string(model.target.arity));
  std::map<std::string, int> index;
  for (int i = 0; i < n; ++i) index[task.constants[static_cast<std::size_t>(i)]] = i;
  std::map<std::string, int> input_of;
  for (int p = 0; p < model.num_inputs; ++p) {
    const auto& sym = model.predicates[static_cast<std::size_t>(p)];
    const bool present = std::any_of(task.input_predicates.begin(), task.input_predicates.end(),
                                     [&](const auto& q) { return q.name == sym.name && q.arity == sym.arity; });
    if (!present) throw std::invalid_argument("task lacks model input predicate '" + sym.name + "'");
    input_of[sym.name] = p;
    auto v = Valuation::zeros(sym.arity, n);
    if (sym.name == kTrue) v.data[0] = 1.0;
    inst.inputs.push_back(std::move(v));
  }
  for (const auto& atom : task.background) {
    auto it = input_of.find(atom.predicate);
    if (it == input_of.end()) continue;
    auto& v = inst.inputs[static_cast<std::size_t>(it->second)];
    std::size_t off = 0;
    for (const auto& a : atom.args) off = off * static_cast<std::size_t>(n) + static_cast<std::size_t>(index.at(a));
    v.data[off] = 1.0;
  }
  inst.target_arity = task.target.arity;
  const std::size_t size = task.target.arity == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  inst.labels.assign(size, 0.0);
  inst.labelled.assign(size, 0);
  auto mark = [&](const FactSet& atoms, double value) {
    for (const auto& atom : atoms) {
      std::size_t off = 0;
      for (const auto& a : atom.args) off = off * static_cast<std::size_t>(n) + static_cast<std::size_t>(index.at(a));
      inst.labels[off] = value;
      inst.labelled[off] = 1;
    }
  };
  mark(task.positives, 1.0);
  mark(task.negatives, 0.0);
  return inst;
}

const std::vector<int>& slot_candidates(const Model& model, int slot) {
  if (slot == model.target_slot) return model.target_candidates;
  for (const auto& aux : model.aux)
    for (int s : aux.slots)
      if (s == slot) return aux.candidates;
  throw std::out_of_range("no slot " + std::to_string(slot));
}

// ---------------------------------------------------------------------------

namespace {

enum class Shape { A, B, C };

class Builder {
 public:
  Builder(const Model& m, std::span<const double> weights, const Instance& inst, const NoiseConfig& noise, bool grad,
          InferenceGraph& g)
      : m_(m), inst_(inst), n_(inst.n), ops_(m.config.ops), grad_(grad), g_(g), tape_(g.tape) {
    std::vector<double> w(weights.begin(), weights.end());
    g_.weights = grad ? tape_.variable(std::move(w)) : tape_.constant(std::move(w));
    mark_zero(g_.weights);
    for (int s = 0; s < m.num_slots; ++s) g_.alpha.push_back(make_alpha(s, noise));
  }

  void run(int steps, bool keep_trace) {
    const int np = static_cast<int>(m_.predicates.size());
    own_.assign(static_cast<std::size_t>(np), 0);
    proj_.assign(static_cast<std::size_t>(np), 0);
    for (int p = 0; p < np; ++p) {
      const int arity = m_.predicates[static_cast<std::size_t>(p)].arity;
      auto v = p < m_.num_inputs ? inst_.inputs[static_cast<std::size_t>(p)] : Valuation::zeros(arity, n_);
      own_[static_cast<std::size_t>(p)] = tape_.constant(v.data);
      proj_[static_cast<std::size_t>(p)] = arity == 2 ? own_[static_cast<std::size_t>(p)] : tape_.constant(project(v, n_).data);
      mark_zero(own_[static_cast<std::size_t>(p)]);
      mark_zero(proj_[static_cast<std::size_t>(p)]);
    }
    Tape::Id target = tape_.constant(Valuation::zeros(m_.target.arity, n_).data);
    mark_zero(target);

    for (int step = 0; step < steps; ++step) {
      for (int layer = 1; layer <= m_.config.max_depth; ++layer) {
        std::vector<std::pair<int, Tape::Id>> updates;
        for (const auto& aux : m_.aux)
          if (aux.layer == layer) updates.emplace_back(aux.predicate, aux_step(aux));
        for (auto [p, id] : updates) {
          own_[static_cast<std::size_t>(p)] = id;
          proj_[static_cast<std::size_t>(p)] =
              m_.predicates[static_cast<std::size_t>(p)].arity == 2 ? id : project_node(id);
        }
      }
      target = target_step(target);
      if (keep_trace) {
        std::vector<Valuation> snap;
        for (int p = 0; p < np; ++p)
          snap.push_back({m_.predicates[static_cast<std::size_t>(p)].arity, n_, tape_.value(own_[static_cast<std::size_t>(p)])});
        snap.push_back({m_.target.arity, n_, tape_.value(target)});
        g_.trace.push_back(std::move(snap));
      }
    }
    g_.current = own_;
    g_.target = target;
  }

 private:
  const Model& m_;
  const Instance& inst_;
  int n_;
  OperatorConfig ops_;
  bool grad_;
  InferenceGraph& g_;
  Tape& tape_;
  std::vector<Tape::Id> own_, proj_;
  std::vector<char> zero_;
  std::map<std::tuple<int, Tape::Id, Tape::Id>, Tape::Id> compose_cache_;

  std::size_t nn() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

  void mark_zero(Tape::Id id) {
    if (zero_.size() <= id) zero_.resize(id + 1, 0);
    const auto& v = tape_.value(id);
    zero_[id] = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  }
  bool is_zero(Tape::Id id) const { return zero_[id] != 0; }

  Tape::Id make_alpha(int slot, const NoiseConfig& noise) {
    const auto& cands = slot_candidates(m_, slot);
    const int d = m_.dim;
    const auto& w = tape_.value(g_.weights);
    const std::size_t slot_off = m_.rule_offset() + static_cast<std::size_t>(slot) * d;
    std::span<const double> se(w.data() + slot_off, static_cast<std::size_t>(d));
    std::vector<std::span<const double>> ce;
    for (int c : cands) ce.emplace_back(w.data() + static_cast<std::size_t>(c) * d, static_cast<std::size_t>(d));
    auto alpha = unification_scores(se, ce, m_.config.temperature, ops_.similarity, noise.gumbel_scale, noise.rng);
    const double tau = m_.config.temperature;
    const Similarity kind = ops_.similarity;
    const Tape::Id wid = g_.weights;
    Tape::Id id = tape_.record(alpha, {wid}, [cands, slot_off, d, tau, kind, wid](Tape& t, Tape::Id self) {
      const auto& a = t.value(self);
      const double* ga = t.grad(self);
      double dot = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * ga[i];
      const auto& w = t.value(wid);
      double* gw = t.grad(wid);
      std::span<const double> se(w.data() + slot_off, static_cast<std::size_t>(d));
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double dz = a[i] * (ga[i] - dot) / tau;
        if (dz == 0.0) continue;
        const std::size_t coff = static_cast<std::size_t>(cands[i]) * d;
        similarity_grad(kind, std::span<const double>(w.data() + coff, static_cast<std::size_t>(d)), se, dz,
                        gw + coff, gw + slot_off);
      }
    });
    return id;
  }

  Tape::Id project_node(Tape::Id unary) {
    const auto& v = tape_.value(unary);
    const int n = n_;
    std::vector<double> out(nn());
    for (int x = 0; x < n; ++x)
      for (int z = 0; z < n; ++z) out[static_cast<std::size_t>(x) * n + z] = v[static_cast<std::size_t>(x)];
    Tape::Id id = tape_.record(std::move(out), {unary}, [unary, n](Tape& t, Tape::Id self) {
      const double* g = t.grad(self);
      double* gu = t.grad(unary);
      for (int x = 0; x < n; ++x)
        for (int z = 0; z < n; ++z) gu[x] += g[static_cast<std::size_t>(x) * n + z];
    });
    zero_.resize(id + 1, 0);
    zero_[id] = zero_[unary];
    return id;
  }

  // Conjunction term of two projected matrices; cached per (shape, a, b).
  Tape::Id compose(Shape shape, Tape::Id a, Tape::Id b) {
    const auto key = std::make_tuple(static_cast<int>(shape), a, b);
    if (auto it = compose_cache_.find(key); it != compose_cache_.end()) return it->second;
    const int n = n_;
    const auto& M1 = tape_.value(a);
    const auto& M2 = tape_.value(b);
    const std::size_t out_size = shape == Shape::A ? static_cast<std::size_t>(n) : nn();
    std::vector<double> val(out_size, 0.0);
    std::vector<int> i1(out_size, -1), i2(out_size, -1);
    const bool minop = ops_.and_op == AndOp::min;
    const bool watch = tie_monitor::active();
    auto consider = [&](std::size_t e, int ia, int ib) {
      const double x = M1[static_cast<std::size_t>(ia)], y = M2[static_cast<std::size_t>(ib)];
      const double t = minop ? (x < y ? x : y) : x * y;
      if (watch) {
        if (minop) tie_monitor::observe(x, y);
        if (i1[e] >= 0) tie_monitor::observe(t, val[e]);
      }
      if (t > val[e]) {
        val[e] = t;
        i1[e] = ia;
        i2[e] = ib;
      }
    };
    switch (shape) {
      case Shape::B:
        for (int x = 0; x < n; ++x)
          for (int z = 0; z < n; ++z) {
            const int ia = x * n + z;
            if (M1[static_cast<std::size_t>(ia)] == 0.0) continue;
            for (int y = 0; y < n; ++y) consider(static_cast<std::size_t>(x) * n + y, ia, z * n + y);
          }
        break;
      case Shape::C:
        for (int x = 0; x < n; ++x)
          for (int y = 0; y < n; ++y) consider(static_cast<std::size_t>(x) * n + y, x * n + y, y * n + x);
        break;
      case Shape::A:
        for (int x = 0; x < n; ++x)
          for (int y = 0; y < n; ++y) consider(static_cast<std::size_t>(x), x * n + y, y * n + x);
        break;
    }
    const bool need = tape_.requires_grad(a) || tape_.requires_grad(b);
    Tape::Id id;
    if (need) {
      id = tape_.record(std::move(val), {a, b}, [a, b, minop, i1 = std::move(i1), i2 = std::move(i2)](Tape& t, Tape::Id self) {
        const double* g = t.grad(self);
        const auto& M1 = t.value(a);
        const auto& M2 = t.value(b);
        double* g1 = t.grad(a);
        double* g2 = t.grad(b);
        for (std::size_t e = 0; e < i1.size(); ++e) {
          if (i1[e] < 0 || g[e] == 0.0) continue;
          const double x = M1[static_cast<std::size_t>(i1[e])], y = M2[static_cast<std::size_t>(i2[e])];
          if (minop) {
            if (x <= y) {
              if (g1) g1[i1[e]] += g[e];
            } else if (g2) {
              g2[i2[e]] += g[e];
            }
          } else {
            if (g1) g1[i1[e]] += g[e] * y;
            if (g2) g2[i2[e]] += g[e] * x;
          }
        }
      });
    } else {
      id = tape_.constant(std::move(val));
    }
    mark_zero(id);
    compose_cache_.emplace(key, id);
    return id;
  }

  // Source of a pooled (disjunct / inverse / target) term.
  enum class Map { identity, rowmax, transpose };

  struct Pooled {
    Tape::Id alpha;
    std::vector<int> index;     // position in the slot's candidate list
    std::vector<Tape::Id> src;  // node per kept candidate
    Map map;
  };

  // Reads entry e of map(src).
  static double mapped(Map map, const std::vector<double>& v, int n, std::size_t e, int* arg = nullptr) {
    switch (map) {
      case Map::identity: return v[e];
      case Map::transpose: {
        const std::size_t x = e / static_cast<std::size_t>(n), y = e % static_cast<std::size_t>(n);
        return v[y * static_cast<std::size_t>(n) + x];
      }
      case Map::rowmax: {
        double best = v[e * static_cast<std::size_t>(n)];
        int bi = 0;
        for (int z = 1; z < n; ++z) {
          const double c = v[e * static_cast<std::size_t>(n) + static_cast<std::size_t>(z)];
          if (tie_monitor::active()) tie_monitor::observe(c, best);
          if (c > best) {
            best = c;
            bi = z;
          }
        }
        if (arg) *arg = bi;
        return best;
      }
    }
    return 0.0;
  }
  static std::size_t mapped_index(Map map, int n, std::size_t e, int arg) {
    switch (map) {
      case Map::identity: return e;
      case Map::transpose: return (e % static_cast<std::size_t>(n)) * static_cast<std::size_t>(n) + e / static_cast<std::size_t>(n);
      case Map::rowmax: return e * static_cast<std::size_t>(n) + static_cast<std::size_t>(arg);
    }
    return e;
  }

  Pooled pooled_from(int slot, const std::vector<Tape::Id>& nodes_by_candidate, Map map) {
    Pooled p{g_.alpha[static_cast<std::size_t>(slot)], {}, {}, map};
    const auto& alpha = tape_.value(p.alpha);
    for (std::size_t k = 0; k < nodes_by_candidate.size(); ++k) {
      if (alpha[k] == 0.0 || is_zero(nodes_by_candidate[k])) continue;
      p.index.push_back(static_cast<int>(k));
      p.src.push_back(nodes_by_candidate[k]);
    }
    return p;
  }

  struct PoolState {
    std::vector<double> value;
    std::vector<int> arg;  // argmax term under max pooling
  };

  PoolState pool_forward(const Pooled& p, std::size_t size) const {
    PoolState st{std::vector<double>(size, 0.0), std::vector<int>(ops_.pool == PoolOp::max ? size : 0, -1)};
    const auto& alpha = tape_.value(p.alpha);
    for (std::size_t k = 0; k < p.src.size(); ++k) {
      const double w = alpha[static_cast<std::size_t>(p.index[k])];
      const auto& v = tape_.value(p.src[k]);
      for (std::size_t e = 0; e < size; ++e) {
        const double t = w * mapped(p.map, v, n_, e);
        if (ops_.pool == PoolOp::sum) {
          st.value[e] += t;
        } else {
          if (tie_monitor::active() && st.arg[e] >= 0) tie_monitor::observe(t, st.value[e]);
          if (t > st.value[e]) {
            st.value[e] = t;
            st.arg[e] = static_cast<int>(k);
          }
        }
      }
    }
    return st;
  }

  static void pool_backward(Tape& t, const Pooled& p, PoolOp pool, int n, const std::vector<int>& arg,
                            const std::vector<double>& g) {
    const auto& alpha = t.value(p.alpha);
    double* galpha = t.grad(p.alpha);
    for (std::size_t k = 0; k < p.src.size(); ++k) {
      const auto& v = t.value(p.src[k]);
      double* gs = t.grad(p.src[k]);
      const double w = alpha[static_cast<std::size_t>(p.index[k])];
      double acc = 0.0;
      for (std::size_t e = 0; e < g.size(); ++e) {
        if (g[e] == 0.0) continue;
        if (pool == PoolOp::max && arg[e] != static_cast<int>(k)) continue;
        int am = 0;
        const double val = mapped(p.map, v, n, e, &am);
        acc += g[e] * val;
        if (gs) gs[mapped_index(p.map, n, e, am)] += g[e] * w;
      }
      if (galpha) galpha[p.index[k]] += acc;
    }
  }

  struct Conj {
    Tape::Id a1 = 0, a2 = 0;
    std::vector<std::pair<int, int>> pairs;
    std::vector<Tape::Id> terms;
  };

  Tape::Id aux_step(const AuxPredicate& aux) {
    const auto rid = aux.rule.id;
    const std::size_t size = rid == ProtoRuleId::A ? static_cast<std::size_t>(n_) : nn();
    std::vector<Tape::Id> cand_proj;
    for (int c : aux.candidates) cand_proj.push_back(proj_[static_cast<std::size_t>(c)]);
    const Tape::Id vold = own_[static_cast<std::size_t>(aux.predicate)];
    const std::size_t k = aux.candidates.size();

    bool has_conj = rid != ProtoRuleId::I;
    bool has_pool = rid == ProtoRuleId::I || aux.rule.disjunct;
    Conj conj;
    std::vector<double> vand(size, 0.0);
    std::vector<int> vand_arg;
    if (has_conj) {
      const Shape shape = rid == ProtoRuleId::A ? Shape::A : (rid == ProtoRuleId::B ? Shape::B : Shape::C);
      conj.a1 = g_.alpha[static_cast<std::size_t>(aux.slots[0])];
      conj.a2 = g_.alpha[static_cast<std::size_t>(aux.slots[1])];
      const auto& al1 = tape_.value(conj.a1);
      const auto& al2 = tape_.value(conj.a2);
      const std::uint64_t per_pair =
          shape == Shape::B ? static_cast<std::uint64_t>(n_) * nn() : static_cast<std::uint64_t>(nn());
      g_ops += per_pair * k * k;
      if (ops_.pool == PoolOp::max) vand_arg.assign(size, -1);
      for (std::size_t i = 0; i < k; ++i) {
        if (al1[i] == 0.0 || is_zero(cand_proj[i])) continue;
        for (std::size_t j = 0; j < k; ++j) {
          const double w = al1[i] * al2[j];
          if (w == 0.0 || is_zero(cand_proj[j])) continue;
          const Tape::Id term = compose(shape, cand_proj[i], cand_proj[j]);
          if (is_zero(term)) continue;
          const auto& tv = tape_.value(term);
          const int idx = static_cast<int>(conj.pairs.size());
          conj.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
          conj.terms.push_back(term);
          if (ops_.pool == PoolOp::sum) {
            for (std::size_t e = 0; e < size; ++e) vand[e] += w * tv[e];
          } else {
            for (std::size_t e = 0; e < size; ++e) {
              const double t = w * tv[e];
              if (tie_monitor::active() && vand_arg[e] >= 0) tie_monitor::observe(t, vand[e]);
              if (t > vand[e]) {
                vand[e] = t;
                vand_arg[e] = idx;
              }
            }
          }
        }
      }
    }
    Pooled pooled;
    PoolState pst;
    if (has_pool) {
      const int slot = rid == ProtoRuleId::I ? aux.slots[0] : aux.slots[2];
      const Map map = rid == ProtoRuleId::I ? Map::transpose : (rid == ProtoRuleId::A ? Map::rowmax : Map::identity);
      pooled = pooled_from(slot, cand_proj, map);
      pst = pool_forward(pooled, size);
    }
    std::vector<double> vor(size);
    const bool or_max = ops_.or_op == OrOp::max;
    for (std::size_t e = 0; e < size; ++e) {
      if (has_conj && has_pool) {
        if (tie_monitor::active() && or_max) tie_monitor::observe(vand[e], pst.value[e]);
        vor[e] = fuzzy_or(ops_.or_op, vand[e], pst.value[e]);
      } else {
        vor[e] = has_conj ? vand[e] : pst.value[e];
      }
    }
    const auto& old = tape_.value(vold);
    std::vector<double> out(size);
    for (std::size_t e = 0; e < size; ++e) {
      if (tie_monitor::active()) tie_monitor::observe(old[e], vor[e]);
      out[e] = std::min(1.0, std::max(old[e], vor[e]));
    }

    std::vector<Tape::Id> parents;
    parents.push_back(vold);
    if (has_conj) {
      parents.push_back(conj.a1);
      parents.push_back(conj.a2);
      parents.insert(parents.end(), conj.terms.begin(), conj.terms.end());
    }
    if (has_pool) {
      parents.push_back(pooled.alpha);
      parents.insert(parents.end(), pooled.src.begin(), pooled.src.end());
    }
    const PoolOp pool = ops_.pool;
    const OrOp or_op = ops_.or_op;
    const int n = n_;
    Tape::Id id = tape_.record(
        std::move(out), std::span<const Tape::Id>(parents),
        [=, conj = std::move(conj), pooled = std::move(pooled), vand = std::move(vand), vand_arg = std::move(vand_arg),
         pool_arg = std::move(pst.arg), pool_val = std::move(pst.value), vor = std::move(vor)](Tape& t, Tape::Id self) {
          const double* g = t.grad(self);
          const auto& old = t.value(vold);
          std::vector<double> gor(size, 0.0);
          if (double* go = t.grad(vold)) {
            for (std::size_t e = 0; e < size; ++e)
              if (old[e] >= vor[e]) go[e] += g[e];
          }
          for (std::size_t e = 0; e < size; ++e)
            if (old[e] < vor[e]) gor[e] = g[e];
          std::vector<double> gand, gpool;
          if (has_conj && has_pool) {
            gand.assign(size, 0.0);
            gpool.assign(size, 0.0);
            for (std::size_t e = 0; e < size; ++e) {
              if (or_op == OrOp::max) {
                if (vand[e] >= pool_val[e]) gand[e] = gor[e];
                else gpool[e] = gor[e];
              } else {
                gand[e] = gor[e] * (1.0 - pool_val[e]);
                gpool[e] = gor[e] * (1.0 - vand[e]);
              }
            }
          } else if (has_conj) {
            gand = std::move(gor);
          } else {
            gpool = std::move(gor);
          }
          if (has_conj) {
            const auto& al1 = t.value(conj.a1);
            const auto& al2 = t.value(conj.a2);
            double* g1 = t.grad(conj.a1);
            double* g2 = t.grad(conj.a2);
            for (std::size_t q = 0; q < conj.pairs.size(); ++q) {
              const auto [i, j] = conj.pairs[q];
              const auto& tv = t.value(conj.terms[q]);
              double* gt = t.grad(conj.terms[q]);
              const double w = al1[static_cast<std::size_t>(i)] * al2[static_cast<std::size_t>(j)];
              double acc = 0.0;
              for (std::size_t e = 0; e < size; ++e) {
                if (gand[e] == 0.0) continue;
                if (pool == PoolOp::max && vand_arg[e] != static_cast<int>(q)) continue;
                acc += gand[e] * tv[e];
                if (gt) gt[e] += gand[e] * w;
              }
              if (g1) g1[i] += acc * al2[static_cast<std::size_t>(j)];
              if (g2) g2[j] += acc * al1[static_cast<std::size_t>(i)];
            }
          }
          if (has_pool) pool_backward(t, pooled, pool, n, pool_arg, gpool);
        });
    mark_zero(id);
    return id;
  }

  Tape::Id target_step(Tape::Id vold) {
    const std::size_t size = m_.target.arity == 1 ? static_cast<std::size_t>(n_) : nn();
    std::vector<Tape::Id> src;
    for (int c : m_.target_candidates) src.push_back(own_[static_cast<std::size_t>(c)]);
    Pooled pooled = pooled_from(m_.target_slot, src, Map::identity);
    PoolState pst = pool_forward(pooled, size);
    const auto& old = tape_.value(vold);
    std::vector<double> out(size);
    for (std::size_t e = 0; e < size; ++e) {
      if (tie_monitor::active()) tie_monitor::observe(old[e], pst.value[e]);
      out[e] = std::min(1.0, std::max(old[e], pst.value[e]));
    }
    std::vector<Tape::Id> parents{vold, pooled.alpha};
    parents.insert(parents.end(), pooled.src.begin(), pooled.src.end());
    const PoolOp pool = ops_.pool;
    const int n = n_;
    Tape::Id id = tape_.record(std::move(out), std::span<const Tape::Id>(parents),
                               [=, pooled = std::move(pooled), pv = std::move(pst.value), pa = std::move(pst.arg)](
                                   Tape& t, Tape::Id self) {
                                 const double* g = t.grad(self);
                                 const auto& old = t.value(vold);
                                 std::vector<double> gp(size, 0.0);
                                 double* go = t.grad(vold);
                                 for (std::size_t e = 0; e < size; ++e) {
                                   if (old[e] >= pv[e]) {
                                     if (go) go[e] += g[e];
                                   } else {
                                     gp[e] = g[e];
                                   }
                                 }
                                 pool_backward(t, pooled, pool, n, pa, gp);
                               });
    mark_zero(id);
    return id;
  }
};

}  // namespace

InferenceGraph build_inference_graph(const Model& model, std::span<const double> weights, const Instance& inst,
                                     int steps, const NoiseConfig& noise, bool requires_grad, bool keep_trace) {
  if (steps < 1) throw std::invalid_argument("inference needs at least one step");
  if (weights.size() != model.weights.size()) throw std::invalid_argument("weight buffer size mismatch");
  if (static_cast<int>(inst.inputs.size()) != model.num_inputs) throw std::invalid_argument("instance/model mismatch");
  InferenceGraph g;
  Builder b(model, weights, inst, noise, requires_grad, g);
  b.run(steps, keep_trace);
  return g;
}

InferenceResult run_inference(const Model& model, const Instance& inst, int steps, const NoiseConfig& noise,
                              bool keep_trace) {
  auto g = build_inference_graph(model, model.weights, inst, steps, noise, false, keep_trace);
  InferenceResult r;
  for (std::size_t p = 0; p < model.predicates.size(); ++p)
    r.valuations.push_back({model.predicates[p].arity, inst.n, g.tape.value(g.current[p])});
  r.target = {model.target.arity, inst.n, g.tape.value(g.target)};
  for (auto id : g.alpha) r.scores.push_back(g.tape.value(id));
  r.trace = std::move(g.trace);
  return r;
}

std::vector<std::vector<double>> slot_scores(const Model& model) {
  std::vector<std::vector<double>> out;
  for (int s = 0; s < model.num_slots; ++s) {
    const auto& cands = slot_candidates(model, s);
    std::vector<std::span<const double>> ce;
    for (int c : cands) ce.push_back(model.predicate_embedding(c));
    out.push_back(unification_scores(model.slot_embedding(s), ce, model.config.temperature, model.config.ops.similarity));
  }
  return out;
}

std::map<GroundAtom, double> target_predictions(const Valuation& target, const std::vector<std::string>& constants,
                                                const std::string& target_name) {
  std::map<GroundAtom, double> out;
  const int n = static_cast<int>(constants.size());
  if (target.arity == 1) {
    for (int x = 0; x < n; ++x) out[{target_name, {constants[static_cast<std::size_t>(x)]}}] = target.at(x);
  } else {
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        out[{target_name, {constants[static_cast<std::size_t>(x)], constants[static_cast<std::size_t>(y)]}}] =
            target.at(x, y);
  }
  return out;
}

std::map<GroundAtom, int> target_truth(const IlpTask& task) {
  std::map<GroundAtom, int> out;
  for (const auto& a : task.positives) out[a] = 1;
  for (const auto& a : task.negatives) out[a] = 0;
  return out;
}

double soft_mse(const Valuation& target, const Instance& inst) {
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t e = 0; e < inst.labels.size(); ++e) {
    if (!inst.labelled[e]) continue;
    const double d = target.data[e] - inst.labels[e];
    s += d * d;
    ++count;
  }
  return count ? s / static_cast<double>(count) : 0.0;
}

std::string dump_valuation(const Valuation& v, const std::string& name, const std::vector<std::string>& constants) {
  std::ostringstream out;
  out.precision(17);
  const int n = static_cast<int>(constants.size());
  if (v.arity == 0) {
    out << name << " = " << v.data[0] << "\n";
  } else if (v.arity == 1) {
    for (int x = 0; x < n; ++x) out << name << "(" << constants[static_cast<std::size_t>(x)] << ") = " << v.at(x) << "\n";
  } else {
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        out << name << "(" << constants[static_cast<std::size_t>(x)] << "," << constants[static_cast<std::size_t>(y)]
            << ") = " << v.at(x, y) << "\n";
  }
  return out.str();
}

namespace op_counter {
void reset() { g_ops = 0; }
std::uint64_t get() { return g_ops; }
}  // namespace op_counter

}  // namespace hri
