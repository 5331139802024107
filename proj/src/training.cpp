#include "hri/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

namespace hri {

namespace {
constexpr double kEps = 1e-7;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& v) {
  std::size_t pos = 0;
  const int out = std::stoi(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("not an integer");
  return out;
}

double to_double(const std::string& v) {
  std::size_t pos = 0;
  const double out = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("not a number");
  return out;
}
}  // namespace

void validate(const TrainConfig& c) {
  if (c.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(c.lr > 0) || !(c.lr_rules > 0)) throw std::invalid_argument("lr and lr-rules must be > 0");
  if (c.lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  if (c.gumbel_g0 < 0) throw std::invalid_argument("gumbel-noise must be >= 0");
  if (c.gauss_sigma0 < 0) throw std::invalid_argument("gauss-noise must be >= 0");
  if (c.gauss_decay >= 1.0) throw std::invalid_argument("gauss-noise-decay must be < 1");
}

RunConfig default_config(const std::string& task) {
  RunConfig c;
  const auto d = task_defaults(task);
  c.model.max_depth = d.max_depth;
  c.train.train_steps = d.train_steps;
  c.train.eval_steps = d.eval_steps;
  c.train.train_num_constants = d.train_num_constants;
  c.train.eval_num_constants = d.eval_num_constants;
  return c;
}

RunConfig parse_config(const std::string& text, RunConfig c) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    try {
      if (key == "recursivity") c.model.recursivity = parse_recursivity(v);
      else if (key == "fuzzy-and") c.model.ops.and_op = parse_and(v);
      else if (key == "fuzzy-or") c.model.ops.or_op = parse_or(v);
      else if (key == "pool") c.model.ops.pool = parse_pool(v);
      else if (key == "similarity") c.model.ops.similarity = parse_similarity(v);
      else if (key == "temperature") c.model.temperature = to_double(v);
      else if (key == "max-depth") c.model.max_depth = to_int(v);
      else if (key == "proto-set") c.model.proto_set = parse_proto_set(v);
      else if (key == "embedding-dim") c.model.embedding_dim = to_int(v);
      else if (key == "aux-per-rule") c.model.aux_per_rule = to_int(v);
      else if (key == "lr") c.train.lr = to_double(v);
      else if (key == "lr-rules") c.train.lr_rules = to_double(v);
      else if (key == "gumbel-noise") c.train.gumbel_g0 = to_double(v);
      else if (key == "gumbel-noise-decay-mode") {
        if (v == "linear") c.train.gumbel_decay = DecayMode::linear;
        else if (v == "none") c.train.gumbel_decay = DecayMode::none;
        else throw std::invalid_argument("unknown decay mode '" + v + "'");
      } else if (key == "gumbel-variant") {
        if (v == "standard") c.train.gumbel_variant = GumbelVariant::standard;
        else if (v == "scaled") c.train.gumbel_variant = GumbelVariant::scaled;
        else throw std::invalid_argument("unknown gumbel variant '" + v + "'");
      } else if (key == "gauss-noise") c.train.gauss_sigma0 = to_double(v);
      else if (key == "gauss-noise-decay") c.train.gauss_decay = to_double(v);
      else if (key == "lambda") c.train.lambda = to_double(v);
      else if (key == "iterations") c.train.iterations = to_int(v);
      else if (key == "optimizer") {
        if (v == "adam") c.train.optimizer = OptimizerKind::adam;
        else if (v == "sgd") c.train.optimizer = OptimizerKind::sgd;
        else throw std::invalid_argument("unknown optimizer '" + v + "'");
      } else if (key == "train-steps") c.train.train_steps = to_int(v);
      else if (key == "eval-steps") c.train.eval_steps = to_int(v);
      else if (key == "train-num-constants") c.train.train_num_constants = to_int(v);
      else if (key == "eval-num-constants") c.train.eval_num_constants = to_int(v);
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": value out of range for '" + key + "'");
    }
  }
  validate(c.model);
  validate(c.train);
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string config_to_string(const RunConfig& c) {
  std::ostringstream o;
  o << std::setprecision(17);
  o << "recursivity = " << to_string(c.model.recursivity) << "\n"
    << "fuzzy-and = " << to_string(c.model.ops.and_op) << "\n"
    << "fuzzy-or = " << to_string(c.model.ops.or_op) << "\n"
    << "pool = " << to_string(c.model.ops.pool) << "\n"
    << "similarity = " << to_string(c.model.ops.similarity) << "\n"
    << "temperature = " << c.model.temperature << "\n"
    << "max-depth = " << c.model.max_depth << "\n"
    << "proto-set = " << to_string(c.model.proto_set) << "\n"
    << "embedding-dim = " << c.model.embedding_dim << "\n"
    << "aux-per-rule = " << c.model.aux_per_rule << "\n"
    << "lr = " << c.train.lr << "\n"
    << "lr-rules = " << c.train.lr_rules << "\n"
    << "gumbel-noise = " << c.train.gumbel_g0 << "\n"
    << "gumbel-noise-decay-mode = " << (c.train.gumbel_decay == DecayMode::linear ? "linear" : "none") << "\n"
    << "gumbel-variant = " << (c.train.gumbel_variant == GumbelVariant::standard ? "standard" : "scaled") << "\n"
    << "gauss-noise = " << c.train.gauss_sigma0 << "\n"
    << "gauss-noise-decay = " << c.train.gauss_decay << "\n"
    << "lambda = " << c.train.lambda << "\n"
    << "iterations = " << c.train.iterations << "\n"
    << "optimizer = " << (c.train.optimizer == OptimizerKind::adam ? "adam" : "sgd") << "\n"
    << "train-steps = " << c.train.train_steps << "\n"
    << "eval-steps = " << c.train.eval_steps << "\n"
    << "train-num-constants = " << c.train.train_num_constants << "\n"
    << "eval-num-constants = " << c.train.eval_num_constants << "\n";
  return o.str();
}

std::string config_fingerprint(const RunConfig& c) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config_to_string(c));
  return o.str();
}

double gumbel_scale_at(const TrainConfig& c, int t) {
  double g = c.gumbel_g0;
  if (c.gumbel_decay == DecayMode::linear) {
    const double frac = static_cast<double>(t) / static_cast<double>(c.iterations);
    g = std::max(0.0, g * (1.0 - frac));
  }
  if (c.gumbel_variant == GumbelVariant::standard) return g;
  // log(-log g) is only defined on (0, 1); outside it the noise is off.
  if (!(g > 0.0 && g < 1.0)) return 0.0;
  return std::fabs(std::log(-std::log(g)));
}

double effective_gauss_decay(const TrainConfig& c) {
  if (c.gauss_decay > 0.0) return c.gauss_decay;
  const double half = std::max(1.0, c.iterations / 2.0);
  return std::pow(0.1, 1.0 / half);
}

double gauss_sigma_at(const TrainConfig& c, int t) {
  return c.gauss_sigma0 * std::pow(effective_gauss_decay(c), static_cast<double>(t));
}

double bce_loss(const std::vector<double>& v, const std::vector<double>& truth, const std::vector<char>& labelled) {
  if (v.size() != truth.size() || v.size() != labelled.size()) throw std::invalid_argument("bce shape mismatch");
  double s = 0.0;
  for (std::size_t e = 0; e < v.size(); ++e) {
    if (!labelled[e]) continue;
    const double p = std::clamp(v[e], kEps, 1.0 - kEps);
    s -= truth[e] * std::log(p) + (1.0 - truth[e]) * std::log(1.0 - p);
  }
  return s;
}

double interpretability_reg(const std::vector<std::vector<double>>& alphas, double lambda) {
  double s = 0.0;
  for (const auto& a : alphas)
    for (double x : a) s += x * (1.0 - x);
  return lambda * s;
}

Tape::Id bce_node(Tape& tape, Tape::Id v, const std::vector<double>& truth, const std::vector<char>& labelled) {
  const double value = bce_loss(tape.value(v), truth, labelled);
  return tape.record({value}, {v}, [v, truth, labelled](Tape& t, Tape::Id self) {
    const double g = t.grad(self)[0];
    const auto& val = t.value(v);
    double* gv = t.grad(v);
    for (std::size_t e = 0; e < val.size(); ++e) {
      if (!labelled[e]) continue;
      const double p = val[e];
      if (p < kEps || p > 1.0 - kEps) continue;
      gv[e] += g * (-truth[e] / p + (1.0 - truth[e]) / (1.0 - p));
    }
  });
}

Tape::Id reg_node(Tape& tape, const std::vector<Tape::Id>& alphas, double lambda) {
  double s = 0.0;
  for (auto id : alphas)
    for (double x : tape.value(id)) s += x * (1.0 - x);
  return tape.record({lambda * s}, std::span<const Tape::Id>(alphas), [alphas, lambda](Tape& t, Tape::Id self) {
    const double g = t.grad(self)[0];
    for (auto id : alphas) {
      double* ga = t.grad(id);
      if (!ga) continue;
      const auto& a = t.value(id);
      for (std::size_t i = 0; i < a.size(); ++i) ga[i] += g * lambda * (1.0 - 2.0 * a[i]);
    }
  });
}

Tape::Id add_node(Tape& tape, Tape::Id a, Tape::Id b) {
  return tape.record({tape.value(a)[0] + tape.value(b)[0]}, {a, b}, [a, b](Tape& t, Tape::Id self) {
    const double g = t.grad(self)[0];
    if (double* ga = t.grad(a)) ga[0] += g;
    if (double* gb = t.grad(b)) gb[0] += g;
  });
}

std::vector<double> perturb_embeddings(const Model& model, int t, double sigma0, double decay, Rng& rng) {
  std::vector<double> w = model.weights;
  const double sigma = sigma0 * std::pow(decay, static_cast<double>(t));
  if (sigma == 0.0) return w;
  for (double& x : w) x += sigma * rng.normal();
  return w;
}

Optimizer::Optimizer(OptimizerKind kind, double lr, double lr_rules, std::size_t rule_offset, std::size_t size)
    : kind_(kind), lr_(lr), lr_rules_(lr_rules), rule_offset_(rule_offset) {
  if (kind == OptimizerKind::adam) {
    m_.assign(size, 0.0);
    v_.assign(size, 0.0);
  }
}

void Optimizer::step(std::vector<double>& w, std::span<const double> grad) {
  ++t_;
  if (grad.empty()) return;
  if (kind_ == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= (i < rule_offset_ ? lr_ : lr_rules_) * grad[i];
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < w.size(); ++i) {
    m_[i] = b1 * m_[i] + (1 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1 - b2) * grad[i] * grad[i];
    const double lr = i < rule_offset_ ? lr_ : lr_rules_;
    w[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

void write_log_csv(std::ostream& out, const std::vector<LogRow>& rows, const TrainConfig& c) {
  out << "# lambda=" << c.lambda << " gauss_sigma0=" << c.gauss_sigma0 << " gauss_decay=" << effective_gauss_decay(c)
      << " gumbel_g0=" << c.gumbel_g0 << " seed=" << c.seed << "\n";
  out << "iteration,loss,bce,reg,train_mse,g_t,sigma_t\n";
  out << std::setprecision(10);
  for (const auto& r : rows)
    out << r.iteration << "," << r.loss << "," << r.bce << "," << r.reg << "," << r.train_mse << "," << r.gumbel << ","
        << r.sigma << "\n";
}

TaskSource generator_source(const std::string& task, int num_constants, std::uint64_t seed) {
  const auto d = task_defaults(task);
  if (d.deterministic) {
    auto cached = std::make_shared<IlpTask>(generate_task({task, num_constants, 0}));
    return [cached](int) { return *cached; };
  }
  return [task, num_constants, seed](int it) {
    return generate_task({task, num_constants, mix_seed({seed, 0x747261696eULL, static_cast<std::uint64_t>(it)})});
  };
}

namespace {
std::string diagnostic(const InferenceGraph& g, const std::string& what, int it) {
  double amin = 1.0, amax = 0.0;
  for (auto id : g.alpha)
    for (double a : g.tape.value(id)) {
      amin = std::min(amin, a);
      amax = std::max(amax, a);
    }
  const auto& t = g.tape.value(g.target);
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  std::ostringstream o;
  o << what << " at iteration " << it << ": alpha in [" << amin << ", " << amax << "], target valuation in [" << *lo
    << ", " << *hi << "]";
  return o.str();
}
}  // namespace

TrainResult train(const TaskSource& source, const ModelConfig& model_config, const TrainConfig& config) {
  validate(config);
  if (config.train_steps < 1) throw std::invalid_argument("train-steps must be >= 1");
  IlpTask task = source(0);
  TrainResult result;
  result.model = build_model(model_config, task.input_predicates, task.target, config.seed);
  Model& model = result.model;
  Rng rng(mix_seed({config.seed, 0x6e6f697365ULL}));
  Optimizer opt(config.optimizer, config.lr, config.lr_rules, model.rule_offset(), model.weights.size());
  const double decay = effective_gauss_decay(config);
  result.log.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    if (it > 0) task = source(it);
    const Instance inst = make_instance(model, task);
    const double g_t = gumbel_scale_at(config, it);
    const double sigma = config.gauss_sigma0 * std::pow(decay, static_cast<double>(it));
    const auto noisy = perturb_embeddings(model, it, config.gauss_sigma0, decay, rng);
    auto graph = build_inference_graph(model, noisy, inst, config.train_steps, {g_t, &rng}, true);
    Tape& tape = graph.tape;
    const Tape::Id bce = bce_node(tape, graph.target, inst.labels, inst.labelled);
    const Tape::Id reg = reg_node(tape, graph.alpha, config.lambda);
    const Tape::Id loss = add_node(tape, bce, reg);
    const double lv = tape.value(loss)[0];
    if (!std::isfinite(lv)) throw TrainingError(diagnostic(graph, "non-finite loss", it));
    tape.backward(loss);
    const auto grad = tape.grad_view(graph.weights);
    for (double x : grad)
      if (!std::isfinite(x)) throw TrainingError(diagnostic(graph, "non-finite gradient", it));
    LogRow row;
    row.iteration = it;
    row.loss = lv;
    row.bce = tape.value(bce)[0];
    row.reg = tape.value(reg)[0];
    row.train_mse = soft_mse({model.target.arity, inst.n, tape.value(graph.target)}, inst);
    row.gumbel = g_t;
    row.sigma = sigma;
    result.log.push_back(row);
    opt.step(model.weights, grad);
  }
  const Instance last = make_instance(model, task);
  result.train_mse = soft_mse(run_inference(model, last, config.train_steps).target, last);
  result.last_task = std::move(task);
  return result;
}

// ---------------------------------------------------------------------------

namespace {
double eval_loss(const Model& model, const Instance& inst, const GradCheckOptions& o) {
  auto g = build_inference_graph(model, model.weights, inst, o.steps, {}, false);
  double loss = 0.0;
  if (o.include_bce) loss += bce_loss(g.tape.value(g.target), inst.labels, inst.labelled);
  std::vector<std::vector<double>> alphas;
  for (auto id : g.alpha) alphas.push_back(g.tape.value(id));
  return loss + interpretability_reg(alphas, o.lambda);
}
}  // namespace

GradCheckReport check_gradients(Model model, const Instance& inst, const GradCheckOptions& o) {
  GradCheckReport rep;
  Rng rng(mix_seed({o.seed, 0x67726164ULL}));
  std::vector<double> analytic;
  for (int attempt = 0;; ++attempt) {
    tie_monitor::start(o.tie_threshold);
    auto g = build_inference_graph(model, model.weights, inst, o.steps, {}, true);
    const double gap = tie_monitor::stop();
    bool bce_saturated = false;
    if (o.include_bce) {
      for (std::size_t e = 0; e < inst.labels.size(); ++e) {
        const double v = g.tape.value(g.target)[e];
        // Exact 0 and 1 stay clamped under a small step; values just
        // around the clamp edges do not.
        const bool near_low = v > 0.0 && v < kEps + o.tie_threshold;
        const bool near_high = v < 1.0 && v > 1.0 - kEps - o.tie_threshold;
        if (inst.labelled[e] && (near_low || near_high)) bce_saturated = true;
      }
    }
    if (!std::isfinite(gap) && !bce_saturated) {
      Tape::Id loss = reg_node(g.tape, g.alpha, o.lambda);
      if (o.include_bce) loss = add_node(g.tape, bce_node(g.tape, g.target, inst.labels, inst.labelled), loss);
      g.tape.backward(loss);
      const auto gv = g.tape.grad_view(g.weights);
      analytic.assign(gv.begin(), gv.end());
      if (analytic.empty()) analytic.assign(model.weights.size(), 0.0);
      break;
    }
    if (attempt >= o.max_resamples) {
      rep.inconclusive = true;
      return rep;
    }
    ++rep.resamples;
    const double scale = 1.0 / std::sqrt(static_cast<double>(model.dim));
    for (double& w : model.weights) w = rng.normal() * scale;
  }
  const std::size_t size = model.weights.size();
  for (int k = 0; k < o.coordinates; ++k) {
    const std::size_t i = rng.uniform_int(size);
    const double orig = model.weights[i];
    model.weights[i] = orig + o.h;
    const double fp = eval_loss(model, inst, o);
    model.weights[i] = orig - o.h;
    const double fm = eval_loss(model, inst, o);
    model.weights[i] = orig;
    const double num = (fp - fm) / (2 * o.h);
    const double a = analytic[i];
    const double rel = std::fabs(a - num) / std::max({1.0, std::fabs(a), std::fabs(num)});
    rep.max_rel_error = std::max(rep.max_rel_error, rel);
    rep.analytic.push_back(a);
    rep.numeric.push_back(num);
    ++rep.checked;
  }
  rep.pass = rep.checked > 0 && rep.max_rel_error <= o.tolerance;
  return rep;
}

}  // namespace hri
