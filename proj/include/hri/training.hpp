#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hri/autodiff.hpp"
#include "hri/inference.hpp"
#include "hri/model.hpp"
#include "hri/random.hpp"
#include "hri/tasks.hpp"

namespace hri {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind { adam, sgd };
enum class DecayMode { linear, none };
/// `scaled` multiplies the scheduled g by log(-log g)/g (experimental).
enum class GumbelVariant { standard, scaled };

struct TrainConfig {
  int iterations = 2000;
  double lr = 0.01;
  double lr_rules = 0.03;
  double lambda = 0.1;
  double gumbel_g0 = 0.3;
  DecayMode gumbel_decay = DecayMode::linear;
  GumbelVariant gumbel_variant = GumbelVariant::standard;
  double gauss_sigma0 = 0.1;
  /// <= 0 picks decay so that sigma at iterations/2 is sigma0/10.
  double gauss_decay = 0.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  /// Inference steps and instance sizes; 0 takes the task default.
  int train_steps = 0;
  int eval_steps = 0;
  int train_num_constants = 0;
  int eval_num_constants = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& config);

/// Everything a run needs; parsed from `key = value` files.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

/// Task defaults (depth, steps, sizes) on top of the generic defaults.
RunConfig default_config(const std::string& task);
/// Applies `key = value` lines to `base`. `#` starts a comment. Unknown keys
/// and bad values throw std::invalid_argument naming the line.
RunConfig parse_config(const std::string& text, RunConfig base);
RunConfig load_config(const std::string& path, RunConfig base);
std::string config_to_string(const RunConfig& config);
/// Stable hash of the canonical config text.
std::string config_fingerprint(const RunConfig& config);

double gumbel_scale_at(const TrainConfig& c, int t);
double effective_gauss_decay(const TrainConfig& c);
double gauss_sigma_at(const TrainConfig& c, int t);

/// BCE summed over labelled atoms, with v clamped to [1e-7, 1 - 1e-7].
double bce_loss(const std::vector<double>& v, const std::vector<double>& truth, const std::vector<char>& labelled);
/// λ Σ α(1-α) over every slot.
double interpretability_reg(const std::vector<std::vector<double>>& alphas, double lambda);

// Tape versions.
Tape::Id bce_node(Tape& tape, Tape::Id v, const std::vector<double>& truth, const std::vector<char>& labelled);
Tape::Id reg_node(Tape& tape, const std::vector<Tape::Id>& alphas, double lambda);
Tape::Id add_node(Tape& tape, Tape::Id a, Tape::Id b);

/// Copy of the weights with i.i.d. N(0, σ_t²) noise added.
std::vector<double> perturb_embeddings(const Model& model, int t, double sigma0, double decay, Rng& rng);

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, double lr_rules, std::size_t rule_offset, std::size_t size);
  void step(std::vector<double>& weights, std::span<const double> grad);

 private:
  OptimizerKind kind_;
  double lr_, lr_rules_;
  std::size_t rule_offset_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

struct LogRow {
  int iteration = 0;
  double loss = 0, bce = 0, reg = 0, train_mse = 0, gumbel = 0, sigma = 0;
};

void write_log_csv(std::ostream& out, const std::vector<LogRow>& rows, const TrainConfig& config);

struct TrainResult {
  Model model;
  std::vector<LogRow> log;
  /// Noise-free MSE on the last training instance after the final update.
  double train_mse = 1.0;
  IlpTask last_task;
};

using TaskSource = std::function<IlpTask(int iteration)>;

/// Fresh instance every iteration for random tasks; deterministic tasks
/// reuse one.
TaskSource generator_source(const std::string& task, int num_constants, std::uint64_t seed);

/// Trains from scratch. Throws TrainingError on a non-finite loss with a
/// dump of score extremes and the valuation range.
TrainResult train(const TaskSource& source, const ModelConfig& model_config, const TrainConfig& config);

struct GradCheckOptions {
  double h = 1e-5;
  double tolerance = 1e-4;
  int coordinates = 40;
  int max_resamples = 10;
  double tie_threshold = 1e-6;
  bool include_bce = true;
  double lambda = 0.1;
  int steps = 2;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  int checked = 0;
  int resamples = 0;
  bool inconclusive = false;
  bool pass = false;
  std::vector<double> analytic, numeric;
};

/// Loss = BCE (optional) + λ·reg, noise free. The model's weights are
/// redrawn when a min/max comparison lies within the tie threshold.
/// Relative error is |a - n| / max(1, |a|, |n|).
GradCheckReport check_gradients(Model model, const Instance& inst, const GradCheckOptions& options);

}  // namespace hri
