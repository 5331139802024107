#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hri/extraction.hpp"
#include "hri/model.hpp"
#include "hri/training.hpp"

namespace hri {

inline constexpr double kSuccessMse = 1e-4;

struct RunRecord {
  std::string task;
  std::uint64_t seed = 0;
  double train_mse = 1.0;
  double soft_eval_mse = 1.0;
  double symbolic_eval_mse = 1.0;
  bool train_success = false;
  bool soft_success = false;
  bool symbolic_success = false;
  double wall_time = 0.0;
  std::string program;
  /// Smallest winning α over the slots that made it into the program.
  double min_chosen_alpha = 0.0;
  bool degenerate = false;
  /// Non-empty when the run threw.
  std::string error;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct ExperimentReport {
  std::string task;
  std::string fingerprint;
  std::vector<RunRecord> runs;
  double train_pct = 0.0;
  double soft_pct = 0.0;
  double symbolic_pct = 0.0;
};

struct ExperimentOptions {
  /// Fresh evaluation instances per run; the MSE is their mean.
  int eval_repeats = 1;
  /// 0 reads HRI_WORKERS (default 1).
  int workers = 0;
};

/// HRI_WORKERS, at least 1.
int worker_count();

/// Trains one seed and evaluates soft and symbolic on fresh instances.
/// Never throws; failures are recorded in `error`. The trained model is
/// stored into `model_out` when given.
RunRecord run_single(const std::string& task, std::uint64_t seed, const RunConfig& config,
                     const ExperimentOptions& options = {}, Model* model_out = nullptr);

/// Evaluates an already trained model on `eval_repeats` fresh instances.
RunRecord evaluate_model(const Model& model, const std::string& task, std::uint64_t seed, const RunConfig& config,
                         const ExperimentOptions& options = {});

ExperimentReport run_experiment(const std::string& task, const std::vector<std::uint64_t>& seeds,
                                const RunConfig& config, const ExperimentOptions& options = {});

std::string report_markdown(const std::vector<ExperimentReport>& reports);
std::string runs_csv(const ExperimentReport& report);

/// Parameter grid: key -> values, keys as in config files.
using Grid = std::map<std::string, std::vector<std::string>>;

/// `key = v1, v2` lines (or `;`-separated on one line).
Grid parse_grid(const std::string& text);

struct SweepCell {
  std::map<std::string, std::string> settings;
  ExperimentReport report;
};

std::vector<SweepCell> sweep(const std::string& task, const Grid& grid, const std::vector<std::uint64_t>& seeds,
                             const RunConfig& base, const ExperimentOptions& options = {});
std::string sweep_csv(const std::vector<SweepCell>& cells);

}  // namespace hri
