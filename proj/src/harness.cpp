#include "hri/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "hri/inference.hpp"

namespace hri {

int worker_count() {
  const char* env = std::getenv("HRI_WORKERS");
  if (!env || !*env) return 1;
  try {
    return std::max(1, std::stoi(env));
  } catch (...) {
    return 1;
  }
}

namespace {

int or_default(int v, int d) { return v > 0 ? v : d; }

double min_chosen_alpha(const ExtractionResult& ex) {
  double m = 1.0;
  for (const auto& c : ex.slot_assignments) {
    const bool reachable = c.owner < 0 || !ex.names[static_cast<std::size_t>(c.owner)].empty();
    if (reachable) m = std::min(m, c.alpha);
  }
  return m;
}

}  // namespace

RunRecord evaluate_model(const Model& model, const std::string& task, std::uint64_t seed, const RunConfig& config,
                         const ExperimentOptions& options) {
  const auto d = task_defaults(task);
  const int n = or_default(config.train.eval_num_constants, d.eval_num_constants);
  const int steps = or_default(config.train.eval_steps, d.eval_steps);
  RunRecord r;
  r.task = task;
  r.seed = seed;
  const auto ex = extract_program(model);
  r.program = to_string(ex.program);
  r.degenerate = ex.degenerate;
  r.min_chosen_alpha = min_chosen_alpha(ex);
  const int repeats = std::max(1, options.eval_repeats);
  double soft = 0.0, sym = 0.0;
  for (int k = 0; k < repeats; ++k) {
    const IlpTask eval = generate_task({task, n, mix_seed({seed, 0x6576616cULL, static_cast<std::uint64_t>(k)})});
    const Instance inst = make_instance(model, eval);
    soft += soft_mse(run_inference(model, inst, steps).target, inst);
    sym += symbolic_evaluate(ex, eval, steps).mse;
  }
  r.soft_eval_mse = soft / repeats;
  r.symbolic_eval_mse = sym / repeats;
  r.soft_success = r.soft_eval_mse < kSuccessMse;
  r.symbolic_success = r.symbolic_eval_mse < kSuccessMse;
  return r;
}

RunRecord run_single(const std::string& task, std::uint64_t seed, const RunConfig& config,
                     const ExperimentOptions& options, Model* model_out) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord r;
  r.task = task;
  r.seed = seed;
  try {
    const auto d = task_defaults(task);
    TrainConfig tc = config.train;
    tc.seed = seed;
    tc.train_steps = or_default(tc.train_steps, d.train_steps);
    tc.train_num_constants = or_default(tc.train_num_constants, d.train_num_constants);
    auto result = train(generator_source(task, tc.train_num_constants, seed), config.model, tc);
    r = evaluate_model(result.model, task, seed, config, options);
    r.train_mse = result.train_mse;
    r.train_success = r.train_mse < kSuccessMse;
    if (model_out) *model_out = std::move(result.model);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ExperimentReport run_experiment(const std::string& task, const std::vector<std::uint64_t>& seeds,
                                const RunConfig& config, const ExperimentOptions& options) {
  ExperimentReport rep;
  rep.task = task;
  rep.fingerprint = config_fingerprint(config);
  rep.runs.resize(seeds.size());
  if (seeds.empty()) return rep;
  const int workers = std::min<int>(options.workers > 0 ? options.workers : worker_count(), static_cast<int>(seeds.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) rep.runs[i] = run_single(task, seeds[i], config, options);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  double tr = 0, so = 0, sy = 0;
  for (const auto& r : rep.runs) {
    tr += r.train_success;
    so += r.soft_success;
    sy += r.symbolic_success;
  }
  const double k = static_cast<double>(seeds.size());
  rep.train_pct = 100.0 * tr / k;
  rep.soft_pct = 100.0 * so / k;
  rep.symbolic_pct = 100.0 * sy / k;
  return rep;
}

std::string report_markdown(const std::vector<ExperimentReport>& reports) {
  std::ostringstream o;
  o << "| task | runs | train % | soft eval % | symbolic eval % | config |\n";
  o << "|---|---|---|---|---|---|\n";
  o << std::fixed << std::setprecision(0);
  for (const auto& r : reports)
    o << "| " << r.task << " | " << r.runs.size() << " | " << r.train_pct << " | " << r.soft_pct << " | "
      << r.symbolic_pct << " | " << r.fingerprint << " |\n";
  return o.str();
}

namespace {
std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace

std::string runs_csv(const ExperimentReport& report) {
  std::ostringstream o;
  o << std::setprecision(10);
  o << "task,seed,train_mse,soft_eval_mse,symbolic_eval_mse,train_success,soft_success,symbolic_success,wall_time,"
       "min_chosen_alpha,program,error\n";
  for (const auto& r : report.runs)
    o << r.task << "," << r.seed << "," << r.train_mse << "," << r.soft_eval_mse << "," << r.symbolic_eval_mse << ","
      << r.train_success << "," << r.soft_success << "," << r.symbolic_success << "," << r.wall_time << ","
      << r.min_chosen_alpha << "," << csv_escape(r.program) << "," << csv_escape(r.error) << "\n";
  return o.str();
}

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}
}  // namespace

Grid parse_grid(const std::string& text) {
  Grid grid;
  std::string norm = text;
  std::replace(norm.begin(), norm.end(), ';', '\n');
  std::istringstream in(norm);
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("grid line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    std::istringstream vals(line.substr(eq + 1));
    std::string v;
    auto& list = grid[key];
    while (std::getline(vals, v, ',')) {
      v = trim(v);
      if (!v.empty()) list.push_back(v);
    }
    if (list.empty()) throw std::invalid_argument("grid key '" + key + "' has no values");
  }
  return grid;
}

std::vector<SweepCell> sweep(const std::string& task, const Grid& grid, const std::vector<std::uint64_t>& seeds,
                             const RunConfig& base, const ExperimentOptions& options) {
  std::vector<std::map<std::string, std::string>> cells{{}};
  for (const auto& [key, values] : grid) {
    std::vector<std::map<std::string, std::string>> next;
    for (const auto& c : cells)
      for (const auto& v : values) {
        auto d = c;
        d[key] = v;
        next.push_back(std::move(d));
      }
    cells = std::move(next);
  }
  std::vector<SweepCell> out;
  for (const auto& settings : cells) {
    std::string text;
    for (const auto& [k, v] : settings) text += k + " = " + v + "\n";
    const RunConfig cfg = parse_config(text, base);
    out.push_back({settings, run_experiment(task, seeds, cfg, options)});
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream o;
  std::vector<std::string> keys;
  if (!cells.empty())
    for (const auto& [k, v] : cells.front().settings) keys.push_back(k);
  o << "task";
  for (const auto& k : keys) o << "," << k;
  o << ",runs,train_pct,soft_pct,symbolic_pct,fingerprint\n";
  for (const auto& c : cells) {
    o << c.report.task;
    for (const auto& k : keys) o << "," << c.settings.at(k);
    o << "," << c.report.runs.size() << "," << c.report.train_pct << "," << c.report.soft_pct << ","
      << c.report.symbolic_pct << "," << c.report.fingerprint << "\n";
  }
  return o.str();
}

}  // namespace hri
