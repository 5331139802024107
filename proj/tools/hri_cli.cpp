#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hri/extraction.hpp"
#include "hri/harness.hpp"
#include "hri/inference.hpp"
#include "hri/model.hpp"
#include "hri/tasks.hpp"
#include "hri/training.hpp"

using namespace hri;

namespace {

// Exit codes: 0 ok, 1 gate failed, 2 usage or runtime error.
constexpr int kGateFailed = 1;
constexpr int kError = 2;

RunConfig config_for(const std::string& task, const std::string& path) {
  RunConfig c = default_config(task);
  if (!path.empty()) c = load_config(path, c);
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::uint64_t> seed_list(int k, std::uint64_t first) {
  std::vector<std::uint64_t> s;
  for (int i = 0; i < k; ++i) s.push_back(first + static_cast<std::uint64_t>(i));
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical rule induction"};
  app.require_subcommand(1);

  std::string task, config_path, checkpoint, out, log_path, grid;
  std::string model_out = "model.json";
  std::uint64_t seed = 0;
  int n = 0, seeds = 10, iterations = 0, repeats = 1;
  bool symbolic = false, as_json = false;
  double gate = -1.0;

  auto* train_cmd = app.add_subcommand("train", "train one model");
  train_cmd->add_option("--task", task)->required();
  train_cmd->add_option("--config", config_path);
  train_cmd->add_option("--seed", seed);
  train_cmd->add_option("--iterations", iterations, "override the iteration count");
  train_cmd->add_option("--out", model_out, "checkpoint path")->capture_default_str();
  train_cmd->add_option("--log", log_path, "CSV training log");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a fresh instance (gate: mse < 1e-4)");
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--task", task)->required();
  eval_cmd->add_option("--config", config_path);
  eval_cmd->add_option("--seed", seed);
  eval_cmd->add_option("--n", n, "number of constants");
  eval_cmd->add_flag("--symbolic", symbolic, "evaluate the extracted program instead");

  auto* extract_cmd = app.add_subcommand("extract", "print the extracted program");
  extract_cmd->add_option("--checkpoint", checkpoint)->required();
  extract_cmd->add_flag("--json", as_json, "structured dump with per-slot scores");

  auto* exp_cmd = app.add_subcommand("experiment", "multi-seed train/soft/symbolic success rates");
  exp_cmd->add_option("--task", task)->required();
  exp_cmd->add_option("--seeds", seeds);
  exp_cmd->add_option("--first-seed", seed);
  exp_cmd->add_option("--config", config_path);
  exp_cmd->add_option("--repeats", repeats, "eval instances per run");
  exp_cmd->add_option("--csv", out, "per-run CSV");
  exp_cmd->add_option("--gate", gate, "minimum fraction of runs with soft and symbolic success");

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter grid, CSV output");
  sweep_cmd->add_option("--task", task)->required();
  sweep_cmd->add_option("--grid", grid, "grid file or inline 'key=v1,v2;key2=v3'")->required();
  sweep_cmd->add_option("--seeds", seeds);
  sweep_cmd->add_option("--config", config_path);
  sweep_cmd->add_option("--out", out);

  auto* gen_cmd = app.add_subcommand("gen-task", "write a generated task as JSON");
  gen_cmd->add_option("--task", task)->required();
  gen_cmd->add_option("--n", n)->required();
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--out", out)->required();

  auto* grad_cmd = app.add_subcommand("check-grad", "finite-difference gradient check (gate: max rel error <= 1e-4)");
  std::vector<std::string> grad_tasks{"predecessor", "grandparent", "adjacent_to_red"};
  int coords = 40;
  grad_cmd->add_option("--task", grad_tasks);
  grad_cmd->add_option("--coordinates", coords, "per task");
  grad_cmd->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      auto cfg = config_for(task, config_path);
      if (iterations > 0) cfg.train.iterations = iterations;
      cfg.train.seed = seed;
      auto result = train(generator_source(task, cfg.train.train_num_constants, seed), cfg.model, cfg.train);
      save_model(result.model, model_out);
      if (!log_path.empty()) {
        std::ofstream log(log_path);
        write_log_csv(log, result.log, cfg.train);
      }
      std::cout << "train_mse " << result.train_mse << "\ncheckpoint " << model_out << "\n";
      std::cout << to_string(extract_program(result.model).program);
      return 0;
    }
    if (eval_cmd->parsed()) {
      const Model model = load_model(checkpoint);
      auto cfg = config_for(task, config_path);
      const int size = n > 0 ? n : cfg.train.eval_num_constants;
      const IlpTask t = generate_task({task, size, seed});
      double mse = 0.0;
      if (symbolic) {
        mse = symbolic_evaluate(extract_program(model), t, cfg.train.eval_steps).mse;
      } else {
        const Instance inst = make_instance(model, t);
        mse = soft_mse(run_inference(model, inst, cfg.train.eval_steps).target, inst);
      }
      const bool ok = mse < kSuccessMse;
      std::cout << (symbolic ? "symbolic" : "soft") << "_mse " << mse << " " << (ok ? "PASS" : "FAIL") << "\n";
      return ok ? 0 : kGateFailed;
    }
    if (extract_cmd->parsed()) {
      const Model model = load_model(checkpoint);
      const auto ex = extract_program(model);
      std::cout << (as_json ? extraction_to_json(ex, model) : to_string(ex.program));
      return 0;
    }
    if (exp_cmd->parsed()) {
      const auto cfg = config_for(task, config_path);
      ExperimentOptions opt;
      opt.eval_repeats = repeats;
      const auto rep = run_experiment(task, seed_list(seeds, seed), cfg, opt);
      std::cout << report_markdown({rep});
      for (const auto& r : rep.runs)
        std::cout << "seed " << r.seed << ": train " << r.train_mse << " soft " << r.soft_eval_mse << " symbolic "
                  << r.symbolic_eval_mse << " (" << r.wall_time << " s)" << (r.error.empty() ? "" : " error: " + r.error)
                  << "\n";
      if (!out.empty()) std::ofstream(out) << runs_csv(rep);
      if (gate >= 0.0) {
        int both = 0;
        for (const auto& r : rep.runs) both += r.soft_success && r.symbolic_success;
        const bool ok = both >= gate * static_cast<double>(rep.runs.size()) - 1e-9;
        std::cout << "gate " << both << "/" << rep.runs.size() << " " << (ok ? "PASS" : "FAIL") << "\n";
        return ok ? 0 : kGateFailed;
      }
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const auto cfg = config_for(task, config_path);
      const std::string text = grid.find('=') != std::string::npos ? grid : read_file(grid);
      const auto cells = sweep(task, parse_grid(text), seed_list(seeds, seed), cfg);
      const auto csv = sweep_csv(cells);
      if (out.empty()) std::cout << csv;
      else std::ofstream(out) << csv;
      return 0;
    }
    if (gen_cmd->parsed()) {
      save_task(generate_task({task, n, seed}), out);
      return 0;
    }
    if (grad_cmd->parsed()) {
      bool ok = true;
      for (const auto& name : grad_tasks) {
        const auto d = task_defaults(name);
        const IlpTask t = generate_task({name, std::min(d.train_num_constants, 6), seed});
        ModelConfig mc;
        mc.max_depth = 2;
        const Model model = build_model(mc, t.input_predicates, t.target, seed);
        GradCheckOptions o;
        o.coordinates = coords;
        o.seed = seed;
        const auto rep = check_gradients(model, make_instance(model, t), o);
        std::cout << name << ": checked " << rep.checked << " max_rel_error " << rep.max_rel_error << " resamples "
                  << rep.resamples << (rep.inconclusive ? " INCONCLUSIVE" : (rep.pass ? " PASS" : " FAIL")) << "\n";
        ok = ok && rep.pass;
      }
      return ok ? 0 : kGateFailed;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return 0;
}
