#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asgdlab/model.hpp"

namespace asgdlab {

struct SolverSpec {
  std::string name;         // "asgd" or "sgd"
  double sgd_step_scale = 0.5;  // SGD step = scale / R2
};

// Experiment configuration, loadable from a JSON document. Schema (fields
// marked * are optional):
// {
//   "instance": {
//     "kind": "discrete_one_hot" | "gaussian",
//     "probabilities": [..] | "eigenvalues": [..] or
//         {"logspace": {"min": .., "max": .., "count": ..}},
//     "sigma2": 1.0,
//     "x_star": [..] | {"kind": "linspace"|"zero"}        *
//   },
//   "x0": [..] | {"kind": "zero"|"equal_risk_unit"},      * (default zero)
//   "solvers": [{"name": "asgd"}, {"name": "sgd", "step_scale": 0.5}],
//   "n_grid": [..] | {"logspace": {"min":..,"max":..,"points":..}},
//   "t_fraction": 0.5,                                    *
//   "seeds": 10,                                          *
//   "base_seed": 1234                                     *
// }
struct ExperimentConfig {
  ProblemInstance instance;
  Vector x0;
  std::vector<SolverSpec> solvers;
  std::vector<long> n_grid;
  double t_fraction = 0.5;
  int seeds = 1;
  std::uint64_t base_seed = 0;

  void validate() const;  // throws naming the invalid field
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
};

struct CurvePoint {
  std::string solver;
  long n = 0;
  double mean_excess_risk = 0.0;
  double stderr_ = 0.0;
  double minimax = 0.0;
};

// Seed of the run stream used for cell (solver index, n) and seed index.
std::uint64_t derive_run_seed(std::uint64_t base_seed, std::size_t solver_idx,
                              long n, int seed_idx);

// Mean and standard error of the tail-average excess risk over seeds, for
// every (solver, n) cell. Deterministic given base_seed regardless of
// thread count.
std::vector<CurvePoint> run_experiment(const ExperimentConfig& config,
                                       int threads = 1);

// CSV with header solver,n,mean_excess_risk,stderr,minimax; rows sorted by
// (solver, n); values printed with 17 significant digits.
void emit_csv(const std::vector<CurvePoint>& table, const std::string& path);

// Self-contained log-log plot script (matplotlib) referencing the CSV:
// one series per solver plus a dashed minimax reference when nonzero.
void emit_plot_script(const std::vector<CurvePoint>& table,
                      const std::string& csv_path, const std::string& path);

}  // namespace asgdlab
