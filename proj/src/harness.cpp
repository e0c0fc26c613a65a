#include "asgdlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "asgdlab/oracle.hpp"
#include "asgdlab/rng.hpp"
#include "asgdlab/solvers.hpp"

namespace asgdlab {

namespace {

using nlohmann::json;

Vector parse_value_list(const json& j, const char* field) {
  if (!j.is_array())
    throw std::invalid_argument(std::string("config: ") + field +
                                " must be an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

Vector parse_eigenvalues(const json& j) {
  if (j.is_array()) return parse_value_list(j, "eigenvalues");
  if (j.is_object() && j.contains("logspace")) {
    const auto& ls = j.at("logspace");
    const double lo = ls.at("min").get<double>();
    const double hi = ls.at("max").get<double>();
    const int count = ls.at("count").get<int>();
    if (count < 1 || lo <= 0.0 || hi <= 0.0)
      throw std::invalid_argument("config: invalid eigenvalues.logspace");
    Vector v(count);
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : double(i) / double(count - 1);
      v[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
    }
    return v;
  }
  throw std::invalid_argument("config: eigenvalues must be array or logspace");
}

std::vector<long> parse_n_grid(const json& j) {
  std::vector<long> grid;
  if (j.is_array()) {
    for (const auto& e : j) grid.push_back(e.get<long>());
  } else if (j.is_object() && j.contains("logspace")) {
    const auto& ls = j.at("logspace");
    const double lo = ls.at("min").get<double>();
    const double hi = ls.at("max").get<double>();
    const int points = ls.at("points").get<int>();
    if (points < 1 || lo < 1.0 || hi < lo)
      throw std::invalid_argument("config: invalid n_grid.logspace");
    for (int i = 0; i < points; ++i) {
      const double f = points == 1 ? 0.0 : double(i) / double(points - 1);
      const long n = std::lround(
          std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
      if (grid.empty() || n > grid.back()) grid.push_back(n);
    }
  } else {
    throw std::invalid_argument("config: n_grid must be array or logspace");
  }
  return grid;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (solvers.empty())
    throw std::invalid_argument("config: solvers must be nonempty");
  for (const auto& s : solvers)
    if (s.name != "asgd" && s.name != "sgd")
      throw std::invalid_argument("config: unknown solver '" + s.name + "'");
  if (n_grid.empty())
    throw std::invalid_argument("config: n_grid must be nonempty");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("config: n_grid must be increasing");
  if (!(t_fraction > 0.0 && t_fraction < 1.0))
    throw std::invalid_argument("config: t_fraction must be in (0,1)");
  if (seeds < 1) throw std::invalid_argument("config: seeds must be >= 1");
  if (x0.size() != instance.dim())
    throw std::invalid_argument("config: x0 dimension mismatch");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json doc = json::parse(text);
  ExperimentConfig cfg;

  const auto& ji = doc.at("instance");
  const std::string kind = ji.at("kind").get<std::string>();
  DistributionSpec dist =
      kind == "discrete_one_hot"
          ? DistributionSpec::discrete_one_hot(
                parse_value_list(ji.at("probabilities"), "probabilities"))
      : kind == "gaussian"
          ? DistributionSpec::gaussian(parse_eigenvalues(ji.at("eigenvalues")))
          : throw std::invalid_argument("config: instance.kind must be "
                                        "discrete_one_hot or gaussian");
  const double sigma2 = ji.value("sigma2", 0.0);
  const NoiseModel noise = sigma2 > 0.0
                               ? NoiseModel::additive_gaussian(sigma2)
                               : NoiseModel::noiseless();
  const int d = dist.dim();
  Vector x_star = Vector::Zero(d);
  if (ji.contains("x_star")) {
    const auto& jx = ji.at("x_star");
    if (jx.is_array()) {
      x_star = parse_value_list(jx, "x_star");
    } else if (jx.is_object()) {
      const std::string xk = jx.at("kind").get<std::string>();
      if (xk == "linspace")
        x_star = Vector::LinSpaced(d, 1.0, -1.0);
      else if (xk != "zero")
        throw std::invalid_argument("config: x_star.kind must be zero|linspace");
    }
  }
  cfg.instance = build_instance(std::move(dist), noise, std::move(x_star));

  cfg.x0 = Vector::Zero(d);
  if (doc.contains("x0")) {
    const auto& jx = doc.at("x0");
    if (jx.is_array()) {
      cfg.x0 = parse_value_list(jx, "x0");
    } else if (jx.is_object()) {
      const std::string xk = jx.at("kind").get<std::string>();
      if (xk == "equal_risk_unit") {
        // Unit-norm start with equal excess risk in every eigendirection
        // (alternating signs): exercises the ill-conditioned directions.
        for (int i = 0; i < d; ++i)
          cfg.x0[i] = (i % 2 == 0 ? 1.0 : -1.0) /
                      std::sqrt(cfg.instance.h[i]);
        cfg.x0 = cfg.instance.x_star + cfg.x0 / cfg.x0.norm();
      } else if (xk != "zero") {
        throw std::invalid_argument("config: x0.kind must be zero|equal_risk_unit");
      }
    }
  }

  for (const auto& js : doc.at("solvers")) {
    SolverSpec s;
    s.name = js.at("name").get<std::string>();
    s.sgd_step_scale = js.value("step_scale", 0.5);
    cfg.solvers.push_back(s);
  }
  cfg.n_grid = parse_n_grid(doc.at("n_grid"));
  cfg.t_fraction = doc.value("t_fraction", 0.5);
  cfg.seeds = doc.value("seeds", 1);
  cfg.base_seed = doc.value("base_seed", std::uint64_t{0});
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::uint64_t derive_run_seed(std::uint64_t base_seed, std::size_t solver_idx,
                              long n, int seed_idx) {
  Rng mix(base_seed, (solver_idx * 1000003ULL + n) * 1000003ULL + seed_idx);
  return mix.next_u64();
}

std::vector<CurvePoint> run_experiment(const ExperimentConfig& config,
                                       int threads) {
  config.validate();
  const ProblemInstance& inst = config.instance;
  const AsgdParams params = derive_asgd_params(inst);

  struct Cell {
    std::size_t solver_idx;
    long n;
    std::vector<double> risks;  // indexed by seed
  };
  std::vector<Cell> cells;
  for (std::size_t si = 0; si < config.solvers.size(); ++si)
    for (long n : config.n_grid)
      cells.push_back({si, n, std::vector<double>(config.seeds, 0.0)});

  struct Task {
    std::size_t cell;
    int seed_idx;
  };
  std::vector<Task> tasks;
  for (std::size_t ci = 0; ci < cells.size(); ++ci)
    for (int s = 0; s < config.seeds; ++s) tasks.push_back({ci, s});

  const auto run_task = [&](const Task& task) {
    Cell& cell = cells[task.cell];
    const SolverSpec& sv = config.solvers[cell.solver_idx];
    const long n = cell.n;
    const long t = static_cast<long>(n * config.t_fraction);
    const std::uint64_t run_seed =
        derive_run_seed(config.base_seed, cell.solver_idx, n, task.seed_idx);
    const RunResult res =
        sv.name == "asgd"
            ? asgd_run(inst, params, n, t, run_seed, n, &config.x0)
            : sgd_run(inst, sv.sgd_step_scale / inst.R2, n, t, run_seed, n,
                      &config.x0);
    cell.risks[task.seed_idx] = excess_risk(inst, res.tail_average);
  };

  threads = std::max(1, threads);
  if (threads == 1) {
    for (const auto& task : tasks) run_task(task);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < tasks.size(); i += threads)
          run_task(tasks[i]);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<CurvePoint> table;
  for (const auto& cell : cells) {
    // Streaming mean/variance in fixed seed order.
    double mean = 0.0, m2 = 0.0;
    long count = 0;
    for (const double r : cell.risks) {
      ++count;
      const double delta = r - mean;
      mean += delta / double(count);
      m2 += delta * (r - mean);
    }
    CurvePoint pt;
    pt.solver = config.solvers[cell.solver_idx].name;
    pt.n = cell.n;
    pt.mean_excess_risk = mean;
    pt.stderr_ = count > 1 ? std::sqrt(m2 / double(count - 1) / double(count))
                           : 0.0;
    pt.minimax = minimax_reference(inst.dim(), inst.sigma2(), cell.n);
    table.push_back(pt);
  }
  std::sort(table.begin(), table.end(),
            [](const CurvePoint& a, const CurvePoint& b) {
              return a.solver != b.solver ? a.solver < b.solver : a.n < b.n;
            });
  return table;
}

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void emit_csv(const std::vector<CurvePoint>& table, const std::string& path) {
  if (table.empty())
    throw std::invalid_argument("emit_csv: empty curve table");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot write " + path);
  out << "solver,n,mean_excess_risk,stderr,minimax\n";
  auto sorted = table;
  std::sort(sorted.begin(), sorted.end(),
            [](const CurvePoint& a, const CurvePoint& b) {
              return a.solver != b.solver ? a.solver < b.solver : a.n < b.n;
            });
  for (const auto& pt : sorted) {
    out << pt.solver << ',' << pt.n << ',' << fmt17(pt.mean_excess_risk)
        << ',' << fmt17(pt.stderr_) << ',' << fmt17(pt.minimax) << '\n';
  }
  if (!out) throw std::runtime_error("emit_csv: write failed: " + path);
}

void emit_plot_script(const std::vector<CurvePoint>& table,
                      const std::string& csv_path, const std::string& path) {
  if (table.empty())
    throw std::invalid_argument("emit_plot_script: empty curve table");
  std::vector<std::string> solvers;
  bool any_minimax = false;
  for (const auto& pt : table) {
    if (std::find(solvers.begin(), solvers.end(), pt.solver) == solvers.end())
      solvers.push_back(pt.solver);
    any_minimax = any_minimax || pt.minimax > 0.0;
  }
  std::sort(solvers.begin(), solvers.end());

  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_plot_script: cannot write " + path);
  out << "#!/usr/bin/env python3\n"
      << "# Log-log excess risk vs sample count.\n"
      << "import csv\n"
      << "from collections import defaultdict\n"
      << "import matplotlib\n"
      << "matplotlib.use('Agg')\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "series = defaultdict(lambda: ([], [], []))\n"
      << "with open('" << csv_path << "') as f:\n"
      << "    for row in csv.DictReader(f):\n"
      << "        s = series[row['solver']]\n"
      << "        s[0].append(int(row['n']))\n"
      << "        s[1].append(float(row['mean_excess_risk']))\n"
      << "        s[2].append(float(row['minimax']))\n\n"
      << "fig, ax = plt.subplots(figsize=(6, 4.5))\n";
  for (const auto& s : solvers)
    out << "ax.loglog(*series['" << s << "'][:2], marker='o', label='" << s
        << "')\n";
  if (any_minimax) {
    out << "ns, mm = series['" << solvers.front() << "'][0], series['"
        << solvers.front() << "'][2]\n"
        << "ax.loglog(ns, mm, 'k--', label='minimax d*sigma^2/n')\n";
  }
  out << "ax.set_xlabel('samples n')\n"
      << "ax.set_ylabel('excess risk of tail average')\n"
      << "ax.legend()\n"
      << "ax.grid(True, which='both', alpha=0.3)\n"
      << "fig.tight_layout()\n"
      << "fig.savefig('" << csv_path << ".png', dpi=150)\n";
  if (!out)
    throw std::runtime_error("emit_plot_script: write failed: " + path);
}

}  // namespace asgdlab
