// Command-line front end: condition numbers, experiment runs, bound
// reports, verification suite, and exact-vs-Monte-Carlo prediction.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "asgdlab/harness.hpp"
#include "asgdlab/oracle.hpp"
#include "asgdlab/solvers.hpp"
#include "asgdlab/verify.hpp"

namespace {

using namespace asgdlab;

int cmd_condnum(const std::string& config_path) {
  const ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
  const ProblemInstance& inst = cfg.instance;
  std::cout << "d            = " << inst.dim() << "\n"
            << "mu           = " << inst.mu << "\n"
            << "R2           = " << inst.R2 << "\n"
            << "kappa        = " << inst.kappa << "\n"
            << "kappa_tilde  = " << inst.kappa_tilde << "\n"
            << "sigma2       = " << inst.sigma2() << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::uint64_t seed, bool seed_set, int threads) {
  ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
  if (seed_set) cfg.base_seed = seed;
  std::filesystem::create_directories(out_dir);
  const auto table = run_experiment(cfg, threads);
  const std::string csv = out_dir + "/curves.csv";
  emit_csv(table, csv);
  emit_plot_script(table, csv, out_dir + "/plot_curves.py");
  std::cout << "wrote " << csv << " and " << out_dir << "/plot_curves.py\n";
  return 0;
}

int cmd_bound(const std::string& config_path) {
  const ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
  const AsgdParams params = derive_asgd_params(cfg.instance);
  for (long n : cfg.n_grid) {
    const long t = static_cast<long>(n * cfg.t_fraction);
    const BoundReport r =
        theorem1_bound(cfg.instance, params, n, t, &cfg.x0);
    std::cout << "n=" << n << " t=" << t << "\n"
              << "  initial excess risk      = " << r.p0 << "\n"
              << "  bias leading             = " << r.bias_leading << "\n"
              << "  bias lower order         = " << r.bias_lower << "\n"
              << "  variance leading         = " << r.variance_leading << "\n"
              << "  variance lower order     = " << r.variance_lower << "\n"
              << "  variance exp (near)      = " << r.variance_exp_near << "\n"
              << "  variance exp (tail)      = " << r.variance_exp_tail << "\n"
              << "  variance exp (mixed)     = " << r.variance_exp_mixed << "\n"
              << "  total                    = " << r.total << "\n"
              << "  halfway-tail reference   = " << r.corollary_reference
              << "\n";
  }
  return 0;
}

int cmd_verify(int max_d, int trials, std::uint64_t seed) {
  const CheckReport rep = run_verification_suite(max_d, trials, seed);
  rep.print(std::cout);
  if (rep.all_pass()) {
    std::cout << "all checks passed\n";
    return 0;
  }
  std::cout << "FAILED checks:";
  for (const auto& c : rep.items)
    if (!c.pass) std::cout << " [" << c.name << "]";
  std::cout << "\n";
  return 1;
}

int cmd_predict(const std::string& config_path, std::uint64_t seed,
                bool seed_set, long runs, int threads) {
  const ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
  const AsgdParams params = derive_asgd_params(cfg.instance);
  const long n = cfg.n_grid.back();
  const long t = static_cast<long>(n * cfg.t_fraction);
  const CheckReport rep = check_mc_agreement(
      cfg.instance, params, t, n, runs, seed_set ? seed : cfg.base_seed,
      cfg.x0, threads);
  rep.print(std::cout);
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Streaming accelerated SGD laboratory for least-squares regression"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  long runs = 20000;
  int max_d = 6, trials = 1000;

  auto* condnum = app.add_subcommand(
      "condnum", "Print mu, R2, kappa, kappa_tilde for a config");
  condnum->add_option("config", config_path)->required();

  auto* run = app.add_subcommand(
      "run", "Run the solver experiment sweep; emit CSV and plot script");
  run->add_option("config", config_path)->required();
  auto* run_seed = run->add_option("--seed", seed, "Override base seed");
  run->add_option("--out-dir", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads");

  auto* bound = app.add_subcommand(
      "bound", "Evaluate the per-term excess-risk guarantee for a config");
  bound->add_option("config", config_path)->required();

  auto* verify = app.add_subcommand(
      "verify", "Run the operator-level verification suite");
  verify->add_option("--d", max_d, "Largest dimension in the sweep");
  verify->add_option("--trials", trials, "Random trials per check");
  verify->add_option("--seed", seed, "Suite seed");

  auto* predict = app.add_subcommand(
      "predict", "Exact covariance prediction vs Monte-Carlo simulation");
  predict->add_option("config", config_path)->required();
  auto* pred_seed = predict->add_option("--seed", seed, "Override base seed");
  predict->add_option("--runs", runs, "Monte-Carlo runs");
  predict->add_option("--threads", threads, "Worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (condnum->parsed()) return cmd_condnum(config_path);
    if (run->parsed())
      return cmd_run(config_path, out_dir, seed, run_seed->count() > 0,
                     threads);
    if (bound->parsed()) return cmd_bound(config_path);
    if (verify->parsed()) return cmd_verify(max_d, trials, seed);
    if (predict->parsed())
      return cmd_predict(config_path, seed, pred_seed->count() > 0, runs,
                         threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
