#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "asgdlab/operators.hpp"
#include "asgdlab/rng.hpp"

namespace asgdlab {

struct CheckItem {
  std::string name;
  double value = 0.0;   // measured quantity
  double bound = 0.0;   // what it must not exceed (or fall below, per check)
  double margin = 0.0;  // bound - value (positive = comfortable pass)
  bool pass = false;
};

struct CheckReport {
  std::vector<CheckItem> items;

  bool all_pass() const;
  void append(const CheckReport& other);
  void add(std::string name, double value, double bound, bool pass);
  void print(std::ostream& os) const;
};

// Contraction of the weighted covariance potential under the expected
// covariance operator: <G, B(tt')> <= (1 - rate) <G, tt'> for random t,
// with rate = c2*c3*sqrt(2c1-c1^2)/sqrt(kappa*kappa_tilde)
// (= 1/(9 sqrt(kappa*kappa_tilde)) at default constants).
CheckReport check_bias_contraction(const OperatorSet& ops, int trials,
                                   Rng& rng);

// Stationary covariance dominated by
// 5 sigma2 [(2/3)(1/kappa_tilde) H^{-1} + (5/6) delta I] on both diagonal
// blocks: smallest eigenvalue of (bound - phi_inf) >= -1e-8 * ||bound||.
CheckReport check_stationary_bound(const OperatorSet& ops);

// Leading-order variance functional
// <[[H,0],[0,0]], (I + (I-A_L)^{-1}A_L + (I-A_R')^{-1}A_R') (I-B)^{-1} Sigma_hat>
// is at most 5 sigma2 d.
CheckReport check_leading_variance(const OperatorSet& ops);

// Exact matrix identities of the resolvent calculus plus eigenvalue and
// power-norm bounds of A, condition of the potential G, and the
// fourth-moment domination M(U22) <= (4/5) H at default constants.
CheckReport check_matrix_identities(const OperatorSet& ops, int trials,
                                    Rng& rng);

// Closed-form second-moment blocks vs independent per-direction linear
// solves; with default constants also asserts the per-direction u22 bound
// 6*c4/(lambda*kappa_tilde) + delta/2.
CheckReport check_second_moment_forms(const ProblemInstance& instance,
                                      const AsgdParams& params,
                                      bool default_constants);

// Monte-Carlo cross-validation of the exact tail-average covariance
// predictor: entrywise |empirical - predicted| <= 5 * standard error.
// theta0 is implied by x0 (with v0 = x0); sigma2 comes from the instance.
CheckReport check_mc_agreement(const ProblemInstance& instance,
                               const AsgdParams& params, long t, long n,
                               long runs, std::uint64_t seed,
                               const Vector& x0, int threads = 1);

// Full default verification sweep used by the CLI: bias contraction over
// d in {1,2,4,6} for both distribution kinds, stationary bounds, identity
// checks, second-moment closed forms.
CheckReport run_verification_suite(int max_d, int trials, std::uint64_t seed);

}  // namespace asgdlab
