#pragma once

#include "asgdlab/model.hpp"

namespace asgdlab {

// Exact expected operators of the stacked recursion
// theta_j = A_hat_j theta_{j-1} + zeta_j on R^{2d}, where
// theta = (x - x*, y - x*). Everything is realized densely for small d:
// the covariance operator S -> E[A_hat S A_hat'] acts on vectorized
// (column-major) 2d x 2d matrices as the (2d)^2 x (2d)^2 matrix B_mat.
struct OperatorSet {
  int d = 0;
  Vector h;         // diagonal of H
  double sigma2 = 0.0;
  double mu = 0.0, R2 = 0.0, kappa = 0.0, kappa_tilde = 0.0;
  DistKind kind = DistKind::DiscreteOneHot;
  AsgdParams params;

  Matrix A;          // 2d x 2d, E[A_hat] = V1 + V2
  Matrix V1, V2;     // momentum part / expected-curvature part
  Matrix B_mat;      // covariance operator on vec space
  Matrix D_mat;      // S -> A S A'
  Matrix R_mat;      // B_mat - D_mat (fourth-moment fluctuation)
  Matrix Sigma_hat;  // noise covariance [[d^2, d g],[d g, g^2]] (x) sigma2 H
  Matrix P_mat;      // (x,y) -> (x,v) change of variables
  Matrix Z_mat;      // diag(I, mu H^-1)
  Matrix G;          // potential P' Z P

  // Fourth-moment contraction M(S) = E[(a' S a) a a'] on d x d matrices.
  Matrix fourth_moment(const Matrix& S) const;
  // Direct evaluation of the covariance map on a 2d x 2d matrix.
  Matrix apply_B(const Matrix& S) const;
};

OperatorSet build_operator_set(const ProblemInstance& instance,
                               const AsgdParams& params, int d_limit = 8);

// Fixed point of S = B(S) + Sigma_hat, i.e. (I - B)^{-1} Sigma_hat.
// Throws if the covariance operator is not a contraction.
Matrix stationary_covariance(const OperatorSet& ops);

// Per-eigendirection solution of the second-moment-only system
// (I - V1 (x) V1 - V1 (x) V2 - V2 (x) V1) U = [[d^2, d g],[d g, g^2]] (x) H,
// returned both from the closed forms and from a direct 2x2 linear solve
// per direction.
struct UBlocks {
  Vector u11, u12, u22;                      // closed form
  Vector u11_solve, u12_solve, u22_solve;    // direct linear solve
  Matrix U;                                  // assembled 2d x 2d (closed form)
};

UBlocks solve_second_moment_U(const ProblemInstance& instance,
                              const AsgdParams& params);

// Exact covariance of the tail-averaged state, split into the part driven
// by the initial condition (bias) and the part driven by gradient noise
// (variance). Risks are 0.5 * <[[H,0],[0,0]], cov>.
struct CovariancePrediction {
  Matrix bias_cov, variance_cov;
  double bias_risk = 0.0, variance_risk = 0.0;
  double total_risk_bound = 0.0;  // 2 * (bias_risk + variance_risk)
};

CovariancePrediction predict_tail_covariance(const OperatorSet& ops,
                                             const Vector& theta0, long t,
                                             long n);

struct RiskDecomposition {
  double bias_risk = 0.0, variance_risk = 0.0, total_bound = 0.0;
};

RiskDecomposition bias_variance_decompose(const OperatorSet& ops,
                                          const Vector& theta0, long t, long n);

// Largest absolute eigenvalue of a dense matrix (shared helper).
double spectral_radius(const Matrix& m);

}  // namespace asgdlab
