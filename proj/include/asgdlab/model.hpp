#pragma once

#include <Eigen/Dense>

namespace asgdlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class DistKind { DiscreteOneHot, Gaussian };

// Input distribution over a-vectors. Both kinds have a diagonal second
// moment H: discrete one-hot inputs a = e_i with probability p_i give
// H = diag(p); Gaussian inputs with independent coordinates of variance
// lambda_i give H = diag(lambda).
struct DistributionSpec {
  DistKind kind;
  Vector weights;  // probabilities (discrete) or eigenvalues (Gaussian)

  int dim() const { return static_cast<int>(weights.size()); }

  // Throw std::invalid_argument naming the violated invariant.
  static DistributionSpec discrete_one_hot(Vector probabilities);
  static DistributionSpec gaussian(Vector eigenvalues);
};

enum class NoiseKind { Noiseless, AdditiveGaussian };

// Observation model b = <a, x*> + eps with eps independent of a,
// E[eps^2] = sigma2 (so the noise covariance is sigma2 * H).
struct NoiseModel {
  NoiseKind kind = NoiseKind::Noiseless;
  double sigma2 = 0.0;

  static NoiseModel noiseless() { return {NoiseKind::Noiseless, 0.0}; }
  static NoiseModel additive_gaussian(double sigma2);
};

struct ProblemInstance {
  DistributionSpec dist;
  NoiseModel noise;
  Vector x_star;

  // Derived spectral quantities, closed form at construction:
  //   h            diagonal of the second moment H
  //   mu           smallest eigenvalue of H
  //   R2           smallest scalar with E[|a|^2 aa'] <= R2 * H
  //   kappa        R2 / mu
  //   kappa_tilde  smallest scalar with E[|a|^2_{H^-1} aa'] <= kappa_tilde * H
  Vector h;
  double mu = 0.0;
  double R2 = 0.0;
  double kappa = 0.0;
  double kappa_tilde = 0.0;

  int dim() const { return dist.dim(); }
  double sigma2() const { return noise.sigma2; }
};

// Generalized step-size constants. The appendix family requires
// 0 < c1 < 1/2, c4 < 1/6, c2^2 = c4/(2-c1), c3 = c2*sqrt(2c1-c1^2)/c1.
// The defaults c1=1/5, c2=sqrt(5)/9, c3=sqrt(5)/3, c4=1/9 reproduce the
// main theorem's step sizes exactly.
struct AsgdConstants {
  double c1, c2, c3, c4;

  static AsgdConstants defaults();
  // Build a valid member of the family from the two free parameters.
  static AsgdConstants from_c1_c4(double c1, double c4);
  void validate() const;  // throws std::invalid_argument on violation
};

struct AsgdParams {
  double alpha = 0.0, beta = 0.0, gamma = 0.0, delta = 0.0;
  // Derived: c = alpha*(1-beta), g_hat = alpha*delta + (1-alpha)*gamma.
  double c = 0.0, g_hat = 0.0;
  AsgdConstants constants{};
};

ProblemInstance build_instance(DistributionSpec dist, NoiseModel noise,
                               Vector x_star);

AsgdParams derive_asgd_params(const ProblemInstance& instance,
                              AsgdConstants constants = AsgdConstants::defaults());

// Same derivation from raw spectral quantities (used for randomized
// parameterization sweeps in tests and verification).
AsgdParams params_from_spectral(double kappa, double kappa_tilde, double mu,
                                double R2,
                                AsgdConstants constants = AsgdConstants::defaults());

}  // namespace asgdlab
