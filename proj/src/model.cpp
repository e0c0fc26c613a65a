#include "asgdlab/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace asgdlab {

namespace {
constexpr double kProbTol = 1e-12;
}

DistributionSpec DistributionSpec::discrete_one_hot(Vector probabilities) {
  if (probabilities.size() == 0)
    throw std::invalid_argument("discrete_one_hot: empty probability vector");
  if (probabilities.minCoeff() <= 0.0)
    throw std::invalid_argument(
        "discrete_one_hot: probabilities must be strictly positive");
  const double sum = probabilities.sum();
  if (std::abs(sum - 1.0) > kProbTol)
    throw std::invalid_argument(
        "discrete_one_hot: probabilities must sum to 1 (got " +
        std::to_string(sum) + ")");
  return {DistKind::DiscreteOneHot, std::move(probabilities)};
}

DistributionSpec DistributionSpec::gaussian(Vector eigenvalues) {
  if (eigenvalues.size() == 0)
    throw std::invalid_argument("gaussian: empty eigenvalue vector");
  if (eigenvalues.minCoeff() <= 0.0)
    throw std::invalid_argument(
        "gaussian: eigenvalues must be strictly positive (H must be PD)");
  return {DistKind::Gaussian, std::move(eigenvalues)};
}

NoiseModel NoiseModel::additive_gaussian(double sigma2) {
  if (sigma2 < 0.0)
    throw std::invalid_argument("additive_gaussian: sigma2 must be >= 0");
  return {NoiseKind::AdditiveGaussian, sigma2};
}

ProblemInstance build_instance(DistributionSpec dist, NoiseModel noise,
                               Vector x_star) {
  if (x_star.size() != dist.dim())
    throw std::invalid_argument("build_instance: x_star dimension mismatch");
  ProblemInstance inst{std::move(dist), noise, std::move(x_star)};
  inst.h = inst.dist.weights;
  inst.mu = inst.h.minCoeff();
  if (inst.dist.kind == DistKind::DiscreteOneHot) {
    // |a| = 1 always, so E[|a|^2 aa'] = H and R2 = 1; similarly
    // E[|a|^2_{H^-1} aa'] = (1/p_i on the support) H gives
    // kappa_tilde = 1/min p_i = kappa.
    inst.R2 = 1.0;
    inst.kappa = 1.0 / inst.mu;
    inst.kappa_tilde = inst.kappa;
  } else {
    // Diagonal Gaussian fourth moment: E[|a|^2 a_i a_j] =
    // delta_ij (lambda_i tr H + 2 lambda_i^2), hence R2 = tr H + 2 lambda_max,
    // and E[|a|^2_{H^-1} aa'] = (d+2) H, hence kappa_tilde = d + 2.
    inst.R2 = inst.h.sum() + 2.0 * inst.h.maxCoeff();
    inst.kappa = inst.R2 / inst.mu;
    inst.kappa_tilde = static_cast<double>(inst.dim()) + 2.0;
  }
  return inst;
}

AsgdConstants AsgdConstants::defaults() {
  const double s5 = std::sqrt(5.0);
  return {0.2, s5 / 9.0, s5 / 3.0, 1.0 / 9.0};
}

AsgdConstants AsgdConstants::from_c1_c4(double c1, double c4) {
  AsgdConstants k;
  k.c1 = c1;
  k.c4 = c4;
  k.c2 = std::sqrt(c4 / (2.0 - c1));
  k.c3 = k.c2 * std::sqrt(2.0 * c1 - c1 * c1) / c1;
  k.validate();
  return k;
}

void AsgdConstants::validate() const {
  if (!(c1 > 0.0 && c1 < 0.5))
    throw std::invalid_argument("AsgdConstants: need 0 < c1 < 1/2");
  if (!(c4 > 0.0 && c4 < 1.0 / 6.0))
    throw std::invalid_argument("AsgdConstants: need 0 < c4 < 1/6");
  if (std::abs(c2 * c2 - c4 / (2.0 - c1)) > 1e-12 * c4)
    throw std::invalid_argument("AsgdConstants: need c2^2 = c4/(2-c1)");
  const double s = std::sqrt(2.0 * c1 - c1 * c1);
  if (std::abs(c3 - c2 * s / c1) > 1e-12 * c3)
    throw std::invalid_argument("AsgdConstants: need c3 = c2*sqrt(2c1-c1^2)/c1");
}

AsgdParams params_from_spectral(double kappa, double kappa_tilde, double mu,
                                double R2, AsgdConstants constants) {
  constants.validate();
  if (!(kappa > 0.0 && kappa_tilde > 0.0 && mu > 0.0 && R2 > 0.0))
    throw std::invalid_argument(
        "params_from_spectral: spectral quantities must be positive");
  const double sk = std::sqrt(kappa * kappa_tilde);
  const double s = std::sqrt(2.0 * constants.c1 - constants.c1 * constants.c1);
  const double c2s = constants.c2 * s;
  AsgdParams p;
  p.alpha = sk / (c2s + sk);
  p.beta = constants.c3 * c2s / sk;
  p.gamma = c2s / (mu * sk);
  p.delta = constants.c1 / R2;
  p.c = p.alpha * (1.0 - p.beta);
  p.g_hat = p.alpha * p.delta + (1.0 - p.alpha) * p.gamma;
  p.constants = constants;
  if (!(p.g_hat > p.c * p.delta))
    throw std::invalid_argument("params_from_spectral: need g_hat > c*delta");
  return p;
}

AsgdParams derive_asgd_params(const ProblemInstance& instance,
                              AsgdConstants constants) {
  return params_from_spectral(instance.kappa, instance.kappa_tilde, instance.mu,
                              instance.R2, constants);
}

}  // namespace asgdlab
