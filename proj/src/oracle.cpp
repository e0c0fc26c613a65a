#include "asgdlab/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace asgdlab {

int draw_sample_into(const ProblemInstance& instance, Rng& rng, Sample& out) {
  const int d = instance.dim();
  if (out.a.size() != d) out.a.resize(d);
  int idx = -1;
  if (instance.dist.kind == DistKind::DiscreteOneHot) {
    const double u = rng.uniform();
    double acc = 0.0;
    idx = d - 1;  // guard against roundoff in the cumulative scan
    for (int i = 0; i < d; ++i) {
      acc += instance.h[i];
      if (u < acc) {
        idx = i;
        break;
      }
    }
    out.a.setZero();
    out.a[idx] = 1.0;
    out.b = instance.x_star[idx];
  } else {
    for (int i = 0; i < d; ++i)
      out.a[i] = std::sqrt(instance.h[i]) * rng.normal();
    out.b = out.a.dot(instance.x_star);
  }
  if (instance.noise.kind == NoiseKind::AdditiveGaussian &&
      instance.noise.sigma2 > 0.0)
    out.b += std::sqrt(instance.noise.sigma2) * rng.normal();
  return idx;
}

Sample draw_sample(const ProblemInstance& instance, Rng& rng) {
  Sample s;
  draw_sample_into(instance, rng, s);
  return s;
}

Vector stochastic_gradient(const Sample& sample, const Vector& x) {
  if (sample.a.size() != x.size())
    throw std::invalid_argument("stochastic_gradient: dimension mismatch");
  return -(sample.b - sample.a.dot(x)) * sample.a;
}

double excess_risk(const ProblemInstance& instance, const Vector& x) {
  if (x.size() != instance.dim())
    throw std::invalid_argument("excess_risk: dimension mismatch");
  const Vector diff = x - instance.x_star;
  return 0.5 * diff.cwiseProduct(diff).dot(instance.h);
}

double minimax_reference(int d, double sigma2, long n) {
  if (n < 1) throw std::invalid_argument("minimax_reference: need n >= 1");
  return static_cast<double>(d) * sigma2 / static_cast<double>(n);
}

}  // namespace asgdlab
