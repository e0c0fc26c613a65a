#pragma once

#include "asgdlab/model.hpp"
#include "asgdlab/rng.hpp"

namespace asgdlab {

struct Sample {
  Vector a;
  double b = 0.0;
};

// Fill an existing sample in place (hot path for solver loops; avoids a
// per-step allocation). For discrete instances `a` is a standard basis
// vector and the index of its nonzero entry is returned; -1 for Gaussian.
int draw_sample_into(const ProblemInstance& instance, Rng& rng, Sample& out);

Sample draw_sample(const ProblemInstance& instance, Rng& rng);

// Stochastic first-order oracle: -(b - <a, x>) a, an unbiased estimate of
// the gradient H(x - x*).
Vector stochastic_gradient(const Sample& sample, const Vector& x);

// Exact excess risk 0.5 * (x - x*)' H (x - x*).
double excess_risk(const ProblemInstance& instance, const Vector& x);

// Statistical minimax reference d * sigma2 / n.
double minimax_reference(int d, double sigma2, long n);

}  // namespace asgdlab
