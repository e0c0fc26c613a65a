#pragma once

#include <cstdint>
#include <vector>

#include "asgdlab/model.hpp"

namespace asgdlab {

struct TracePoint {
  long step = 0;
  double risk = 0.0;
  // True once the tail window has opened: the risk refers to the running
  // tail average; before that it refers to the current iterate.
  bool tail_averaged = false;
};

struct RunResult {
  Vector tail_average;
  Vector x_final;
  Vector v_final;  // momentum solver only; empty for plain SGD
  std::vector<TracePoint> risk_trace;
  std::uint64_t seed = 0;
  long oracle_calls = 0;
  AsgdParams params;       // snapshot (momentum solver)
  double step_size = 0.0;  // snapshot (plain SGD solver)
};

// Momentum-accelerated streaming solver. Per step j (one oracle call,
// shared between both updates):
//   y = alpha*x + (1-alpha)*v
//   g = stochastic gradient at y
//   x <- y - delta*g
//   v <- beta*y + (1-beta)*v - gamma*g
// Output: average of x over steps t+1..n. trace_stride 0 means
// max(1, n/1000); x0 defaults to the zero vector (and v0 = x0).
RunResult asgd_run(const ProblemInstance& instance, const AsgdParams& params,
                   long n, long t, std::uint64_t seed, long trace_stride = 0,
                   const Vector* x0 = nullptr);

// Tail-averaged plain SGD baseline: x <- x - step * gradient at x.
RunResult sgd_run(const ProblemInstance& instance, double step_size, long n,
                  long t, std::uint64_t seed, long trace_stride = 0,
                  const Vector* x0 = nullptr);

// Per-term evaluation of the excess-risk guarantee for the accelerated
// solver with the default step sizes. All bias and lower-order entries scale
// with the caller-supplied universal constant C (default 1); the leading
// variance term 5*sigma2*d/(n-t) carries no constant.
struct BoundReport {
  double p0 = 0.0;  // initial excess risk P(x0) - P(x*)
  double bias_leading = 0.0;
  double bias_lower = 0.0;
  double variance_leading = 0.0;
  double variance_lower = 0.0;
  double variance_exp_near = 0.0;   // sigma2 d (kk)^{7/4} exp(-(n+1)/(9 sqrt(kk)))
  double variance_exp_tail = 0.0;   // sigma2 d/(n-t) (kk)^{11/4} exp(-(n-t-1)/(30 sqrt(kk)))
  double variance_exp_mixed = 0.0;  // sigma2 d/(n-t)^2 (kk)^{7/2} ktil exp(-(n+1)/(9 sqrt(kk)))
  double total = 0.0;
  // Reference value of the halfway-tail corollary:
  // C exp(-n/(20 sqrt(kk))) p0 + 11 sigma2 d / n.
  double corollary_reference = 0.0;
};

BoundReport theorem1_bound(const ProblemInstance& instance,
                           const AsgdParams& params, long n, long t,
                           const Vector* x0 = nullptr, double C = 1.0);

}  // namespace asgdlab
