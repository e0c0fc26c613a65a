#include "asgdlab/solvers.hpp"

#include <cmath>
#include <stdexcept>

#include "asgdlab/oracle.hpp"
#include "asgdlab/rng.hpp"

namespace asgdlab {

namespace {

void check_window(long n, long t) {
  if (n < 1) throw std::invalid_argument("solver: need n >= 1");
  if (t < 0 || t >= n)
    throw std::invalid_argument("solver: need 0 <= t < n");
}

long effective_stride(long n, long trace_stride) {
  if (trace_stride > 0) return trace_stride;
  return std::max<long>(1, n / 1000);
}

}  // namespace

RunResult asgd_run(const ProblemInstance& instance, const AsgdParams& params,
                   long n, long t, std::uint64_t seed, long trace_stride,
                   const Vector* x0) {
  check_window(n, t);
  const int d = instance.dim();
  const long stride = effective_stride(n, trace_stride);

  Vector x = x0 ? *x0 : Vector::Zero(d);
  if (x.size() != d) throw std::invalid_argument("asgd_run: x0 dimension mismatch");
  Vector v = x;
  Vector y(d), tail_sum = Vector::Zero(d);

  const double alpha = params.alpha, beta = params.beta;
  const double gamma = params.gamma, delta = params.delta;

  Rng rng(seed);
  Sample s;
  RunResult res;
  res.seed = seed;
  res.params = params;

  for (long j = 1; j <= n; ++j) {
    y = alpha * x + (1.0 - alpha) * v;
    const int idx = draw_sample_into(instance, rng, s);
    ++res.oracle_calls;
    // Shared gradient at y: g = -(b - <a,y>) a.
    if (idx >= 0) {
      const double gs = -(s.b - y[idx]);
      v = beta * y + (1.0 - beta) * v;
      x = y;
      x[idx] -= delta * gs;
      v[idx] -= gamma * gs;
    } else {
      const double gs = -(s.b - s.a.dot(y));
      v = beta * y + (1.0 - beta) * v;
      x = y + (-delta * gs) * s.a;
      v += (-gamma * gs) * s.a;
    }
    if (j > t) tail_sum += x;
    if (j % stride == 0 || j == n) {
      TracePoint tp;
      tp.step = j;
      tp.tail_averaged = j > t;
      tp.risk = tp.tail_averaged
                    ? excess_risk(instance, tail_sum / double(j - t))
                    : excess_risk(instance, x);
      res.risk_trace.push_back(tp);
    }
  }
  res.tail_average = tail_sum / double(n - t);
  res.x_final = x;
  res.v_final = v;
  return res;
}

RunResult sgd_run(const ProblemInstance& instance, double step_size, long n,
                  long t, std::uint64_t seed, long trace_stride,
                  const Vector* x0) {
  check_window(n, t);
  if (!(step_size > 0.0) || !(step_size * instance.R2 < 1.0))
    throw std::invalid_argument("sgd_run: need 0 < step_size * R2 < 1");
  const int d = instance.dim();
  const long stride = effective_stride(n, trace_stride);

  Vector x = x0 ? *x0 : Vector::Zero(d);
  if (x.size() != d) throw std::invalid_argument("sgd_run: x0 dimension mismatch");
  Vector tail_sum = Vector::Zero(d);

  Rng rng(seed);
  Sample s;
  RunResult res;
  res.seed = seed;
  res.step_size = step_size;

  for (long j = 1; j <= n; ++j) {
    const int idx = draw_sample_into(instance, rng, s);
    ++res.oracle_calls;
    if (idx >= 0) {
      x[idx] += step_size * (s.b - x[idx]);
    } else {
      x += step_size * (s.b - s.a.dot(x)) * s.a;
    }
    if (j > t) tail_sum += x;
    if (j % stride == 0 || j == n) {
      TracePoint tp;
      tp.step = j;
      tp.tail_averaged = j > t;
      tp.risk = tp.tail_averaged
                    ? excess_risk(instance, tail_sum / double(j - t))
                    : excess_risk(instance, x);
      res.risk_trace.push_back(tp);
    }
  }
  res.tail_average = tail_sum / double(n - t);
  res.x_final = x;
  return res;
}

BoundReport theorem1_bound(const ProblemInstance& instance,
                           const AsgdParams& params, long n, long t,
                           const Vector* x0, double C) {
  check_window(n, t);
  (void)params;
  const double d = instance.dim();
  const double s2 = instance.sigma2();
  const double kk = instance.kappa * instance.kappa_tilde;
  const double sk = std::sqrt(kk);
  const double nt = double(n - t);
  const Vector z = x0 ? *x0 : Vector::Zero(instance.dim());

  BoundReport r;
  r.p0 = excess_risk(instance, z);
  r.bias_leading = C * std::pow(kk, 2.25) * d * instance.kappa / (nt * nt) *
                   std::exp(-double(t + 1) / (9.0 * sk)) * r.p0;
  r.bias_lower = C * std::pow(kk, 1.25) * d * instance.kappa *
                 std::exp(-double(n) / (9.0 * sk)) * r.p0;
  r.variance_leading = 5.0 * s2 * d / nt;
  r.variance_lower = C * s2 * d * sk / (nt * nt);
  r.variance_exp_near =
      C * s2 * d * std::pow(kk, 1.75) * std::exp(-double(n + 1) / (9.0 * sk));
  r.variance_exp_tail = C * s2 * d / nt * std::pow(kk, 2.75) *
                        std::exp(-double(n - t - 1) / (30.0 * sk));
  r.variance_exp_mixed = C * s2 * d / (nt * nt) * std::pow(kk, 3.5) *
                         instance.kappa_tilde *
                         std::exp(-double(n + 1) / (9.0 * sk));
  r.total = r.bias_leading + r.bias_lower + r.variance_leading +
            r.variance_lower + r.variance_exp_near + r.variance_exp_tail +
            r.variance_exp_mixed;
  r.corollary_reference =
      C * std::exp(-double(n) / (20.0 * sk)) * r.p0 + 11.0 * s2 * d / double(n);
  return r;
}

}  // namespace asgdlab
