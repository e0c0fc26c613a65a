#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "asgdlab/operators.hpp"
#include "asgdlab/oracle.hpp"
#include "asgdlab/rng.hpp"

using namespace asgdlab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ProblemInstance make(DistributionSpec dist, double sigma2, Vector x_star) {
  return build_instance(std::move(dist),
                        sigma2 > 0.0 ? NoiseModel::additive_gaussian(sigma2)
                                     : NoiseModel::noiseless(),
                        std::move(x_star));
}

Matrix random_symmetric(int n, Rng& rng) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("expected update matrix assembles from its two parts") {
  const auto inst = make(DistributionSpec::discrete_one_hot(vec({0.7, 0.3})),
                         1.0, vec({1.0, -1.0}));
  const auto p = derive_asgd_params(inst);
  const auto ops = build_operator_set(inst, p);
  CHECK((ops.A - (ops.V1 + ops.V2)).norm() < 1e-14);
  // Top rows: x_{j+1} = (I - delta H) y_j in expectation.
  CHECK(ops.A(0, 0) == doctest::Approx(0.0));
  CHECK(ops.A(0, 2) == doctest::Approx(1.0 - p.delta * inst.h[0]).epsilon(1e-15));
  CHECK(ops.A(2, 0) == doctest::Approx(-p.c).epsilon(1e-15));
  CHECK(ops.A(2, 2) ==
        doctest::Approx(1.0 + p.c - p.g_hat * inst.h[0]).epsilon(1e-15));
  CHECK((ops.R_mat - (ops.B_mat - ops.D_mat)).norm() < 1e-14);
}

TEST_CASE("dense covariance operator matches its direct evaluation") {
  Rng rng(5);
  for (const bool gaussian : {false, true}) {
    const auto inst =
        gaussian
            ? make(DistributionSpec::gaussian(vec({1.0, 0.4, 0.1})), 1.0,
                   vec({1.0, 0.0, -1.0}))
            : make(DistributionSpec::discrete_one_hot(vec({0.5, 0.3, 0.2})),
                   1.0, vec({1.0, 0.0, -1.0}));
    const auto ops = build_operator_set(inst, derive_asgd_params(inst));
    const int m = 2 * inst.dim();
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix S = random_symmetric(m, rng);
      const Matrix direct = ops.apply_B(S);
      Eigen::Map<const Vector> vs(S.data(), m * m);
      const Vector via_mat = ops.B_mat * vs;
      Eigen::Map<const Matrix> via(via_mat.data(), m, m);
      CHECK((direct - via).norm() < 1e-12 * (1.0 + direct.norm()));
    }
  }
}

TEST_CASE("degenerate scalar input has no fourth-moment fluctuation") {
  // With a = e_1 almost surely, the update matrix is deterministic and the
  // covariance map reduces to S -> A S A'.
  const auto inst =
      make(DistributionSpec::discrete_one_hot(vec({1.0})), 0.0, vec({0.0}));
  const auto ops = build_operator_set(inst, derive_asgd_params(inst));
  CHECK(ops.R_mat.norm() < 1e-14);
}

TEST_CASE("fourth-moment contraction matches sampling") {
  Rng rng(9);
  const long N = 200000;
  for (const bool gaussian : {false, true}) {
    const auto inst =
        gaussian ? make(DistributionSpec::gaussian(vec({1.0, 0.5})), 0.0,
                        vec({0.0, 0.0}))
                 : make(DistributionSpec::discrete_one_hot(vec({0.6, 0.4})),
                        0.0, vec({0.0, 0.0}));
    const auto ops = build_operator_set(inst, derive_asgd_params(inst));
    const Matrix S = random_symmetric(2, rng);
    const Matrix closed = ops.fourth_moment(S);
    Matrix mc = Matrix::Zero(2, 2);
    Sample s;
    Rng draw(100 + int(gaussian));
    for (long i = 0; i < N; ++i) {
      draw_sample_into(inst, draw, s);
      mc += (s.a.dot(S * s.a)) * s.a * s.a.transpose();
    }
    mc /= double(N);
    CHECK((mc - closed).lpNorm<Eigen::Infinity>() <
          0.2 * (1.0 + closed.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("noise covariance block structure") {
  const auto inst = make(DistributionSpec::discrete_one_hot(vec({0.7, 0.3})),
                         2.0, vec({0.0, 0.0}));
  const auto p = derive_asgd_params(inst);
  const auto ops = build_operator_set(inst, p);
  const int d = 2;
  for (int i = 0; i < d; ++i) {
    CHECK(ops.Sigma_hat(i, i) ==
          doctest::Approx(p.delta * p.delta * 2.0 * inst.h[i]).epsilon(1e-14));
    CHECK(ops.Sigma_hat(i, d + i) ==
          doctest::Approx(p.delta * p.g_hat * 2.0 * inst.h[i]).epsilon(1e-14));
    CHECK(ops.Sigma_hat(d + i, d + i) ==
          doctest::Approx(p.g_hat * p.g_hat * 2.0 * inst.h[i]).epsilon(1e-14));
  }
  // Noiseless instances carry no forcing term.
  const auto quiet = make(DistributionSpec::discrete_one_hot(vec({0.7, 0.3})),
                          0.0, vec({0.0, 0.0}));
  CHECK(build_operator_set(quiet, p).Sigma_hat.norm() == 0.0);
}

TEST_CASE("stationary covariance is a fixed point and PSD") {
  for (const bool gaussian : {false, true}) {
    const auto inst =
        gaussian ? make(DistributionSpec::gaussian(vec({1.0, 0.2})), 1.0,
                        vec({0.0, 0.0}))
                 : make(DistributionSpec::discrete_one_hot(vec({0.7, 0.3})),
                        1.0, vec({0.0, 0.0}));
    const auto ops = build_operator_set(inst, derive_asgd_params(inst));
    const Matrix phi = stationary_covariance(ops);
    const Matrix resid = phi - ops.apply_B(phi) - ops.Sigma_hat;
    CHECK(resid.norm() < 1e-10 * (1.0 + phi.norm()));
    CHECK((phi - phi.transpose()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(phi);
    CHECK(es.eigenvalues().minCoeff() > -1e-12 * phi.norm());
  }
}

TEST_CASE("scalar second-moment blocks match the frozen reference") {
  // d = 1, lambda = 1, sigma2 = 1, default step sizes.
  const auto inst =
      make(DistributionSpec::discrete_one_hot(vec({1.0})), 1.0, vec({0.0}));
  const auto u = solve_second_moment_U(inst, derive_asgd_params(inst));
  CHECK(u.u11[0] == doctest::Approx(0.094760).epsilon(1e-4));
  CHECK(u.u12[0] == doctest::Approx(0.092981).epsilon(1e-4));
  CHECK(u.u22[0] == doctest::Approx(0.091266).epsilon(1e-4));
}

TEST_CASE("second-moment blocks: closed form equals direct solve") {
  for (const bool gaussian : {false, true}) {
    const auto inst =
        gaussian ? make(DistributionSpec::gaussian(vec({1.0, 0.3, 0.05})), 1.0,
                        Vector::Zero(3))
                 : make(DistributionSpec::discrete_one_hot(
                            vec({0.5, 0.3, 0.2})),
                        1.0, Vector::Zero(3));
    const auto p = derive_asgd_params(inst);
    const auto u = solve_second_moment_U(inst, p);
    CHECK((u.u11 - u.u11_solve).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((u.u12 - u.u12_solve).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((u.u22 - u.u22_solve).lpNorm<Eigen::Infinity>() < 1e-10);
    // Coupling identity u11 = u22 (1 - 2 delta lambda) + delta^2 lambda.
    for (int i = 0; i < 3; ++i) {
      const double lam = inst.h[i];
      CHECK(u.u11[i] ==
            doctest::Approx(u.u22[i] * (1.0 - 2.0 * p.delta * lam) +
                            p.delta * p.delta * lam)
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("second-moment blocks vanish with the step sizes") {
  const auto inst =
      make(DistributionSpec::discrete_one_hot(vec({0.7, 0.3})), 1.0,
           Vector::Zero(2));
  auto p = derive_asgd_params(inst);
  // Shrink the gradient steps while keeping the averaging weights: the
  // stationary second moment must scale away with them.
  p.delta *= 1e-6;
  p.gamma *= 1e-6;
  p.g_hat = p.alpha * p.delta + (1.0 - p.alpha) * p.gamma;
  const auto u = solve_second_moment_U(inst, p);
  CHECK(u.u22.lpNorm<Eigen::Infinity>() < 1e-5);
  CHECK(u.u11.lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("tail covariance prediction: degenerate cases") {
  const auto inst = make(DistributionSpec::discrete_one_hot(vec({0.7, 0.3})),
                         0.0, vec({1.0, -1.0}));
  const auto ops = build_operator_set(inst, derive_asgd_params(inst));

  // Zero start and zero noise: everything vanishes.
  const auto at_rest = predict_tail_covariance(ops, Vector::Zero(4), 2, 10);
  CHECK(at_rest.bias_cov.norm() < 1e-14);
  CHECK(at_rest.variance_cov.norm() < 1e-14);
  CHECK(at_rest.bias_risk == doctest::Approx(0.0));

  // One step, no averaging window: the tail covariance is one application
  // of the covariance map to the initial outer product.
  Vector theta0(4);
  theta0 << 1.0, -0.5, 1.0, -0.5;
  const auto one = predict_tail_covariance(ops, theta0, 0, 1);
  const Matrix expected = ops.apply_B(theta0 * theta0.transpose());
  CHECK((one.bias_cov - expected).norm() < 1e-10 * (1.0 + expected.norm()));
}

TEST_CASE("tail covariance prediction matches the deterministic recursion") {
  // With a = e_1 almost surely the dynamics are deterministic, so the
  // predicted bias covariance must be the outer product of the simulated
  // tail-averaged state.
  const auto inst =
      make(DistributionSpec::discrete_one_hot(vec({1.0})), 0.0, vec({0.0}));
  const auto p = derive_asgd_params(inst);
  const auto ops = build_operator_set(inst, p);
  const long n = 12, t = 4;
  double x = 1.0, v = 1.0;
  double sx = 0.0, sy = 0.0;
  for (long j = 1; j <= n; ++j) {
    const double y = p.alpha * x + (1.0 - p.alpha) * v;
    const double g = y;  // gradient at y for a=1, b=0
    x = y - p.delta * g;
    v = p.beta * y + (1.0 - p.beta) * v - p.gamma * g;
    if (j > t) {
      sx += x;
      sy += p.alpha * x + (1.0 - p.alpha) * v;
    }
  }
  const double mx = sx / double(n - t), my = sy / double(n - t);
  Vector theta0(2);
  theta0 << 1.0, 1.0;
  const auto pred = predict_tail_covariance(ops, theta0, t, n);
  CHECK(pred.bias_cov(0, 0) == doctest::Approx(mx * mx).epsilon(1e-10));
  CHECK(pred.bias_cov(0, 1) == doctest::Approx(mx * my).epsilon(1e-10));
  CHECK(pred.bias_cov(1, 1) == doctest::Approx(my * my).epsilon(1e-10));
  CHECK(pred.bias_risk == doctest::Approx(0.5 * mx * mx).epsilon(1e-10));
  CHECK(pred.variance_risk == doctest::Approx(0.0));
}

TEST_CASE("bias-variance split is consistent") {
  const auto inst = make(DistributionSpec::discrete_one_hot(vec({0.7, 0.3})),
                         1.0, vec({1.0, -1.0}));
  const auto ops = build_operator_set(inst, derive_asgd_params(inst));
  Vector theta0(4);
  theta0 << -1.0, 1.0, -1.0, 1.0;
  const auto dec = bias_variance_decompose(ops, theta0, 10, 40);
  CHECK(dec.bias_risk > 0.0);
  CHECK(dec.variance_risk > 0.0);
  CHECK(dec.total_bound ==
        doctest::Approx(2.0 * (dec.bias_risk + dec.variance_risk))
            .epsilon(1e-14));
  // Starting from rest leaves only the noise-driven part.
  const auto rest = bias_variance_decompose(ops, Vector::Zero(4), 10, 40);
  CHECK(rest.bias_risk == doctest::Approx(0.0));
  CHECK(rest.variance_risk == doctest::Approx(dec.variance_risk).epsilon(1e-12));
}

TEST_CASE("dense realization refuses large dimensions") {
  Vector p = Vector::Constant(9, 1.0 / 9.0);
  const auto inst = make(DistributionSpec::discrete_one_hot(std::move(p)), 0.0,
                         Vector::Zero(9));
  CHECK_THROWS_AS(build_operator_set(inst, derive_asgd_params(inst)),
                  std::invalid_argument);
}

TEST_CASE("expected update matrix is stable") {
  const auto inst = make(DistributionSpec::gaussian(vec({1.0, 0.1, 0.01})),
                         1.0, Vector::Zero(3));
  const auto p = derive_asgd_params(inst);
  const auto ops = build_operator_set(inst, p);
  CHECK(spectral_radius(ops.A) <= std::sqrt(p.alpha) + 1e-10);
  CHECK(spectral_radius(ops.B_mat) < 1.0);
}
