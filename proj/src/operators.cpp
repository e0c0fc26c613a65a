#include "asgdlab/operators.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

namespace asgdlab {

double spectral_radius(const Matrix& m) {
  return Eigen::EigenSolver<Matrix>(m, /*computeEigenvectors=*/false)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

Matrix OperatorSet::fourth_moment(const Matrix& S) const {
  const Matrix H = h.asDiagonal();
  if (kind == DistKind::DiscreteOneHot) {
    // a = e_i w.p. p_i: E[(a'Sa) aa'] = sum_i p_i S_ii e_i e_i'.
    return Matrix(h.cwiseProduct(S.diagonal()).asDiagonal());
  }
  // Diagonal Gaussian (Isserlis): tr(S H) H + H (S + S') H.
  return S.cwiseProduct(H).trace() * H + H * (S + S.transpose()) * H;
}

Matrix OperatorSet::apply_B(const Matrix& S) const {
  const double dl = params.delta, gh = params.g_hat;
  const Matrix M = fourth_moment(S.bottomRightCorner(d, d));
  Matrix E4(2 * d, 2 * d);
  E4.topLeftCorner(d, d) = dl * dl * M;
  E4.topRightCorner(d, d) = dl * gh * M;
  E4.bottomLeftCorner(d, d) = dl * gh * M;
  E4.bottomRightCorner(d, d) = gh * gh * M;
  return V1 * S * V1.transpose() + V1 * S * V2.transpose() +
         V2 * S * V1.transpose() + E4;
}

OperatorSet build_operator_set(const ProblemInstance& instance,
                               const AsgdParams& params, int d_limit) {
  const int d = instance.dim();
  if (d > d_limit)
    throw std::invalid_argument(
        "build_operator_set: dimension exceeds dense-operator limit");

  OperatorSet ops;
  ops.d = d;
  ops.h = instance.h;
  ops.sigma2 = instance.sigma2();
  ops.mu = instance.mu;
  ops.R2 = instance.R2;
  ops.kappa = instance.kappa;
  ops.kappa_tilde = instance.kappa_tilde;
  ops.kind = instance.dist.kind;
  ops.params = params;

  const Matrix I = Matrix::Identity(d, d);
  const Matrix H = instance.h.asDiagonal();
  const double c = params.c, gh = params.g_hat, dl = params.delta;

  ops.V1 = Matrix::Zero(2 * d, 2 * d);
  ops.V1.topRightCorner(d, d) = I;
  ops.V1.bottomLeftCorner(d, d) = -c * I;
  ops.V1.bottomRightCorner(d, d) = (1.0 + c) * I;

  ops.V2 = Matrix::Zero(2 * d, 2 * d);
  ops.V2.topRightCorner(d, d) = -dl * H;
  ops.V2.bottomRightCorner(d, d) = -gh * H;

  ops.A = ops.V1 + ops.V2;

  const int n2 = 2 * d;
  const int n4 = n2 * n2;
  ops.B_mat.resize(n4, n4);
  Matrix basis = Matrix::Zero(n2, n2);
  for (int k = 0; k < n4; ++k) {
    basis(k % n2, k / n2) = 1.0;  // column-major vec basis
    const Matrix img = ops.apply_B(basis);
    ops.B_mat.col(k) = Eigen::Map<const Vector>(img.data(), n4);
    basis(k % n2, k / n2) = 0.0;
  }
  ops.D_mat = Eigen::kroneckerProduct(ops.A, ops.A).eval();
  ops.R_mat = ops.B_mat - ops.D_mat;

  ops.Sigma_hat.resize(n2, n2);
  const Matrix sH = ops.sigma2 * H;
  ops.Sigma_hat.topLeftCorner(d, d) = dl * dl * sH;
  ops.Sigma_hat.topRightCorner(d, d) = dl * gh * sH;
  ops.Sigma_hat.bottomLeftCorner(d, d) = dl * gh * sH;
  ops.Sigma_hat.bottomRightCorner(d, d) = gh * gh * sH;

  const double af = params.alpha / (1.0 - params.alpha);
  ops.P_mat = Matrix::Zero(n2, n2);
  ops.P_mat.topLeftCorner(d, d) = I;
  ops.P_mat.bottomLeftCorner(d, d) = -af * I;
  ops.P_mat.bottomRightCorner(d, d) = I / (1.0 - params.alpha);

  ops.Z_mat = Matrix::Zero(n2, n2);
  ops.Z_mat.topLeftCorner(d, d) = I;
  ops.Z_mat.bottomRightCorner(d, d) =
      instance.mu * instance.h.cwiseInverse().asDiagonal();

  ops.G = ops.P_mat.transpose() * ops.Z_mat * ops.P_mat;
  return ops;
}

namespace {

Matrix unvec(const Vector& w, int n2) {
  return Eigen::Map<const Matrix>(w.data(), n2, n2);
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

void require_contractive(const OperatorSet& ops) {
  if (spectral_radius(ops.B_mat) >= 1.0)
    throw std::runtime_error(
        "covariance operator is not a contraction (check step sizes)");
}

}  // namespace

Matrix stationary_covariance(const OperatorSet& ops) {
  require_contractive(ops);
  const int n4 = static_cast<int>(ops.B_mat.rows());
  const Matrix ImB = Matrix::Identity(n4, n4) - ops.B_mat;
  const Vector phi = ImB.partialPivLu().solve(vec(ops.Sigma_hat));
  Matrix S = unvec(phi, 2 * ops.d);
  return 0.5 * (S + S.transpose());
}

UBlocks solve_second_moment_U(const ProblemInstance& instance,
                              const AsgdParams& params) {
  const int d = instance.dim();
  const double c = params.c, gh = params.g_hat, dl = params.delta;
  UBlocks out;
  out.u11.resize(d);
  out.u12.resize(d);
  out.u22.resize(d);
  out.u11_solve.resize(d);
  out.u12_solve.resize(d);
  out.u22_solve.resize(d);
  out.U = Matrix::Zero(2 * d, 2 * d);

  // Extended precision throughout: the per-direction system can be poorly
  // conditioned when c is close to 1, and the two paths are compared to
  // 1e-10 relative downstream.
  const long double cl = c, ghl = gh, dll = dl;
  for (int j = 0; j < d; ++j) {
    const long double lam = instance.h[j];
    const long double dr =
        2.0L * (1.0L - cl * cl + cl * lam * (ghl + cl * dll));
    if (!(dr > 0.0L))
      throw std::runtime_error(
          "solve_second_moment_U: nonpositive per-direction denominator");
    out.u22[j] = double(((1.0L + cl - cl * dll * lam) * (ghl - cl * dll) +
                         2.0L * cl * ghl * dll * lam) /
                        dr);
    out.u12[j] = double(((1.0L + cl - lam * (ghl + cl * dll)) *
                             (ghl - cl * dll) +
                         dll * lam * (ghl + cl * dll)) /
                        dr);
    out.u11[j] = double(((1.0L + cl - cl * dll * lam) * (ghl - cl * dll) -
                         2.0L * dll * lam * (ghl - cl * dll) +
                         2.0L * dll * dll * lam) /
                        dr);

    // Independent path: direct 2x2 linear solve for (u12, u22) from the
    // off-diagonal and lower-diagonal balance equations, then u11.
    const long double m00 = 1.0L + cl * (1.0L - dll * lam);
    const long double m01 = ghl * lam - (1.0L + cl) * (1.0L - dll * lam);
    const long double m10 = 2.0L * cl * ((1.0L + cl) - ghl * lam);
    const long double m11 =
        2.0L * ((1.0L + cl) * (ghl * lam - cl) + dll * lam * cl * cl);
    const long double r0 = dll * ghl * lam;
    const long double r1 = (ghl * ghl + cl * cl * dll * dll) * lam;
    const long double det = m00 * m11 - m01 * m10;
    if (std::abs(double(det)) < 1e-300)
      throw std::runtime_error(
          "solve_second_moment_U: singular per-direction system");
    const long double s12 = (r0 * m11 - m01 * r1) / det;
    const long double s22 = (m00 * r1 - r0 * m10) / det;
    out.u12_solve[j] = double(s12);
    out.u22_solve[j] = double(s22);
    out.u11_solve[j] =
        double(s22 * (1.0L - 2.0L * dll * lam) + dll * dll * lam);

    out.U(j, j) = out.u11[j];
    out.U(j, d + j) = out.u12[j];
    out.U(d + j, j) = out.u12[j];
    out.U(d + j, d + j) = out.u22[j];
  }
  return out;
}

CovariancePrediction predict_tail_covariance(const OperatorSet& ops,
                                             const Vector& theta0, long t,
                                             long n) {
  if (n - t < 1 || t < 0)
    throw std::invalid_argument("predict_tail_covariance: need 0 <= t < n");
  if (theta0.size() != 2 * ops.d)
    throw std::invalid_argument("predict_tail_covariance: theta0 size");
  require_contractive(ops);
  const int n2 = 2 * ops.d;
  const int n4 = n2 * n2;
  const Matrix I2 = Matrix::Identity(n2, n2);
  if (spectral_radius(ops.A) >= 1.0)
    throw std::runtime_error("predict_tail_covariance: A is not contractive");

  const auto luA = (I2 - ops.A).partialPivLu();
  const auto luB =
      (Matrix::Identity(n4, n4) - ops.B_mat).partialPivLu();
  // (I - A_L)^{-1} S  and  (I - A_R')^{-1} S, i.e. solves of
  // (I-A) X = S and X (I-A') = S.
  const auto inv_left = [&](const Matrix& S) { return luA.solve(S).eval(); };
  const auto inv_rightT = [&](const Matrix& S) {
    return luA.solve(S.transpose()).transpose().eval();
  };

  // Powers of A up to n - t (largest exponent appearing in the sums).
  std::vector<Matrix> Apow;
  Apow.reserve(n - t + 2);
  Apow.push_back(I2);
  for (long k = 1; k <= n - t + 1; ++k) Apow.push_back(Apow.back() * ops.A);

  const double nt = double(n - t);
  const double nt2 = nt * nt;

  // Shared evaluation of the tail-average covariance driven by a source:
  // either the initial outer product (bias) or the per-step noise (variance).
  const auto lead_terms = [&](const Matrix& S) {
    return (S + inv_left(ops.A * S) + inv_rightT(S * ops.A.transpose()))
        .eval();
  };

  CovariancePrediction pred;

  {  // Bias: powers of B applied to vec(theta0 theta0').
    Vector w = vec(Matrix(theta0 * theta0.transpose()));
    std::vector<Vector> Bw;
    Bw.reserve(n + 2);
    Bw.push_back(w);
    for (long k = 1; k <= n + 1; ++k) Bw.push_back(ops.B_mat * Bw.back());
    const Matrix X = unvec(luB.solve(Bw[t + 1] - Bw[n + 1]), n2);
    Matrix acc_l = Matrix::Zero(n2, n2), acc_r = Matrix::Zero(n2, n2);
    for (long j = t + 1; j <= n; ++j) {
      const Matrix Sj = unvec(Bw[j], n2);
      acc_l += Apow[n + 1 - j] * Sj;
      acc_r += Sj * Apow[n + 1 - j].transpose();
    }
    Matrix bias =
        (lead_terms(X) - inv_left(acc_l) - inv_rightT(acc_r)) / nt2;
    pred.bias_cov = 0.5 * (bias + bias.transpose());
  }

  {  // Variance: same machinery seeded with (I-B)^{-1} Sigma_hat.
    const Vector phi = luB.solve(vec(ops.Sigma_hat));
    const Matrix Ph = unvec(phi, n2);
    const Matrix term1 = lead_terms(Ph) / nt;

    const Matrix left_geo =
        inv_left(inv_left(ops.A * Ph - Apow[n - t + 1] * Ph));
    const Matrix right_geo = inv_rightT(inv_rightT(
        Ph * ops.A.transpose() - Ph * Apow[n - t + 1].transpose()));
    const Matrix term2 = (left_geo + right_geo) / nt2;

    std::vector<Vector> Bp;
    Bp.reserve(n + 2);
    Bp.push_back(phi);
    for (long k = 1; k <= n + 1; ++k) Bp.push_back(ops.B_mat * Bp.back());
    const Matrix Zt = unvec(luB.solve(Bp[t + 1] - Bp[n + 1]), n2);
    const Matrix term3 = lead_terms(Zt) / nt2;

    Matrix acc_l = Matrix::Zero(n2, n2), acc_r = Matrix::Zero(n2, n2);
    for (long j = t + 1; j <= n; ++j) {
      const Matrix Sj = unvec(Bp[j], n2);
      acc_l += Apow[n + 1 - j] * Sj;
      acc_r += Sj * Apow[n + 1 - j].transpose();
    }
    const Matrix term4 = (inv_left(acc_l) + inv_rightT(acc_r)) / nt2;

    Matrix var = term1 - term2 - term3 + term4;
    pred.variance_cov = 0.5 * (var + var.transpose());
  }

  const auto risk_of = [&](const Matrix& cov) {
    return 0.5 *
           cov.topLeftCorner(ops.d, ops.d).diagonal().dot(ops.h);
  };
  pred.bias_risk = risk_of(pred.bias_cov);
  pred.variance_risk = risk_of(pred.variance_cov);
  pred.total_risk_bound = 2.0 * (pred.bias_risk + pred.variance_risk);
  return pred;
}

RiskDecomposition bias_variance_decompose(const OperatorSet& ops,
                                          const Vector& theta0, long t,
                                          long n) {
  const CovariancePrediction p = predict_tail_covariance(ops, theta0, t, n);
  return {p.bias_risk, p.variance_risk, p.total_risk_bound};
}

}  // namespace asgdlab
