#include "core/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace floqep {

namespace {

constexpr double kDegeneracyTol = 1e-12;  // |F0_ii - F0_jj| after folding
constexpr double kBranchSnapTol = 1e-12;  // snap eigenvalues of B0 to the real axis

cplx principal_log(cplx z) {
  if (z.imag() == 0.0) z = cplx(z.real(), +0.0);
  return std::log(z);
}

MatrixXcd eig_sorted(const MatrixXcd& F, VectorXcd& values) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(F, true);
  if (es.info() != Eigen::Success) fail(Errc::numerical, "complex eigensolver failed");
  values = es.eigenvalues();
  return es.eigenvectors();
}

}  // namespace

Monodromy integrate_monodromy(const std::function<MatrixXcd(double)>& A, int n, double T,
                              double tol, std::size_t max_steps) {
  if (T <= 0.0) fail(Errc::invalid_argument, "integrate_monodromy: period must be positive");
  if (tol <= 0.0) fail(Errc::invalid_argument, "integrate_monodromy: tol must be positive");

  // Dormand-Prince 5(4) coefficients.
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                      e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                      e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  Monodromy out;
  out.T = T;
  out.stats.tol = tol;

  MatrixXcd X = MatrixXcd::Identity(n, n);
  double t = 0.0;
  double h = T / 100.0;
  const double hmin = T * 1e-14;

  MatrixXcd k1, k2, k3, k4, k5, k6, k7, X5;
  while (t < T) {
    if (out.stats.steps + out.stats.rejected >= max_steps)
      fail(Errc::numerical, "integrate_monodromy: step budget exhausted");
    if (h < hmin)
      fail(Errc::numerical, "integrate_monodromy: step-size underflow (stiff or discontinuous A)");
    if (t + h > T) h = T - t;

    k1 = A(t) * X;
    k2 = A(t + c2 * h) * (X + h * (a21 * k1));
    k3 = A(t + c3 * h) * (X + h * (a31 * k1 + a32 * k2));
    k4 = A(t + c4 * h) * (X + h * (a41 * k1 + a42 * k2 + a43 * k3));
    k5 = A(t + c5 * h) * (X + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    k6 = A(t + h) * (X + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    X5 = X + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = A(t + h) * X5;

    const double errnorm =
        (h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).norm();
    const double scale = tol * (1.0 + std::max(X.norm(), X5.norm()));
    const double err = errnorm / scale;

    if (err <= 1.0) {
      t += h;
      X.swap(X5);
      ++out.stats.steps;
    } else {
      ++out.stats.rejected;
    }
    const double f = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(f, 0.2, 5.0);
  }

  out.X_T = std::move(X);
  return out;
}

FloquetExponents floquet_exponents(const Monodromy& m) {
  const int n = static_cast<int>(m.X_T.rows());
  FloquetExponents out;
  out.T = m.T;

  VectorXcd mu;
  MatrixXcd V = eig_sorted(m.X_T, mu);

  for (int k = 0; k < n; ++k)
    if (std::abs(mu[k]) < 1e-300)
      fail(Errc::numerical,
           "floquet_exponents: zero characteristic multiplier (integrator failure)");

  VectorXcd phi(n);
  for (int k = 0; k < n; ++k) phi[k] = principal_log(mu[k]) / m.T;

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (phi[a].imag() != phi[b].imag()) return phi[a].imag() < phi[b].imag();
    return phi[a].real() < phi[b].real();
  });

  out.exponents.resize(n);
  out.multipliers.resize(n);
  out.quasi_frequencies.resize(n);
  out.V_T.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.exponents[k] = phi[idx[k]];
    out.multipliers[k] = mu[idx[k]];
    out.quasi_frequencies[k] = -iu * phi[idx[k]];
    out.V_T.col(k) = V.col(idx[k]);
  }

  Eigen::JacobiSVD<MatrixXcd> svd(out.V_T);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  out.defective_flag = !(smin > 0.0) || smax / smin > 1e10;
  return out;
}

std::pair<double, long> fold_frequency(double omega_A, double omega_mod) {
  if (omega_mod <= 0.0) fail(Errc::invalid_argument, "fold_frequency: Omega must be positive");
  long m = static_cast<long>(std::ceil(omega_A / omega_mod - 0.5));
  double w0 = omega_A - static_cast<double>(m) * omega_mod;
  if (w0 <= -omega_mod / 2) {
    m -= 1;
    w0 = omega_A - static_cast<double>(m) * omega_mod;
  } else if (w0 > omega_mod / 2) {
    m += 1;
    w0 = omega_A - static_cast<double>(m) * omega_mod;
  }
  return {w0, m};
}

std::pair<cplx, long> fold_exponent(cplx lambda, double omega_mod) {
  auto [w0, m] = fold_frequency(lambda.imag(), omega_mod);
  return {cplx(lambda.real(), w0), m};
}

namespace {

// sqrt of a B0 eigenvalue with the branch pinned: eigenvalues within
// kBranchSnapTol of the real axis are treated as real, so that roundoff
// cannot flip the +/- assignment across runs.
cplx stable_sqrt(cplx z, double scale) {
  if (std::abs(z.imag()) <= kBranchSnapTol * scale) {
    if (z.real() >= 0.0) return cplx(std::sqrt(z.real()), 0.0);
    return cplx(0.0, std::sqrt(-z.real()));
  }
  if (z.imag() == 0.0) z = cplx(z.real(), +0.0);
  return std::sqrt(z);
}

}  // namespace

TruncatedExponent truncated_exponents(const SystemAssembly& sys) {
  const int n = sys.n();
  VectorXcd lam2;
  MatrixXcd S = eig_sorted(sys.B0, lam2);
  for (int k = 0; k < n; ++k) S.col(k) /= S.col(k).norm();

  {
    Eigen::JacobiSVD<MatrixXcd> svd(S);
    const double smin = svd.singularValues().minCoeff();
    if (!(smin > 0.0) || svd.singularValues().maxCoeff() / smin > 1e10)
      fail(Errc::numerical, "truncated_exponents: B0 is not diagonalizable");
  }

  const double scale = std::max(1.0, lam2.cwiseAbs().maxCoeff());
  TruncatedExponent te;
  te.omega_mod = sys.omega_mod;
  te.S = S;
  te.lambda.resize(n);
  for (int k = 0; k < n; ++k) {
    te.lambda[k] = stable_sqrt(lam2[k], scale);
    if (std::abs(te.lambda[k]) < 1e-12 * std::sqrt(scale))
      fail(Errc::numerical,
           "truncated_exponents: B0 has a (near-)zero eigenvalue; Phi is singular");
  }

  const MatrixXcd Phi = te.lambda.asDiagonal();
  te.V.resize(2 * n, 2 * n);
  te.V.topLeftCorner(n, n) = S;
  te.V.topRightCorner(n, n) = S;
  te.V.bottomLeftCorner(n, n) = S * Phi;
  te.V.bottomRightCorner(n, n) = -S * Phi;

  te.F0.resize(2 * n);
  te.folding.resize(2 * n);
  for (int k = 0; k < 2 * n; ++k) {
    const cplx d = (k < n) ? te.lambda[k] : -te.lambda[k - n];
    auto [f0, m] = fold_exponent(d, sys.omega_mod);
    te.F0[k] = f0;
    te.folding[k] = m;
  }

  // F1 entries only on degenerate positions, from the closed-form blocks
  // [[W, W], [-W, -W]] with W^(m) = (1/2) Phi^-1 S^-1 B1^(m) S.
  const MatrixXcd Sinv = S.partialPivLu().inverse();
  std::map<int, MatrixXcd> W;
  auto Wof = [&](int m) -> const MatrixXcd* {
    auto hit = W.find(m);
    if (hit != W.end()) return &hit->second;
    auto src = sys.B1.find(m);
    if (src == sys.B1.end()) return nullptr;
    MatrixXcd w = 0.5 * Phi.inverse() * Sinv * src->second * S;
    return &W.emplace(m, std::move(w)).first->second;
  };

  te.F1 = MatrixXcd::Zero(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) {
      if (std::abs(te.F0[i] - te.F0[j]) >= kDegeneracyTol) continue;
      const int m = static_cast<int>(te.folding[i] - te.folding[j]);
      const MatrixXcd* w = Wof(m);
      if (!w) continue;
      const double sign = (i < n) ? 1.0 : -1.0;
      te.F1(i, j) = sign * (*w)(i % n, j % n);
    }
  return te;
}

MatrixXcd TruncatedExponent::F_truncated(double eta) const {
  MatrixXcd F = F1 * eta;
  F.diagonal() += F0;
  return F;
}

MatrixXcd transformed_B1_coeff(const TruncatedExponent& te, const SystemAssembly& sys, int m) {
  const int n = static_cast<int>(te.lambda.size());
  auto it = sys.B1.find(m);
  if (it == sys.B1.end()) return MatrixXcd::Zero(n, n);
  const MatrixXcd Phi_inv = te.lambda.cwiseInverse().asDiagonal();
  return 0.5 * Phi_inv * te.S.partialPivLu().solve(it->second * te.S);
}

std::pair<cplx, cplx> effective_pair_eigenvalues(cplx f0, cplx a_diag, cplx d_diag, cplx off_ij,
                                                 cplx off_ji, double eta) {
  const cplx mean = 0.5 * (a_diag + d_diag);
  const cplx rad = std::sqrt(0.25 * (a_diag - d_diag) * (a_diag - d_diag) + off_ij * off_ji);
  return {f0 + eta * (mean + rad), f0 + eta * (mean - rad)};
}

DiagonalizabilityReport diagonalizability_report(const MatrixXcd& F, double threshold) {
  const int n = static_cast<int>(F.rows());
  DiagonalizabilityReport rep;

  VectorXcd lam;
  MatrixXcd V = eig_sorted(F, lam);
  {
    Eigen::JacobiSVD<MatrixXcd> svd(V);
    const double smin = svd.singularValues().minCoeff();
    rep.eigvec_condition =
        (smin > 0.0) ? svd.singularValues().maxCoeff() / smin : std::numeric_limits<double>::infinity();
  }

  rep.min_eigengap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      rep.min_eigengap = std::min(rep.min_eigengap, std::abs(lam[i] - lam[j]));
  if (n < 2) rep.min_eigengap = 0.0;

  const double scale = std::max(1.0, F.norm());
  const double cluster_tol = threshold * scale;

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (lam[a].real() != lam[b].real()) return lam[a].real() < lam[b].real();
    return lam[a].imag() < lam[b].imag();
  });
  std::vector<bool> used(n, false);
  for (int a = 0; a < n; ++a) {
    if (used[a]) continue;
    std::vector<int> cluster{idx[a]};
    used[a] = true;
    for (int b = a + 1; b < n; ++b)
      if (!used[b] && std::abs(lam[idx[b]] - lam[idx[a]]) < cluster_tol) {
        cluster.push_back(idx[b]);
        used[b] = true;
      }
    DiagonalizabilityReport::EigenClass ec;
    cplx mean = 0.0;
    for (int k : cluster) mean += lam[k];
    mean /= static_cast<double>(cluster.size());
    ec.value = mean;
    ec.algebraic = static_cast<int>(cluster.size());

    Eigen::JacobiSVD<MatrixXcd> svd(F - mean * MatrixXcd::Identity(n, n));
    const auto& sv = svd.singularValues();
    ec.smin = sv[n - 1];
    ec.s2 = (n >= 2) ? sv[n - 2] : sv[n - 1];
    int deficiency = 0;
    for (int k = 0; k < n; ++k)
      if (sv[k] < threshold * scale) ++deficiency;
    ec.geometric = deficiency;  // dim ker(F - lambda I) at the threshold
    if (ec.geometric < 1) ec.geometric = 1;
    if (ec.geometric < ec.algebraic) rep.defective = true;
    rep.classes.push_back(ec);
  }
  return rep;
}

}  // namespace floqep
