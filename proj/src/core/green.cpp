#include "core/green.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace floqep {

namespace {

constexpr double kResonanceTol = 1e-9;

// Shell sorted by ascending |q+alpha|, ties broken on the integer index.
std::vector<ShellPoint> sorted_shell(const Lattice& lat, const VectorXd& alpha, double q_max) {
  std::vector<ShellPoint> shell = dual_shell(lat, alpha, q_max);
  std::stable_sort(shell.begin(), shell.end(), [](const ShellPoint& a, const ShellPoint& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    return a.index < b.index;
  });
  return shell;
}

void check_inputs(const Lattice& lat, const BackgroundMedium& med, const VectorXd& alpha,
                  const VectorXd& x, const VectorXd& y) {
  med.validate(lat.dim);
  if (alpha.size() != lat.dim || x.size() != lat.dim || y.size() != lat.dim)
    fail(Errc::invalid_argument, "green: dimension mismatch");
  if (alpha.norm() == 0.0) fail(Errc::invalid_argument, "green: alpha must be nonzero");
}

std::string mode_name(const ShellPoint& sp, int dim) {
  std::ostringstream os;
  os << "q = (" << sp.index[0] << ", " << sp.index[1];
  if (dim == 3) os << ", " << sp.index[2];
  os << ")";
  return os.str();
}

// Accumulate sum of coef(p) * exp(i p.(x-y)) with per-entry compensation.
template <typename CoefFn>
GreenEval accumulate(const Lattice& lat, int d, const VectorXd& x, const VectorXd& y,
                     double q_max, const std::vector<ShellPoint>& shell, CoefFn coef) {
  std::vector<KahanSum<cplx>> acc(static_cast<std::size_t>(d) * d);
  Eigen::MatrixXd m(d, d);
  std::array<double, 3> r{0, 0, 0};
  for (int i = 0; i < d; ++i) r[i] = x[i] - y[i];

  for (const ShellPoint& sp : shell) {
    coef(sp, m);
    const double phase_arg = sp.p[0] * r[0] + sp.p[1] * r[1] + sp.p[2] * r[2];
    const cplx phase = std::polar(1.0, phase_arg) / lat.cell_volume;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) acc[i * d + j].add(m(i, j) * phase);
  }

  GreenEval out;
  out.value.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.value(i, j) = acc[i * d + j].value();
  out.q_max = q_max;
  out.term_count = shell.size();
  return out;
}

}  // namespace

GreenEval green_static(const Lattice& lat, const BackgroundMedium& med, const VectorXd& alpha,
                       const VectorXd& x, const VectorXd& y, double q_max) {
  check_inputs(lat, med, alpha, x, y);
  const int d = lat.dim;
  const double mu = med.mu, lm = med.lambda + med.mu, l2m = med.lambda + 2.0 * med.mu;
  const auto shell = sorted_shell(lat, alpha, q_max);

  return accumulate(lat, d, x, y, q_max, shell, [&](const ShellPoint& sp, Eigen::MatrixXd& m) {
    const double P = sp.norm * sp.norm;
    if (P <= 0.0) fail(Errc::numerical, "green: alpha lies on the dual lattice");
    for (int i = 0; i < d; ++i) {
      m(i, i) = lm / (mu * l2m) * sp.p[i] * sp.p[i] / (P * P) - 1.0 / (mu * P);
      for (int j = i + 1; j < d; ++j) {
        m(i, j) = lm / (mu * l2m) * sp.p[i] * sp.p[j] / (P * P);
        m(j, i) = m(i, j);
      }
    }
  });
}

GreenEval green_full(const Lattice& lat, const BackgroundMedium& med, const VectorXd& theta,
                     double omega, const VectorXd& alpha, const VectorXd& x, const VectorXd& y,
                     double q_max) {
  check_inputs(lat, med, alpha, x, y);
  const int d = lat.dim;
  if (theta.size() != d || (theta.array() < 0.0).any())
    fail(Errc::invalid_argument, "green_full: theta must be a nonnegative d-vector");
  const double mu = med.mu, lm = med.lambda + med.mu;
  const double w2 = omega * omega;
  const auto shell = sorted_shell(lat, alpha, q_max);

  std::array<double, 3> D{};
  return accumulate(lat, d, x, y, q_max, shell, [&](const ShellPoint& sp, Eigen::MatrixXd& m) {
    const double P = sp.norm * sp.norm;
    if (P <= 0.0) fail(Errc::numerical, "green: alpha lies on the dual lattice");
    for (int s = 0; s < d; ++s) {
      D[s] = w2 * theta[s] - mu * P;
      if (std::abs(D[s]) < kResonanceTol * mu * P)
        fail(Errc::numerical, "green_full: near-resonant denominator at " + mode_name(sp, d) +
                                  ", component " + std::to_string(s + 1));
    }
    double R = 1.0;
    for (int s = 0; s < d; ++s) R -= lm * sp.p[s] * sp.p[s] / D[s];
    for (int i = 0; i < d; ++i) {
      double diag = 1.0 / D[i];
      for (int s = 0; s < d; ++s)
        if (s != i) diag -= lm * sp.p[s] * sp.p[s] / (D[i] * D[s]);
      m(i, i) = diag / R;
      for (int j = i + 1; j < d; ++j) {
        m(i, j) = lm * sp.p[i] * sp.p[j] / (D[i] * D[j] * R);
        m(j, i) = m(i, j);
      }
    }
  });
}

GreenEval green_correction1(const Lattice& lat, const BackgroundMedium& med, const VectorXd& theta,
                            const VectorXd& alpha, const VectorXd& x, const VectorXd& y,
                            double q_max) {
  check_inputs(lat, med, alpha, x, y);
  const int d = lat.dim;
  if (theta.size() != d || (theta.array() < 0.0).any())
    fail(Errc::invalid_argument, "green_correction1: theta must be a nonnegative d-vector");
  const double mu = med.mu, lm = med.lambda + med.mu, l2m = med.lambda + 2.0 * med.mu;
  const auto shell = sorted_shell(lat, alpha, q_max);

  return accumulate(lat, d, x, y, q_max, shell, [&](const ShellPoint& sp, Eigen::MatrixXd& m) {
    const double P = sp.norm * sp.norm;
    if (P <= 0.0) fail(Errc::numerical, "green: alpha lies on the dual lattice");
    const double muP = mu * P;
    double wsum = 0.0;  // sum_s p_s^2 theta_s
    for (int s = 0; s < d; ++s) wsum += sp.p[s] * sp.p[s] * theta[s];
    const double T1 = mu * lm / l2m * wsum / (muP * muP);
    for (int i = 0; i < d; ++i) {
      const double pi2 = sp.p[i] * sp.p[i];
      const double off_sum = wsum - pi2 * theta[i];  // sum_{s != i} p_s^2 theta_s
      const double m1n0 =
          theta[i] / muP + lm * (theta[i] * (P - pi2) + off_sum) / (muP * muP);
      const double m0n1 = -(1.0 + lm * (P - pi2) / muP) * T1;
      m(i, i) = -(m1n0 + m0n1) / (l2m * P);
      for (int j = i + 1; j < d; ++j) {
        m(i, j) = lm * sp.p[i] * sp.p[j] / (mu * l2m * P * P) *
                  ((theta[i] + theta[j]) / muP - T1);
        m(j, i) = m(i, j);
      }
    }
  });
}

}  // namespace floqep
