#include "core/modulation.hpp"

#include <cmath>

namespace floqep {

ModulationProfile ModulationProfile::zero(int dim, int n_res, double omega_mod, double eta) {
  if (omega_mod <= 0.0) fail(Errc::invalid_argument, "modulation frequency must be positive");
  ModulationProfile p;
  p.dim = dim;
  p.n_res = n_res;
  p.omega_mod = omega_mod;
  p.eta = eta;
  p.m_max = 0;
  p.coeffs = MatrixXcd::Zero(dim * n_res, 1);
  return p;
}

cplx ModulationProfile::coeff(int res, int s, int m) const {
  if (std::abs(m) > m_max) return cplx(0.0);
  return coeffs(res * dim + s, m + m_max);
}

void ModulationProfile::set_coeff(int res, int s, int m, cplx v) {
  const int need = std::abs(m);
  if (need > kMaxFourierOrder)
    fail(Errc::invalid_argument, "modulation Fourier order exceeds the configured cap");
  if (need > m_max) {
    MatrixXcd grown = MatrixXcd::Zero(dim * n_res, 2 * need + 1);
    grown.middleCols(need - m_max, 2 * m_max + 1) = coeffs;
    coeffs = std::move(grown);
    m_max = need;
  }
  coeffs(res * dim + s, m + m_max) = v;
}

VectorXcd ModulationProfile::xi_at(double t) const {
  VectorXcd xi = VectorXcd::Zero(dim * n_res);
  for (int r = 0; r < dim * n_res; ++r)
    for (int m = -m_max; m <= m_max; ++m)
      xi[r] += coeffs(r, m + m_max) * std::polar(1.0, m * omega_mod * t);
  return xi;
}

void ModulationProfile::validate() const {
  if (omega_mod <= 0.0) fail(Errc::invalid_argument, "modulation frequency must be positive");
  if (eta < 0.0) fail(Errc::invalid_argument, "modulation amplitude eta must be nonnegative");
  for (int r = 0; r < dim * n_res; ++r) {
    if (std::abs(coeffs(r, m_max)) != 0.0)
      fail(Errc::invalid_argument,
           "modulation profile violates the vanishing zero-frequency assumption");
    if (real_modulation)
      for (int m = 1; m <= m_max; ++m)
        if (std::abs(coeffs(r, m_max + m) - std::conj(coeffs(r, m_max - m))) > 1e-14)
          fail(Errc::invalid_argument, "real modulation requires xi^(-m) = conj(xi^(m))");
  }
}

MatrixXcd assemble_B0(const CapacitanceTensor& c, const VectorXd& rho, const VectorXd& volumes,
                      double epsilon) {
  const int d = c.dim, n = c.n_res;
  if (rho.size() != d || (rho.array() <= 0.0).any())
    fail(Errc::invalid_argument, "assemble_B0: rho must be a positive d-vector");
  if (volumes.size() != n || (volumes.array() <= 0.0).any())
    fail(Errc::invalid_argument, "assemble_B0: volumes must be positive");
  MatrixXcd B0(d * n, d * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int sp = 0; sp < d; ++sp)
        for (int s = 0; s < d; ++s)
          B0(i * d + sp, j * d + s) =
              epsilon / volumes[i] / rho[sp] * c.entries(i * d + sp, j * d + s);
  return B0;
}

std::map<int, MatrixXcd> assemble_B1_coeffs(const CapacitanceTensor& c, const VectorXd& rho,
                                            const VectorXd& volumes, double epsilon,
                                            const ModulationProfile& profile) {
  if (profile.dim != c.dim || profile.n_res != c.n_res)
    fail(Errc::invalid_argument, "assemble_B1_coeffs: profile shape mismatch");
  profile.validate();
  const MatrixXcd B0 = assemble_B0(c, rho, volumes, epsilon);
  const int d = c.dim, n = c.n_res;

  std::map<int, MatrixXcd> B1;
  for (int m = -profile.m_max; m <= profile.m_max; ++m) {
    if (m == 0) continue;
    MatrixXcd Bm = MatrixXcd::Zero(d * n, d * n);
    bool nonzero = false;
    for (int i = 0; i < n; ++i)
      for (int sp = 0; sp < d; ++sp) {
        const cplx xim = profile.coeff(i, sp, m);
        if (xim == cplx(0.0)) continue;
        nonzero = true;
        Bm.row(i * d + sp) = xim * B0.row(i * d + sp);
      }
    if (nonzero) B1[m] = std::move(Bm);
  }
  return B1;
}

MatrixXcd SystemAssembly::A0() const {
  const int m = n();
  MatrixXcd A = MatrixXcd::Zero(2 * m, 2 * m);
  A.topRightCorner(m, m) = MatrixXcd::Identity(m, m);
  A.bottomLeftCorner(m, m) = B0;
  return A;
}

MatrixXcd SystemAssembly::A1_coeff(int m) const {
  const int k = n();
  MatrixXcd A = MatrixXcd::Zero(2 * k, 2 * k);
  auto it = B1.find(m);
  if (it != B1.end()) A.bottomLeftCorner(k, k) = it->second;
  return A;
}

MatrixXcd SystemAssembly::B_at(double t) const {
  MatrixXcd B = B0;
  for (const auto& [m, Bm] : B1) B += eta * Bm * std::polar(1.0, m * omega_mod * t);
  return B;
}

MatrixXcd SystemAssembly::A_at(double t) const {
  const int m = n();
  MatrixXcd A = MatrixXcd::Zero(2 * m, 2 * m);
  A.topRightCorner(m, m) = MatrixXcd::Identity(m, m);
  A.bottomLeftCorner(m, m) = B_at(t);
  return A;
}

SystemAssembly lift_first_order(const MatrixXcd& B0, const std::map<int, MatrixXcd>& B1,
                                double epsilon, const ModulationProfile& profile) {
  if (B0.rows() != B0.cols()) fail(Errc::invalid_argument, "lift_first_order: B0 must be square");
  SystemAssembly sys;
  sys.dim = profile.dim;
  sys.n_res = profile.n_res;
  sys.epsilon = epsilon;
  sys.omega_mod = profile.omega_mod;
  sys.eta = profile.eta;
  sys.B0 = B0;
  sys.B1 = B1;
  return sys;
}

SystemAssembly assemble_system(const CapacitanceTensor& c, const VectorXd& rho,
                               const VectorXd& volumes, double epsilon,
                               const ModulationProfile& profile) {
  return lift_first_order(assemble_B0(c, rho, volumes, epsilon),
                          assemble_B1_coeffs(c, rho, volumes, epsilon, profile), epsilon, profile);
}

}  // namespace floqep
