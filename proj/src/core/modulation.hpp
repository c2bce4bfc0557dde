#ifndef FLOQEP_CORE_MODULATION_HPP
#define FLOQEP_CORE_MODULATION_HPP

#include <map>

#include "core/capacitance.hpp"
#include "core/common.hpp"

namespace floqep {

/// T-periodic density modulation 1/rho~_is(eta,t) = 1 + eta xi_is(t) with
/// xi_is given by a finite Fourier series. Coefficients are stored in the
/// frequency domain; time evaluation is derived.
struct ModulationProfile {
  int dim = 3;
  int n_res = 1;
  double omega_mod = 1.0;  // Omega > 0
  double eta = 0.0;
  int m_max = 0;           // M
  bool real_modulation = false;
  MatrixXcd coeffs;        // row (i*dim + s), column (m + m_max), m in [-M, M]

  static constexpr int kMaxFourierOrder = 32;

  static ModulationProfile zero(int dim, int n_res, double omega_mod, double eta = 0.0);

  double period() const { return 2.0 * pi / omega_mod; }
  cplx coeff(int res, int s, int m) const;
  void set_coeff(int res, int s, int m, cplx v);
  VectorXcd xi_at(double t) const;  // size n_res*dim

  /// Zero-frequency components must vanish; with the real-modulation flag,
  /// xi^(-m) must equal conj(xi^(m)).
  void validate() const;
};

/// eta = 0 block matrix: block (i,j) = (eps/|D_i|) rho^{-1} (C-block).
MatrixXcd assemble_B0(const CapacitanceTensor& c, const VectorXd& rho, const VectorXd& volumes,
                      double epsilon);

/// Fourier coefficients of B1(t): row block s of resonator i scaled by
/// xi_is^(m). Only nonzero coefficients are stored.
std::map<int, MatrixXcd> assemble_B1_coeffs(const CapacitanceTensor& c, const VectorXd& rho,
                                            const VectorXd& volumes, double epsilon,
                                            const ModulationProfile& profile);

/// First-order system data: A0 = [[0, I], [B0, 0]], A1^(m) = [[0,0],[B1^(m),0]].
struct SystemAssembly {
  int dim = 0;
  int n_res = 0;
  double epsilon = 0.0;
  double omega_mod = 1.0;
  double eta = 0.0;
  MatrixXcd B0;
  std::map<int, MatrixXcd> B1;

  int n() const { return dim * n_res; }
  double period() const { return 2.0 * pi / omega_mod; }
  MatrixXcd A0() const;
  MatrixXcd A1_coeff(int m) const;
  MatrixXcd B_at(double t) const;  // B0 + eta sum_m B1^(m) e^{i m Omega t}
  MatrixXcd A_at(double t) const;
};

SystemAssembly lift_first_order(const MatrixXcd& B0, const std::map<int, MatrixXcd>& B1,
                                double epsilon, const ModulationProfile& profile);

SystemAssembly assemble_system(const CapacitanceTensor& c, const VectorXd& rho,
                               const VectorXd& volumes, double epsilon,
                               const ModulationProfile& profile);

}  // namespace floqep

#endif
