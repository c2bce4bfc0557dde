#ifndef FLOQEP_CORE_FLOQUET_HPP
#define FLOQEP_CORE_FLOQUET_HPP

#include <functional>
#include <utility>
#include <vector>

#include "core/common.hpp"
#include "core/modulation.hpp"

namespace floqep {

struct IntegratorStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double tol = 0.0;
};

struct Monodromy {
  MatrixXcd X_T;
  double T = 0.0;
  IntegratorStats stats;
};

/// Fundamental solution X(T) of X' = A(t) X, X(0) = I, by adaptive embedded
/// Dormand-Prince 5(4). Throws a stiffness error on step-size underflow.
Monodromy integrate_monodromy(const std::function<MatrixXcd(double)>& A, int n, double T,
                              double tol = 1e-10, std::size_t max_steps = 1000000);

struct FloquetExponents {
  VectorXcd exponents;         // phi_k, Im in (-pi/T, pi/T], sorted by (Im, Re)
  VectorXcd multipliers;       // e^{phi_k T} = eigenvalues of X_T
  VectorXcd quasi_frequencies; // phi_k / i, Re in (-Omega/2, Omega/2]
  MatrixXcd V_T;               // eigenvectors of X_T (columns)
  bool defective_flag = false;
  double T = 0.0;
};

FloquetExponents floquet_exponents(const Monodromy& m);

/// omega_A = omega_0 + m*Omega with omega_0 in (-Omega/2, Omega/2].
std::pair<double, long> fold_frequency(double omega_A, double omega_mod);

/// Folds the imaginary part of a complex exponent; the real part is untouched.
std::pair<cplx, long> fold_exponent(cplx lambda, double omega_mod);

/// Truncated Floquet exponent F0 + eta*F1 of the lifted first-order system,
/// built from the closed-form similarity blocks (no integration).
struct TruncatedExponent {
  VectorXcd F0;           // diagonal of F0
  MatrixXcd F1;           // populated only on degenerate positions of F0
  std::vector<long> folding;
  MatrixXcd V;            // eigenmatrix [[S, S], [S Phi, -S Phi]] of A0
  MatrixXcd S;            // eigenbasis of B0 (unit columns)
  VectorXcd lambda;       // branch-stabilized sqrt of spec(B0)
  double omega_mod = 0.0;

  MatrixXcd F_truncated(double eta) const;  // diag(F0) + eta * F1
};

TruncatedExponent truncated_exponents(const SystemAssembly& sys);

/// Transformed Fourier coefficient W^(m) = (1/2) Phi^-1 S^-1 B1^(m) S.
MatrixXcd transformed_B1_coeff(const TruncatedExponent& te, const SystemAssembly& sys, int m);

/// Eigenvalues of the 2x2 effective pair Hamiltonian at a degenerate F0 entry.
std::pair<cplx, cplx> effective_pair_eigenvalues(cplx f0, cplx a_diag, cplx d_diag, cplx off_ij,
                                                 cplx off_ji, double eta);

struct DiagonalizabilityReport {
  struct EigenClass {
    cplx value;
    int algebraic = 0;
    int geometric = 0;
    double smin = 0.0;  // two smallest singular values of F - value*I
    double s2 = 0.0;
  };
  double min_eigengap = 0.0;
  double eigvec_condition = 0.0;
  bool defective = false;
  std::vector<EigenClass> classes;
};

DiagonalizabilityReport diagonalizability_report(const MatrixXcd& F, double threshold = 1e-8);

}  // namespace floqep

#endif
