#ifndef FLOQEP_CORE_LATTICE_HPP
#define FLOQEP_CORE_LATTICE_HPP

#include <array>
#include <vector>

#include "core/common.hpp"

namespace floqep {

/// Bravais lattice in d = 2 or 3 dimensions together with its dual.
/// Basis vectors are the columns of `basis`; dual columns satisfy
/// l_i . gamma_j = 2 pi delta_ij.
struct Lattice {
  int dim = 0;
  MatrixXd basis;
  MatrixXd dual;
  double cell_volume = 0.0;

  static Lattice from_basis(const MatrixXd& b);
  static Lattice square(double a = 1.0);
  static Lattice cubic(double a = 1.0);
  static Lattice hexagonal(double a = 1.0);
};

/// Dual basis from 2 pi * B^{-T}; throws on a singular basis matrix.
MatrixXd dual_basis(const MatrixXd& basis);

/// One retained dual-lattice point q + alpha.
struct ShellPoint {
  std::array<long, 3> index{0, 0, 0};  // integer coordinates of q in the dual basis
  std::array<double, 3> p{0, 0, 0};    // q + alpha, zero-padded beyond dim
  double norm = 0.0;
};

/// {q + alpha : q in dual lattice, |q + alpha| <= q_max}, ordered
/// lexicographically on the integer multi-index.
std::vector<ShellPoint> dual_shell(const Lattice& lat, const VectorXd& alpha, double q_max);

/// Reduce alpha to the half-open fundamental dual cell (coefficients in
/// [-1/2, 1/2)). Throws if the reduced quasimomentum vanishes.
VectorXd canonicalize_quasimomentum(const VectorXd& alpha, const Lattice& lat);

}  // namespace floqep

#endif
