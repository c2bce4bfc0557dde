#include "core/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace floqep {

MatrixXd dual_basis(const MatrixXd& basis) {
  const int d = static_cast<int>(basis.rows());
  if (d != static_cast<int>(basis.cols()) || (d != 2 && d != 3))
    fail(Errc::invalid_argument, "lattice basis must be a 2x2 or 3x3 matrix");
  Eigen::FullPivLU<MatrixXd> lu(basis);
  if (!lu.isInvertible())
    fail(Errc::invalid_argument, "degenerate lattice: basis vectors are linearly dependent");
  return 2.0 * pi * lu.inverse().transpose();
}

Lattice Lattice::from_basis(const MatrixXd& b) {
  Lattice lat;
  lat.dim = static_cast<int>(b.rows());
  lat.basis = b;
  lat.dual = dual_basis(b);
  lat.cell_volume = std::abs(b.determinant());
  return lat;
}

Lattice Lattice::square(double a) {
  return from_basis(MatrixXd::Identity(2, 2) * a);
}

Lattice Lattice::cubic(double a) {
  return from_basis(MatrixXd::Identity(3, 3) * a);
}

Lattice Lattice::hexagonal(double a) {
  MatrixXd b(2, 2);
  b.col(0) << a, 0.0;
  b.col(1) << a / 2.0, a * std::sqrt(3.0) / 2.0;
  return from_basis(b);
}

std::vector<ShellPoint> dual_shell(const Lattice& lat, const VectorXd& alpha, double q_max) {
  if (q_max < 0.0) fail(Errc::invalid_argument, "dual_shell: q_max must be nonnegative");
  if (alpha.size() != lat.dim) fail(Errc::invalid_argument, "dual_shell: alpha dimension mismatch");
  const int d = lat.dim;

  // |k_i| = |l_i . q| / 2pi <= |l_i| (q_max + |alpha|) / 2pi
  const double reach = q_max + alpha.norm();
  std::array<long, 3> bound{0, 0, 0};
  for (int i = 0; i < d; ++i)
    bound[i] = static_cast<long>(std::floor(lat.basis.col(i).norm() * reach / (2.0 * pi))) + 1;

  std::vector<ShellPoint> out;
  const double q2 = q_max * q_max;
  std::array<long, 3> k{0, 0, 0};
  const long k3lo = (d == 3) ? -bound[2] : 0, k3hi = (d == 3) ? bound[2] : 0;
  for (k[0] = -bound[0]; k[0] <= bound[0]; ++k[0])
    for (k[1] = -bound[1]; k[1] <= bound[1]; ++k[1])
      for (k[2] = k3lo; k[2] <= k3hi; ++k[2]) {
        double p[3] = {0, 0, 0};
        for (int r = 0; r < d; ++r) {
          p[r] = alpha[r];
          for (int c = 0; c < d; ++c) p[r] += lat.dual(r, c) * static_cast<double>(k[c]);
        }
        const double n2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        if (n2 <= q2) {
          ShellPoint sp;
          sp.index = k;
          sp.p = {p[0], p[1], p[2]};
          sp.norm = std::sqrt(n2);
          out.push_back(sp);
        }
      }
  // loop order is already lexicographic in (k1, k2, k3)
  return out;
}

VectorXd canonicalize_quasimomentum(const VectorXd& alpha, const Lattice& lat) {
  if (alpha.size() != lat.dim)
    fail(Errc::invalid_argument, "canonicalize_quasimomentum: alpha dimension mismatch");
  VectorXd coeff = lat.dual.fullPivLu().solve(alpha);
  for (int i = 0; i < lat.dim; ++i) {
    coeff[i] -= std::floor(coeff[i] + 0.5);       // into [-1/2, 1/2)
    if (coeff[i] >= 0.5) coeff[i] -= 1.0;         // guard the rounding edge
  }
  VectorXd reduced = lat.dual * coeff;
  if (reduced.norm() < 1e-12 * (1.0 + lat.dual.norm()))
    fail(Errc::invalid_argument,
         "forbidden quasimomentum: alpha reduces to zero in the Brillouin zone");
  return reduced;
}

}  // namespace floqep
