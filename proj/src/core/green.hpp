#ifndef FLOQEP_CORE_GREEN_HPP
#define FLOQEP_CORE_GREEN_HPP

#include "core/common.hpp"
#include "core/lattice.hpp"

namespace floqep {

struct BackgroundMedium {
  double lambda = 0.0;
  double mu = 1.0;

  void validate(int dim) const {
    if (mu <= 0.0 || dim * lambda + 2.0 * mu <= 0.0)
      fail(Errc::invalid_argument, "background medium must satisfy mu > 0 and d*lambda + 2*mu > 0");
  }
};

/// Diagonal density matrix Theta = diag(theta_1..theta_d), all entries > 0.
struct DensityDiag {
  VectorXd theta;

  explicit DensityDiag(VectorXd t) : theta(std::move(t)) {
    if ((theta.array() <= 0.0).any())
      fail(Errc::invalid_argument, "density diagonal entries must be positive");
  }
};

struct GreenEval {
  MatrixXcd value;          // d x d, index-symmetric
  double q_max = 0.0;
  std::size_t term_count = 0;
};

/// Truncated dual-lattice sum of the static quasiperiodic fundamental solution.
GreenEval green_static(const Lattice& lat, const BackgroundMedium& med, const VectorXd& alpha,
                       const VectorXd& x, const VectorXd& y, double q_max);

/// Truncated sum of the full fundamental solution at frequency omega.
/// Throws a near-resonance error when omega^2 theta_i comes within 1e-9
/// (relative) of mu |q+alpha|^2 for a retained mode q.
GreenEval green_full(const Lattice& lat, const BackgroundMedium& med, const VectorXd& theta,
                     double omega, const VectorXd& alpha, const VectorXd& x, const VectorXd& y,
                     double q_max);

/// Truncated sum of the first low-frequency correction G_1 (coefficient of
/// omega^2 in the expansion of green_full around omega = 0).
GreenEval green_correction1(const Lattice& lat, const BackgroundMedium& med, const VectorXd& theta,
                            const VectorXd& alpha, const VectorXd& x, const VectorXd& y,
                            double q_max);

}  // namespace floqep

#endif
