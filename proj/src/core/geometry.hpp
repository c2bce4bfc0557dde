#ifndef FLOQEP_CORE_GEOMETRY_HPP
#define FLOQEP_CORE_GEOMETRY_HPP

#include <vector>

#include "core/common.hpp"
#include "core/lattice.hpp"

namespace floqep {

/// One smooth closed boundary in 2D, sampled at equispaced parameter values
/// (counterclockwise). Weights are trapezoid arclength weights.
struct BoundaryCurve {
  Eigen::Matrix2Xd nodes;
  Eigen::Matrix2Xd normals;  // outward unit normals
  VectorXd weights;          // |x'(t_k)| * 2 pi / n
  double length = 0.0;       // sum of weights
  double area = 0.0;         // (1/2) sum w_k x_k . nu_k   (divergence theorem)
};

/// Circle of radius r centered at c with n nodes (n even).
BoundaryCurve circle_boundary(const Eigen::Vector2d& c, double r, int n);

/// Star-shaped curve rho(t) = r0 (1 + sum_m a_m cos(m t) + b_m sin(m t)).
BoundaryCurve star_boundary(const Eigen::Vector2d& c, double r0, const VectorXd& cos_coeffs,
                            const VectorXd& sin_coeffs, int n);

/// N disjoint resonator boundaries inside the unit cell of a 2D lattice.
struct ResonatorGeometry {
  std::vector<BoundaryCurve> curves;

  int n_resonators() const { return static_cast<int>(curves.size()); }
  int total_nodes() const;
  VectorXd volumes() const;  // enclosed areas

  /// Validates: curves pairwise disjoint (node-based separation) and all
  /// nodes inside the given unit cell.
  void validate(const Lattice& lat) const;
};

ResonatorGeometry make_disks(const std::vector<Eigen::Vector2d>& centers,
                             const std::vector<double>& radii, int nodes_per_curve);

}  // namespace floqep

#endif
