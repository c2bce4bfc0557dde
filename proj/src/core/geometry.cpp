#include "core/geometry.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace floqep {

namespace {

BoundaryCurve from_parametrization(int n, const std::function<void(double, Eigen::Vector2d&, Eigen::Vector2d&)>& eval) {
  if (n < 8 || n % 2 != 0)
    fail(Errc::invalid_argument, "boundary curves need an even node count >= 8");
  BoundaryCurve bc;
  bc.nodes.resize(2, n);
  bc.normals.resize(2, n);
  bc.weights.resize(n);
  const double h = 2.0 * pi / n;
  Eigen::Vector2d x, dx;
  for (int k = 0; k < n; ++k) {
    eval(h * k, x, dx);
    const double speed = dx.norm();
    if (speed <= 0.0) fail(Errc::invalid_argument, "degenerate curve parametrization");
    bc.nodes.col(k) = x;
    bc.normals.col(k) = Eigen::Vector2d(dx.y(), -dx.x()) / speed;  // outward for ccw curves
    bc.weights[k] = speed * h;
  }
  bc.length = bc.weights.sum();
  double a = 0.0;
  for (int k = 0; k < n; ++k) a += bc.weights[k] * bc.nodes.col(k).dot(bc.normals.col(k));
  bc.area = 0.5 * a;
  if (bc.area <= 0.0) fail(Errc::invalid_argument, "curve orientation must be counterclockwise");
  return bc;
}

}  // namespace

BoundaryCurve circle_boundary(const Eigen::Vector2d& c, double r, int n) {
  if (r <= 0.0) fail(Errc::invalid_argument, "circle radius must be positive");
  return from_parametrization(n, [&](double t, Eigen::Vector2d& x, Eigen::Vector2d& dx) {
    x = c + r * Eigen::Vector2d(std::cos(t), std::sin(t));
    dx = r * Eigen::Vector2d(-std::sin(t), std::cos(t));
  });
}

BoundaryCurve star_boundary(const Eigen::Vector2d& c, double r0, const VectorXd& cos_coeffs,
                            const VectorXd& sin_coeffs, int n) {
  if (r0 <= 0.0) fail(Errc::invalid_argument, "star base radius must be positive");
  const int mc = static_cast<int>(cos_coeffs.size());
  const int ms = static_cast<int>(sin_coeffs.size());
  return from_parametrization(n, [&](double t, Eigen::Vector2d& x, Eigen::Vector2d& dx) {
    double rho = 1.0, drho = 0.0;
    for (int m = 1; m <= mc; ++m) {
      rho += cos_coeffs[m - 1] * std::cos(m * t);
      drho -= cos_coeffs[m - 1] * m * std::sin(m * t);
    }
    for (int m = 1; m <= ms; ++m) {
      rho += sin_coeffs[m - 1] * std::sin(m * t);
      drho += sin_coeffs[m - 1] * m * std::cos(m * t);
    }
    rho *= r0;
    drho *= r0;
    const Eigen::Vector2d e(std::cos(t), std::sin(t));
    const Eigen::Vector2d de(-std::sin(t), std::cos(t));
    x = c + rho * e;
    dx = drho * e + rho * de;
  });
}

int ResonatorGeometry::total_nodes() const {
  int n = 0;
  for (const auto& c : curves) n += static_cast<int>(c.nodes.cols());
  return n;
}

VectorXd ResonatorGeometry::volumes() const {
  VectorXd v(curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) v[static_cast<int>(i)] = curves[i].area;
  return v;
}

void ResonatorGeometry::validate(const Lattice& lat) const {
  if (lat.dim != 2) fail(Errc::invalid_argument, "resonator geometry is 2D only");
  if (curves.empty()) fail(Errc::invalid_argument, "geometry has no resonators");
  // inside the unit cell: basis coefficients within [0, 1]
  Eigen::FullPivLU<MatrixXd> lu(lat.basis);
  for (const auto& c : curves)
    for (int k = 0; k < c.nodes.cols(); ++k) {
      VectorXd s = lu.solve(c.nodes.col(k));
      if ((s.array() < -1e-12).any() || (s.array() > 1.0 + 1e-12).any())
        fail(Errc::invalid_argument, "resonator boundary leaves the unit cell");
    }
  for (std::size_t a = 0; a < curves.size(); ++a)
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      double dmin = std::numeric_limits<double>::max();
      for (int i = 0; i < curves[a].nodes.cols(); ++i)
        for (int j = 0; j < curves[b].nodes.cols(); ++j)
          dmin = std::min(dmin, (curves[a].nodes.col(i) - curves[b].nodes.col(j)).norm());
      if (dmin < 1e-6) fail(Errc::invalid_argument, "resonator boundaries are not disjoint");
    }
}

ResonatorGeometry make_disks(const std::vector<Eigen::Vector2d>& centers,
                             const std::vector<double>& radii, int nodes_per_curve) {
  if (centers.size() != radii.size() || centers.empty())
    fail(Errc::invalid_argument, "make_disks: need matching nonempty centers and radii");
  ResonatorGeometry g;
  for (std::size_t i = 0; i < centers.size(); ++i)
    g.curves.push_back(circle_boundary(centers[i], radii[i], nodes_per_curve));
  return g;
}

}  // namespace floqep
