#ifndef FLOQEP_CORE_CAPACITANCE_HPP
#define FLOQEP_CORE_CAPACITANCE_HPP

#include <iosfwd>
#include <utility>
#include <vector>

#include "core/common.hpp"
#include "core/geometry.hpp"
#include "core/green.hpp"

namespace floqep {

/// Nystrom discretization of the static single-layer operator on the
/// resonator boundaries. The matrix maps density values at the nodes
/// (interleaved per node: index = node*d + component) to potential values.
struct LayerOperatorMatrix {
  MatrixXcd matrix;    // A = M * W
  MatrixXcd kernel;    // M: Hermitian kernel-value matrix
  VectorXd weights;    // per-node arclength weights (replicated over components in W)
  std::vector<std::pair<int, int>> node_ranges;  // [begin, end) node index per curve
  VectorXd alpha;
  double q_max = 0.0;
  int n_nodes = 0;
  double cond_estimate = 0.0;
};

LayerOperatorMatrix assemble_single_layer(const Lattice& lat, const BackgroundMedium& med,
                                          const ResonatorGeometry& geom, const VectorXd& alpha,
                                          double q_max);

/// Capacitance data C^{alpha,s,s'}_{ij}, stored as a dN x dN matrix with
/// entries(i*d + s', j*d + s) = C^{alpha,s,s'}_{ij}. The symmetry lemma makes
/// this matrix Hermitian.
struct CapacitanceTensor {
  int dim = 0;
  int n_res = 0;
  MatrixXcd entries;
  VectorXd alpha;  // empty for externally supplied data

  cplx entry(int i, int j, int s, int sp) const { return entries(i * dim + sp, j * dim + s); }
  double symmetry_residual() const;  // max |C - C^H| / max |C|
};

CapacitanceTensor capacitance_tensor(const LayerOperatorMatrix& layer,
                                     const ResonatorGeometry& geom);

/// Parses the documented capacitance text format; rejects tensors whose
/// symmetry residual exceeds 1e-10, naming the worst entry.
CapacitanceTensor load_capacitance(std::istream& in);
CapacitanceTensor load_capacitance_file(const std::string& path);
void save_capacitance(const CapacitanceTensor& c, std::ostream& out);
void save_capacitance_file(const CapacitanceTensor& c, const std::string& path);

struct StaticSpectrum {
  VectorXcd xi;     // eigenvalues of H, sorted with omega
  VectorXcd omega;  // sqrt(-eps xi), principal branch, sorted by (Re, Im)
  double epsilon = 0.0;
};

StaticSpectrum static_spectrum(const CapacitanceTensor& c, const VectorXd& rho,
                               const VectorXd& volumes, double epsilon);

}  // namespace floqep

#endif
