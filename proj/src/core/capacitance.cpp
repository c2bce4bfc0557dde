#include "core/capacitance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace floqep {

namespace {

constexpr double kCondLimit = 1e12;
constexpr double kLoadSymmetryTol = 1e-10;

}  // namespace

LayerOperatorMatrix assemble_single_layer(const Lattice& lat, const BackgroundMedium& med,
                                          const ResonatorGeometry& geom, const VectorXd& alpha,
                                          double q_max) {
  if (lat.dim != 2) fail(Errc::invalid_argument, "assemble_single_layer: 2D lattices only");
  med.validate(2);
  if (alpha.size() != 2 || alpha.norm() == 0.0)
    fail(Errc::invalid_argument, "assemble_single_layer: alpha must be a nonzero 2-vector");
  geom.validate(lat);

  const int d = 2;
  const int n_nodes = geom.total_nodes();
  LayerOperatorMatrix out;
  out.alpha = alpha;
  out.q_max = q_max;
  out.n_nodes = n_nodes;

  out.weights.resize(n_nodes);
  Eigen::Matrix2Xd nodes(2, n_nodes);
  int at = 0;
  for (const auto& c : geom.curves) {
    const int nc = static_cast<int>(c.nodes.cols());
    out.node_ranges.emplace_back(at, at + nc);
    nodes.middleCols(at, nc) = c.nodes;
    out.weights.segment(at, nc) = c.weights;
    at += nc;
  }

  const auto shell = dual_shell(lat, alpha, q_max);
  const auto n_modes = static_cast<int>(shell.size());
  if (n_modes < n_nodes)
    fail(Errc::numerical,
         "assemble_single_layer: truncation too coarse for the node count (" +
             std::to_string(n_modes) + " modes < " + std::to_string(n_nodes) +
             " nodes); raise q_max or lower the resolution");

  // G_ab(x,y) = (1/|Y|) sum_q f_ab(q+alpha) e^{i(q+alpha).(x-y)}; assembled as
  // V^H diag(f_ab) V with V(q,k) = e^{-i(q+alpha).x_k}.
  MatrixXcd V(n_modes, n_nodes);
  for (int q = 0; q < n_modes; ++q)
    for (int k = 0; k < n_nodes; ++k) {
      const double arg = shell[q].p[0] * nodes(0, k) + shell[q].p[1] * nodes(1, k);
      V(q, k) = std::polar(1.0, -arg);
    }

  const double mu = med.mu, lm = med.lambda + med.mu, l2m = med.lambda + 2.0 * med.mu;
  MatrixXcd M(d * n_nodes, d * n_nodes);
  VectorXd f(n_modes);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      for (int q = 0; q < n_modes; ++q) {
        const double P = shell[q].norm * shell[q].norm;
        if (P <= 0.0) fail(Errc::numerical, "assemble_single_layer: alpha lies on the dual lattice");
        double v = lm / (mu * l2m) * shell[q].p[a] * shell[q].p[b] / (P * P);
        if (a == b) v -= 1.0 / (mu * P);
        f[q] = v;
      }
      MatrixXcd blk = V.adjoint() * f.asDiagonal() * V / lat.cell_volume;
      for (int k = 0; k < n_nodes; ++k)
        for (int l = 0; l < n_nodes; ++l) {
          M(k * d + a, l * d + b) = blk(k, l);
          if (a != b) M(k * d + b, l * d + a) = blk(k, l);
        }
    }
  M = ((M + M.adjoint()) * 0.5).eval();  // kernel symmetry, exact

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  const VectorXd ev = es.eigenvalues().cwiseAbs();
  const double emin = ev.minCoeff(), emax = ev.maxCoeff();
  const double wmin = out.weights.minCoeff(), wmax = out.weights.maxCoeff();
  out.cond_estimate = (emin > 0.0) ? (emax / emin) * (wmax / wmin) : std::numeric_limits<double>::infinity();
  if (!std::isfinite(out.cond_estimate) || out.cond_estimate > kCondLimit)
    fail(Errc::numerical, "assemble_single_layer: near-singular layer matrix (condition estimate " +
                              std::to_string(out.cond_estimate) + ")");

  VectorXd wrep(d * n_nodes);
  for (int k = 0; k < n_nodes; ++k)
    for (int a = 0; a < d; ++a) wrep[k * d + a] = out.weights[k];
  out.matrix = M * wrep.asDiagonal();
  out.kernel = std::move(M);
  return out;
}

CapacitanceTensor capacitance_tensor(const LayerOperatorMatrix& layer,
                                     const ResonatorGeometry& geom) {
  const int d = 2;
  const int n_res = geom.n_resonators();
  const int dn = d * n_res;
  const int rows = static_cast<int>(layer.kernel.rows());

  // Right-hand sides: coordinate indicator traces e_s chi_{curve j}.
  MatrixXd B = MatrixXd::Zero(rows, dn);
  for (int j = 0; j < n_res; ++j) {
    const auto [b, e] = layer.node_ranges[j];
    for (int k = b; k < e; ++k)
      for (int s = 0; s < d; ++s) B(k * d + s, j * d + s) = 1.0;
  }

  Eigen::PartialPivLU<MatrixXcd> lu(layer.kernel);
  MatrixXcd Y = lu.solve(B.cast<cplx>());
  if (!Y.allFinite()) fail(Errc::numerical, "capacitance_tensor: singular layer operator");

  CapacitanceTensor c;
  c.dim = d;
  c.n_res = n_res;
  c.alpha = layer.alpha;
  c.entries = B.transpose().cast<cplx>() * Y;
  return c;
}

double CapacitanceTensor::symmetry_residual() const {
  const double scale = entries.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff() / scale;
}

void save_capacitance(const CapacitanceTensor& c, std::ostream& out) {
  out << "floqep-capacitance v1\n";
  out << "dimension " << c.dim << "\n";
  out << "resonators " << c.n_res << "\n";
  out << std::setprecision(17);
  if (c.alpha.size() > 0) {
    out << "alpha";
    for (int i = 0; i < c.alpha.size(); ++i) out << " " << c.alpha[i];
    out << "\n";
  } else {
    out << "alpha none\n";
  }
  out << "entries\n";
  const int n = c.dim * c.n_res;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out << c.entries(i, j).real() << " " << c.entries(i, j).imag() << "\n";
}

void save_capacitance_file(const CapacitanceTensor& c, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(Errc::io, "cannot open for writing: " + path);
  save_capacitance(c, f);
  if (!f.good()) fail(Errc::io, "write failed: " + path);
}

CapacitanceTensor load_capacitance(std::istream& in) {
  std::string tag, ver;
  in >> tag >> ver;
  if (tag != "floqep-capacitance" || ver != "v1")
    fail(Errc::io, "capacitance file: unrecognized header");
  CapacitanceTensor c;
  std::string key;
  in >> key >> c.dim;
  if (key != "dimension" || (c.dim != 2 && c.dim != 3))
    fail(Errc::io, "capacitance file: bad dimension");
  in >> key >> c.n_res;
  if (key != "resonators" || c.n_res < 1) fail(Errc::io, "capacitance file: bad resonator count");
  in >> key;
  if (key != "alpha") fail(Errc::io, "capacitance file: expected alpha");
  std::string first;
  in >> first;
  if (first != "none") {
    c.alpha.resize(c.dim);
    c.alpha[0] = std::stod(first);
    for (int i = 1; i < c.dim; ++i) in >> c.alpha[i];
  }
  in >> key;
  if (key != "entries") fail(Errc::io, "capacitance file: expected entries");
  const int n = c.dim * c.n_res;
  c.entries.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double re, im;
      if (!(in >> re >> im)) fail(Errc::io, "capacitance file: truncated entries");
      c.entries(i, j) = cplx(re, im);
    }

  // Reject tensors violating the symmetry lemma, naming the worst entry.
  const double scale = std::max(1e-300, c.entries.cwiseAbs().maxCoeff());
  double worst = 0.0;
  int wi = 0, wj = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double r = std::abs(c.entries(i, j) - std::conj(c.entries(j, i))) / scale;
      if (r > worst) {
        worst = r;
        wi = i;
        wj = j;
      }
    }
  if (worst > kLoadSymmetryTol) {
    std::ostringstream os;
    os << "invalid capacitance data: symmetry violation " << worst << " at (i=" << wi / c.dim + 1
       << ", j=" << wj / c.dim + 1 << ", s=" << wj % c.dim + 1 << ", s'=" << wi % c.dim + 1 << ")";
    fail(Errc::invalid_argument, os.str());
  }
  return c;
}

CapacitanceTensor load_capacitance_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(Errc::io, "cannot open: " + path);
  return load_capacitance(f);
}

StaticSpectrum static_spectrum(const CapacitanceTensor& c, const VectorXd& rho,
                               const VectorXd& volumes, double epsilon) {
  const int d = c.dim, n = c.n_res, dn = d * n;
  if (rho.size() != d || (rho.array() <= 0.0).any())
    fail(Errc::invalid_argument, "static_spectrum: rho must be a positive d-vector");
  if (volumes.size() != n || (volumes.array() <= 0.0).any())
    fail(Errc::invalid_argument, "static_spectrum: volumes must be positive");

  MatrixXcd H(dn, dn);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int sp = 0; sp < d; ++sp)
        for (int s = 0; s < d; ++s)
          H(i * d + sp, j * d + s) = c.entries(i * d + sp, j * d + s) / (volumes[i] * rho[sp]);

  Eigen::ComplexEigenSolver<MatrixXcd> es(H, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) fail(Errc::numerical, "static_spectrum: eigensolver failed");

  StaticSpectrum out;
  out.epsilon = epsilon;
  out.xi = es.eigenvalues();
  out.omega.resize(dn);
  for (int k = 0; k < dn; ++k) {
    cplx z = -epsilon * out.xi[k];
    if (z.imag() == 0.0) z = cplx(z.real(), +0.0);  // pin the branch for negative reals
    cplx w = std::sqrt(z);                          // principal: Re >= 0
    if (w.real() == 0.0 && w.imag() < 0.0) w = -w;  // pure-imaginary tie: Im >= 0
    out.omega[k] = w;
  }
  std::vector<int> idx(dn);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (out.omega[a].real() != out.omega[b].real()) return out.omega[a].real() < out.omega[b].real();
    return out.omega[a].imag() < out.omega[b].imag();
  });
  VectorXcd xi2(dn), om2(dn);
  for (int k = 0; k < dn; ++k) {
    xi2[k] = out.xi[idx[k]];
    om2[k] = out.omega[idx[k]];
  }
  out.xi = xi2;
  out.omega = om2;
  return out;
}

}  // namespace floqep
