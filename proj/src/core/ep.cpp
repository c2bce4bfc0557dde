#include "core/ep.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace floqep {

namespace {

constexpr double kMembershipTol = 1e-10;
constexpr double kVanishTol = 1e-12;
constexpr double kPartnerTol = 1e-10;
constexpr double kCongruenceIntTol = 1e-8;
constexpr double kRealPartTol = 1e-10;
constexpr double kNonzeroFloor = 1e-10;
constexpr double kPairGapTol = 1e-12;
constexpr double kDefectThreshold = 1e-8;

double cscale(const EPParameters& p) {
  return std::max({std::abs(p.c11), std::abs(p.c22), std::abs(p.c33), std::abs(p.c12),
                   std::abs(p.c13), std::abs(p.c23), 1.0});
}

// scale of the characteristic cubic near lambda2
double cubic_scale(cplx x, const EPParameters& p) {
  const double k = p.epsilon / p.volume * cscale(p);
  const double ax = std::abs(x);
  return ax * ax * ax + 3 * k * ax * ax + 3 * k * k * ax + k * k * k;
}

cplx det_B0_closed(const EPParameters& p) {
  const double k = p.epsilon / p.volume;
  const cplx r = p.c12 * std::conj(p.c13) * p.c23 + std::conj(p.c12) * p.c13 * std::conj(p.c23);
  return k * k * k *
         (p.c11 * p.c22 * p.c33 - p.c11 * std::norm(p.c23) - p.c22 * std::norm(p.c13) -
          p.c33 * std::norm(p.c12) + r);
}

double delta3(const EPParameters& p) {
  // Cardano discriminant of the reduced cubic; negative <=> three distinct
  // real eigenvalues (the Hermitian case).
  const double P = std::norm(p.c12) + std::norm(p.c13) + std::norm(p.c23);
  const cplx rr = p.c12 * std::conj(p.c13) * p.c23 + std::conj(p.c12) * p.c13 * std::conj(p.c23);
  const double k = p.epsilon / p.volume;
  const double k6 = std::pow(k, 6);
  return k6 * (std::norm(rr) / 4.0 - P * P * P / 27.0);
}

void append(std::vector<ResidualEntry>& v, std::string name, double value, double tol,
            bool must_exceed = false, bool diagnostic = false) {
  ResidualEntry e;
  e.name = std::move(name);
  e.value = value;
  e.tolerance = tol;
  e.must_exceed = must_exceed;
  e.diagnostic = diagnostic;
  e.pass = diagnostic || (must_exceed ? value >= tol : value <= tol);
  v.push_back(e);
}

// Standing constraints f51-f54, f42 and the non-proportionality f52.
void standing_constraints(const EPParameters& p, std::vector<ResidualEntry>& out) {
  const double s = cscale(p);
  append(out, "simplification.c22", std::abs(p.c22 - p.c11), 1e-12 * s);
  append(out, "simplification.c33", std::abs(p.c33 - p.c11), 1e-12 * s);
  append(out, "c12.nonzero", std::abs(p.c12), kNonzeroFloor * s, true);
  const double k = p.epsilon / p.volume;
  append(out, "detB0.nonzero", std::abs(det_B0_closed(p)), kNonzeroFloor * std::pow(k * s, 3),
         true);
  append(out, "f53.nonzero", std::abs(p.c12 * p.c23 * p.c23 - std::conj(p.c12) * p.c13 * p.c13),
         kNonzeroFloor * s * s * s, true);
  append(out, "delta3.negative", delta3(p), -1e-14 * std::pow(k * s, 6) * 0.0, false);
  out.back().pass = delta3(p) < 0.0;
  out.back().tolerance = 0.0;

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(p.B0(), Eigen::EigenvaluesOnly);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double l2 = es.eigenvalues()[i];
    const cplx r1[3] = {k * p.c11 - l2, k * p.c12, k * p.c13};
    const cplx r2[3] = {k * std::conj(p.c12), k * p.c22 - l2, k * p.c23};
    double minor = 0.0;
    minor = std::max(minor, std::abs(r1[0] * r2[1] - r1[1] * r2[0]));
    minor = std::max(minor, std::abs(r1[0] * r2[2] - r1[2] * r2[0]));
    minor = std::max(minor, std::abs(r1[1] * r2[2] - r1[2] * r2[1]));
    worst = std::min(worst, minor);
  }
  append(out, "f52.nonproportional", worst, kNonzeroFloor * k * k * s * s, true);
}

}  // namespace

MatrixXcd EPParameters::B0() const {
  MatrixXcd b(3, 3);
  b << cplx(c11), c12, c13, std::conj(c12), cplx(c22), c23, std::conj(c13), std::conj(c23),
      cplx(c33);
  return epsilon / volume * b;
}

cplx EPParameters::xi1_coeff(int m) const {
  auto it = xi1.find(m);
  return it == xi1.end() ? cplx(0.0) : it->second;
}

ModulationProfile EPParameters::profile(double omega_mod) const {
  ModulationProfile pr = ModulationProfile::zero(3, 1, omega_mod, eta);
  for (const auto& [m, v] : xi1) {
    if (m == 0 && v != cplx(0.0))
      fail(Errc::invalid_argument, "xi_1 must have vanishing zero-frequency component");
    if (m != 0) pr.set_coeff(0, 0, m, v);
  }
  return pr;
}

cplx f_of(cplx lambda2, const EPParameters& p) {
  return p.c13 * p.volume * lambda2 + p.epsilon * (p.c12 * p.c23 - p.c11 * p.c13);
}

cplx g_of(cplx lambda2, const EPParameters& p) {
  const double V = p.volume, e = p.epsilon;
  return p.c23 * V * V * lambda2 * lambda2 +
         (-std::conj(p.c12) * p.c13 - 2.0 * p.c11 * p.c23) * V * e * lambda2 +
         e * e *
             (p.c11 * p.c11 * p.c23 + p.c11 * std::conj(p.c12) * p.c13 -
              p.c23 * (std::norm(p.c13) + std::norm(p.c23)));
}

cplx characteristic_residual(cplx x, const EPParameters& p) {
  const double k = p.epsilon / p.volume;
  const cplx s1 = k * (p.c11 + p.c22 + p.c33);
  const cplx s2 = k * k *
                  (-p.c11 * p.c22 - p.c11 * p.c33 - p.c22 * p.c33 + std::norm(p.c12) +
                   std::norm(p.c13) + std::norm(p.c23));
  const cplx s3 = det_B0_closed(p);
  return -x * x * x + s1 * x * x + s2 * x + s3;
}

std::pair<cplx, cplx> vieta_from_sums(cplx known, cplx sum, cplx prod) {
  if (std::abs(known) < 1e-300)
    fail(Errc::numerical, "vieta: cannot deflate at a zero eigenvalue");
  const cplx b = sum - known;   // y + z
  const cplx c = prod / known;  // y * z
  cplx disc = std::sqrt(b * b - 4.0 * c);
  if (std::real(std::conj(b) * disc) < 0.0) disc = -disc;
  const cplx y = 0.5 * (b + disc);
  const cplx z = (std::abs(y) > 0.0) ? c / y : 0.5 * (b - disc);
  return {y, z};
}

std::pair<cplx, cplx> vieta_complete(cplx known, const EPParameters& p) {
  if (std::abs(known) < 1e-300)
    fail(Errc::numerical, "vieta_complete: cannot deflate at a zero eigenvalue");
  const double scale = cubic_scale(known, p);
  if (std::abs(characteristic_residual(known, p)) > 1e-8 * scale)
    fail(Errc::numerical, "vieta_complete: the given value is not an eigenvalue of B0");
  const double k = p.epsilon / p.volume;
  return vieta_from_sums(known, k * (p.c11 + p.c22 + p.c33), det_B0_closed(p));
}

std::pair<cplx, cplx> complex_sqrt_branches(cplx z) {
  const double A = z.real(), B = z.imag();
  if (A != 0.0 && B != 0.0) {
    const double r = std::abs(z);
    const double sgn = (B > 0.0) ? 1.0 : -1.0;
    const cplx w(std::sqrt((r + A) / 2.0), sgn * std::sqrt((r - A) / 2.0));
    return {w, -w};
  }
  if (z.imag() == 0.0) z = cplx(z.real(), +0.0);
  const cplx w = std::sqrt(z);
  return {w, -w};
}

const ResidualEntry* EPCertificate::find(const std::string& name) const {
  for (const auto& r : residuals)
    if (r.name == name) return &r;
  return nullptr;
}

EPCertificate certify(const EPParameters& p, double omega_mod, int n) {
  if (omega_mod <= 0.0 || n < 1)
    fail(Errc::invalid_argument, "certify: need omega_mod > 0 and n >= 1");

  EPCertificate cert;
  cert.params = p;
  cert.omega_mod = omega_mod;
  cert.n = n;

  standing_constraints(p, cert.residuals);

  const ModulationProfile prof = p.profile(omega_mod);
  SystemAssembly sys;
  sys.dim = 3;
  sys.n_res = 1;
  sys.epsilon = p.epsilon;
  sys.omega_mod = omega_mod;
  sys.eta = p.eta;
  sys.B0 = p.B0();
  for (int m = -prof.m_max; m <= prof.m_max; ++m) {
    if (m == 0) continue;
    const cplx xm = prof.coeff(0, 0, m);
    if (xm == cplx(0.0)) continue;
    MatrixXcd Bm = MatrixXcd::Zero(3, 3);
    Bm.row(0) = xm * sys.B0.row(0);
    sys.B1[m] = std::move(Bm);
  }

  const TruncatedExponent te = truncated_exponents(sys);

  // Condition (1): a degenerate pair of F0 after folding.
  double best_gap = std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, int>> degenerate;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) {
      const double gap = std::abs(te.F0[i] - te.F0[j]);
      best_gap = std::min(best_gap, gap);
      if (gap < kPairGapTol) degenerate.emplace_back(i, j);
    }
  append(cert.residuals, "condition1.pair_gap", best_gap, kPairGapTol);

  // Condition (2): exactly one transformed off-diagonal coefficient vanishes.
  bool cond2 = false;
  int pi = -1, pj = -1;
  cplx van = 0.0, par = 0.0;
  for (auto [i, j] : degenerate) {
    const cplx wij = te.F1(i, j), wji = te.F1(j, i);
    const bool zij = std::abs(wij) < kVanishTol, zji = std::abs(wji) < kVanishTol;
    if (zij != zji && std::abs(zij ? wji : wij) >= kPartnerTol) {
      cond2 = true;
      if (zij) {
        pi = i; pj = j; van = wij; par = wji;
      } else {
        pi = j; pj = i; van = wji; par = wij;
      }
      break;
    }
  }
  if (!cond2 && !degenerate.empty()) {
    pi = degenerate.front().first;
    pj = degenerate.front().second;
    van = te.F1(pi, pj);
    par = te.F1(pj, pi);
    if (std::abs(van) > std::abs(par)) {
      std::swap(pi, pj);
      std::swap(van, par);
    }
  }
  cert.pair_i = pi;
  cert.pair_j = pj;
  cert.vanishing_coeff = van;
  cert.partner_coeff = par;
  append(cert.residuals, "condition2.vanishing", std::abs(van), kVanishTol);
  append(cert.residuals, "condition2.partner", std::abs(par), kPartnerTol, true);

  if (pi >= 0) {
    const int ni = static_cast<int>(te.folding[pi]), nj = static_cast<int>(te.folding[pj]);
    cert.k_star = nj - ni;
    cert.m_congruence = ni - nj;
    const cplx di = (pi < 3) ? te.lambda[pi] : -te.lambda[pi - 3];
    const cplx dj = (pj < 3) ? te.lambda[pj] : -te.lambda[pj - 3];
    cert.lambda1 = di;
    cert.lambda2 = dj;
    cert.congruence_residual =
        std::abs(di - dj - iu * static_cast<double>(cert.m_congruence) * omega_mod);
    append(cert.residuals, "congruence.residual", cert.congruence_residual,
           kCongruenceIntTol * omega_mod);
    append(cert.residuals, "xi1.k_star", std::abs(p.xi1_coeff(static_cast<int>(cert.k_star))),
           kNonzeroFloor, true);
  } else {
    append(cert.residuals, "congruence.residual", best_gap, kCongruenceIntTol * omega_mod);
    append(cert.residuals, "xi1.k_star", 0.0, kNonzeroFloor, true);
  }

  // Jordan diagnostics of F0 + eta F1.
  const MatrixXcd F = te.F_truncated(p.eta);
  const DiagonalizabilityReport rep = diagonalizability_report(F, kDefectThreshold);
  cert.defective = rep.defective;
  if (pi >= 0) {
    VectorXcd ev;
    {
      Eigen::ComplexEigenSolver<MatrixXcd> es(F, false);
      ev = es.eigenvalues();
    }
    const cplx target = te.F0[pi];
    std::vector<int> order(6);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(ev[a] - target) < std::abs(ev[b] - target); });
    cert.pair_eigengap = std::abs(ev[order[0]] - ev[order[1]]);
    for (const auto& cl : rep.classes)
      if (std::abs(cl.value - target) < 1e-6 * std::max(1.0, std::abs(target))) {
        cert.defect_smin = cl.smin;
        cert.defect_s2 = cl.s2;
      }
  }
  append(cert.residuals, "pair.eigengap", cert.pair_eigengap, kPairGapTol);
  ResidualEntry de;
  de.name = "F.defective";
  de.value = cert.defective ? 1.0 : 0.0;
  de.tolerance = 1.0;
  de.must_exceed = true;
  de.pass = cert.defective;
  cert.residuals.push_back(de);

  cert.valid = cert.defective;
  for (const auto& r : cert.residuals)
    if (!r.diagnostic && !r.pass) cert.valid = false;
  return cert;
}

namespace {

// Shared tail of the case constructions: branch selection, congruence,
// folding-derived Fourier index, then the standalone verifier.
EPCertificate finish_case(const EPParameters& p, int case_id, cplx lambda2_sq, cplx lambda1_sq,
                          EPBranch branch, int n) {
  auto [l2a, l2b] = complex_sqrt_branches(lambda2_sq);
  auto [l1a, l1b] = complex_sqrt_branches(lambda1_sq);
  const cplx lam2 = l2a;
  const cplx lam1 = (branch == EPBranch::difference) ? l1a : l1b;

  if (std::abs(lam1.real() - lam2.real()) > kRealPartTol)
    fail(Errc::certification,
         "no EP on this branch: exponent real parts differ by " +
             std::to_string(std::abs(lam1.real() - lam2.real())));
  const double imdiff = lam1.imag() - lam2.imag();
  if (std::abs(imdiff) < 1e-12)
    fail(Errc::certification, "no EP on this branch: coincident exponents leave Omega undefined");
  const double omega_mod = std::abs(imdiff) / static_cast<double>(n);

  const double ratio = imdiff / omega_mod;
  if (std::abs(ratio - std::round(ratio)) > kCongruenceIntTol)
    fail(Errc::certification, "no EP on this branch: non-integer congruence multiple");

  // Fourier index of the coefficient that must not vanish.
  auto [w1, n1] = fold_frequency(lam1.imag(), omega_mod);
  auto [w2, n2] = fold_frequency(lam2.imag(), omega_mod);
  if (std::abs(w1 - w2) > 1e-10 * omega_mod)
    fail(Errc::certification, "no EP on this branch: folded frequencies disagree");
  const long k_star = n2 - n1;
  if (std::abs(p.xi1_coeff(static_cast<int>(k_star))) == 0.0)
    fail(Errc::certification, "modulation insufficient: xi_1 lacks the required Fourier index " +
                                  std::to_string(k_star));

  EPCertificate cert = certify(p, omega_mod, n);
  cert.case_id = case_id;

  // Secondary diagnostics carried over from the worked examples.
  const double a = lambda1_sq.real();
  const double b = std::abs(lambda1_sq.imag());
  const double hyp = std::hypot(a, b);
  const double omega_formula = std::sqrt(std::max(0.0, (hyp - a) / 2.0)) / n;
  append(cert.residuals, "diag.omega_display", std::abs(omega_mod - omega_formula), 0.0, false,
         true);
  {
    const cplx lhs = (2.0 * p.c11 * p.c13 - 5.0 * p.c12 * p.c23) *
                     (2.0 * p.c11 * p.c13 - 5.0 * p.c12 * p.c23) / (4.0 * p.c13);
    const double Pq = std::norm(p.c12) + std::norm(p.c13) + std::norm(p.c23);
    const cplx Rq = p.c12 * std::conj(p.c13) * p.c23 + std::conj(p.c12) * p.c13 * std::conj(p.c23);
    const cplx rhs = (p.c11 * p.c11 * p.c11 - p.c11 * Pq + Rq) / (p.c11 * p.c13 - p.c12 * p.c23);
    append(cert.residuals, "diag.realpart_display", std::abs(lhs - rhs), 0.0, false, true);
  }
  cert.valid = cert.defective;
  for (const auto& r : cert.residuals)
    if (!r.diagnostic && !r.pass) cert.valid = false;
  return cert;
}

}  // namespace

EPCertificate case1_construct(const EPParameters& p, EPBranch branch, int n) {
  std::vector<ResidualEntry> standing;
  standing_constraints(p, standing);
  for (const auto& r : standing)
    if (!r.pass)
      fail(Errc::certification, "case 1: standing constraint violated: " + r.name);

  if (std::abs(p.c13) < kNonzeroFloor * cscale(p))
    fail(Errc::certification, "case 1 requires c13 != 0");

  const cplx lambda2_sq =
      p.epsilon * (p.c11 * p.c13 - p.c12 * p.c23) / (p.c13 * p.volume);
  const double memb = std::abs(characteristic_residual(lambda2_sq, p));
  if (memb > kMembershipTol * cubic_scale(lambda2_sq, p))
    fail(Errc::certification,
         "case 1: the f-root is not an eigenvalue of B0 (membership residual " +
             std::to_string(memb) + ")");

  // Excluded sign patterns from the worked examples: a real f-root with the
  // negative ratio has pure-imaginary square roots while its announced
  // partner pair would need a vanishing imaginary part.
  const cplx ratio = (p.c11 * p.c13 - p.c12 * p.c23) / p.c13;
  if (std::abs(ratio.imag()) < 1e-12 * cscale(p) && ratio.real() < 0.0 &&
      branch == EPBranch::difference)
    fail(Errc::certification,
         "case 1: excluded case, real f-root with negative sign pattern (see the remark on "
         "excluded configurations)");

  const double gs = std::abs(g_of(lambda2_sq, p));
  const double gscale = std::abs(p.c23) * p.volume * p.volume * std::norm(lambda2_sq) +
                        cscale(p) * p.volume * p.epsilon * std::abs(lambda2_sq) * 3.0 +
                        std::pow(p.epsilon * cscale(p), 2) * 3.0;
  if (gs < 1e-12 * std::max(gscale, 1e-30))
    fail(Errc::certification,
         "case 1: degenerate case, g vanishes at the f-root (g = " + std::to_string(gs) + ")");

  auto [y, z] = vieta_complete(lambda2_sq, p);
  // deterministic partner: the remaining eigenvalue further from lambda2^2
  const cplx lambda1_sq = (std::abs(y - lambda2_sq) >= std::abs(z - lambda2_sq)) ? y : z;
  return finish_case(p, 1, lambda2_sq, lambda1_sq, branch, n);
}

EPCertificate case2_construct(const EPParameters& p, int g_root_sign, EPBranch branch, int n) {
  std::vector<ResidualEntry> standing;
  standing_constraints(p, standing);
  for (const auto& r : standing)
    if (!r.pass)
      fail(Errc::certification, "case 2: standing constraint violated: " + r.name);

  if (std::abs(p.c23) < kNonzeroFloor * cscale(p))
    fail(Errc::certification,
         "case 2 is excluded for c23 = 0 (the g-root degenerates to the f-root)");

  const cplx zeta2 = std::conj(p.c12) * std::conj(p.c12) * p.c13 * p.c13 +
                     4.0 * std::norm(p.c13) * p.c23 * p.c23 +
                     4.0 * std::norm(p.c23) * p.c23 * p.c23;
  const cplx zeta = complex_sqrt_branches(zeta2).first;
  const double sgn = (g_root_sign >= 0) ? 1.0 : -1.0;
  const cplx lambda1_sq = p.epsilon / p.volume *
                          ((std::conj(p.c12) * p.c13 + 2.0 * p.c11 * p.c23) / (2.0 * p.c23) +
                           sgn * zeta / (2.0 * p.c23));

  const double memb = std::abs(characteristic_residual(lambda1_sq, p));
  if (memb > kMembershipTol * cubic_scale(lambda1_sq, p))
    fail(Errc::certification,
         "case 2: the g-root is not an eigenvalue of B0 (membership residual " +
             std::to_string(memb) + ")");

  const double fs = std::abs(f_of(lambda1_sq, p));
  const double fscale = std::abs(p.c13) * p.volume * std::abs(lambda1_sq) +
                        p.epsilon * cscale(p) * cscale(p) * 2.0;
  if (fs < 1e-12 * std::max(fscale, 1e-30))
    fail(Errc::certification,
         "case 2: degenerate case, f vanishes at the g-root (f = " + std::to_string(fs) + ")");

  auto [y, z] = vieta_complete(lambda1_sq, p);
  const cplx other_root = p.epsilon / p.volume *
                          ((std::conj(p.c12) * p.c13 + 2.0 * p.c11 * p.c23) / (2.0 * p.c23) -
                           sgn * zeta / (2.0 * p.c23));

  cplx lambda2_sq;
  const bool conjugate_pair =
      std::abs(lambda1_sq - std::conj(other_root)) < 1e-10 * std::max(1.0, std::abs(lambda1_sq)) &&
      std::abs(lambda1_sq.imag()) > 1e-12;
  if (conjugate_pair) {
    // Example-3 sub-case: pick the real remaining eigenvalue away from the
    // conjugate partner so that g does not vanish there.
    const bool y_real = std::abs(y.imag()) < 1e-10 * std::max(1.0, std::abs(y));
    const bool z_real = std::abs(z.imag()) < 1e-10 * std::max(1.0, std::abs(z));
    const double away_y = std::abs(y - other_root), away_z = std::abs(z - other_root);
    if (y_real && (!z_real || away_y >= away_z))
      lambda2_sq = y;
    else if (z_real)
      lambda2_sq = z;
    else
      fail(Errc::certification, "case 2: no real eigenvalue available for the conjugate sub-case");
  } else {
    lambda2_sq = (std::abs(y - other_root) >= std::abs(z - other_root)) ? y : z;
  }
  if (std::abs(g_of(lambda2_sq, p)) < 1e-12)
    fail(Errc::certification, "case 2: the selected partner is also a g-root");

  EPCertificate cert = finish_case(p, 2, lambda2_sq, lambda1_sq, branch, n);

  // Example-3 conjugacy conditions, recorded as residuals.
  append(cert.residuals, "example3.equal_real_parts",
         std::abs(p.c23.real() * zeta.real() - p.c23.imag() * zeta.imag()), 0.0, false, true);
  append(cert.residuals, "example3.opposite_imag",
         std::abs(std::imag((std::conj(p.c12) * p.c13 + 2.0 * p.c11 * p.c23) / (2.0 * p.c23))),
         0.0, false, true);
  append(cert.residuals, "example3.nonvanishing_imag",
         std::abs(p.c23.real() * zeta.imag() + p.c23.imag() * zeta.real()), 0.0, false, true);
  return cert;
}

EPCertificate construct_direct(EPParameters p, int n, EPBranch branch) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(p.B0(), Eigen::EigenvaluesOnly);
  const VectorXd lam2 = es.eigenvalues();
  std::vector<double> negs;
  for (int k = 0; k < 3; ++k)
    if (lam2[k] < 0.0) negs.push_back(lam2[k]);
  if (negs.size() < 2)
    fail(Errc::certification,
         "construct_direct: need at least two negative eigenvalues of B0 (oscillatory pair)");
  std::sort(negs.begin(), negs.end());
  const double wa = std::sqrt(-negs[0]), wb = std::sqrt(-negs[1]);  // wa > wb

  const double imdiff = (branch == EPBranch::difference) ? (wa - wb) : (wa + wb);
  if (imdiff < 1e-10)
    fail(Errc::certification, "construct_direct: degenerate frequencies on this branch");
  const double omega_mod = imdiff / static_cast<double>(n);

  // Guard against accidental extra foldings (the folded pair must stay away
  // from 0 and the zone edge, and the third mode must not join the cluster).
  auto [w0a, na] = fold_frequency(wa, omega_mod);
  const double margin = 1e-3 * omega_mod;
  if (std::abs(w0a) < margin || std::abs(std::abs(w0a) - omega_mod / 2) < margin)
    fail(Errc::certification, "construct_direct: folded pair too close to the zone edge; "
                              "choose a different n");
  const double lamb = (branch == EPBranch::difference) ? wb : -wb;
  auto [w0b, nb] = fold_frequency(lamb, omega_mod);
  if (std::abs(w0a - w0b) > 1e-12)
    fail(Errc::certification, "construct_direct: congruence lost after folding");
  const long k_star = nb - na;
  if (k_star == 0) fail(Errc::certification, "construct_direct: zero Fourier index");

  if (p.xi1.empty()) p.xi1[static_cast<int>(k_star)] = cplx(1.0, 0.0);
  if (std::abs(p.xi1_coeff(static_cast<int>(k_star))) == 0.0)
    fail(Errc::certification, "construct_direct: xi_1 lacks the required Fourier index");

  EPCertificate cert = certify(p, omega_mod, n);
  cert.case_id = 0;
  return cert;
}

std::vector<std::pair<double, double>> splitting_sweep(const EPCertificate& cert,
                                                       const std::vector<double>& taus) {
  const ModulationProfile prof = cert.params.profile(cert.omega_mod);
  SystemAssembly sys;
  sys.dim = 3;
  sys.n_res = 1;
  sys.epsilon = cert.params.epsilon;
  sys.omega_mod = cert.omega_mod;
  sys.eta = cert.params.eta;
  sys.B0 = cert.params.B0();
  for (int m = -prof.m_max; m <= prof.m_max; ++m) {
    if (m == 0) continue;
    const cplx xm = prof.coeff(0, 0, m);
    if (xm == cplx(0.0)) continue;
    MatrixXcd Bm = MatrixXcd::Zero(3, 3);
    Bm.row(0) = xm * sys.B0.row(0);
    sys.B1[m] = std::move(Bm);
  }
  const TruncatedExponent te = truncated_exponents(sys);
  const cplx target = te.F0[cert.pair_i];

  std::vector<std::pair<double, double>> rows;
  rows.reserve(taus.size());
  for (double tau : taus) {
    MatrixXcd F1 = te.F1;
    F1(cert.pair_i, cert.pair_j) = tau;
    MatrixXcd F = F1 * cert.params.eta;
    F.diagonal() += te.F0;
    Eigen::ComplexEigenSolver<MatrixXcd> es(F, false);
    VectorXcd ev = es.eigenvalues();
    std::vector<int> order(ev.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(ev[a] - target) < std::abs(ev[b] - target); });
    rows.emplace_back(tau, std::abs(ev[order[0]] - ev[order[1]]));
  }
  return rows;
}

Appendix2DReport appendix_2d_check(double c11, double c22, cplx c12) {
  Appendix2DReport r;
  const double p = std::norm(c12);
  r.varsigma = std::sqrt((c11 - c22) * (c11 - c22) + 4.0 * p);
  r.phi_plus = 2.0 * p + c11 * (c11 - c22 + r.varsigma);
  r.phi_minus = 2.0 * p + c11 * (c11 - c22 - r.varsigma);
  r.det_proxy = p - c11 * c22;
  const double lhs = r.phi_plus * r.phi_minus;
  const double rhs = 4.0 * p * (p - c11 * c22);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
  r.product_identity_residual = std::abs(lhs - rhs) / scale;
  // both factors vanish only on |c12|^2 = c11 c22; a single vanishing factor
  // would force the product, hence the det proxy, to zero as well
  r.ep_possible = std::abs(c12) > 0.0 && std::abs(r.det_proxy) > 0.0 &&
                  (r.phi_plus == 0.0 || r.phi_minus == 0.0);
  return r;
}

std::string EPCertificate::to_text() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "floqep-ep-certificate v1\n";
  os << "case " << case_id << "\n";
  os << "valid " << (valid ? 1 : 0) << "\n";
  os << "omega_mod " << omega_mod << "\n";
  os << "n " << n << "\n";
  os << "k_star " << k_star << "\n";
  os << "eta " << params.eta << "\n";
  os << "epsilon " << params.epsilon << "\n";
  os << "volume " << params.volume << "\n";
  os << "c11 " << params.c11 << "\nc22 " << params.c22 << "\nc33 " << params.c33 << "\n";
  os << "c12 " << params.c12.real() << " " << params.c12.imag() << "\n";
  os << "c13 " << params.c13.real() << " " << params.c13.imag() << "\n";
  os << "c23 " << params.c23.real() << " " << params.c23.imag() << "\n";
  os << "xi1";
  for (const auto& [m, v] : params.xi1) os << " " << m << ":" << v.real() << ":" << v.imag();
  os << "\n";
  os << "lambda1 " << lambda1.real() << " " << lambda1.imag() << "\n";
  os << "lambda2 " << lambda2.real() << " " << lambda2.imag() << "\n";
  os << "pair " << pair_i << " " << pair_j << "\n";
  os << "congruence_m " << m_congruence << "\n";
  os << "congruence_residual " << congruence_residual << "\n";
  os << "vanishing_coeff " << vanishing_coeff.real() << " " << vanishing_coeff.imag() << "\n";
  os << "partner_coeff " << partner_coeff.real() << " " << partner_coeff.imag() << "\n";
  os << "pair_eigengap " << pair_eigengap << "\n";
  os << "defect_smin " << defect_smin << "\n";
  os << "defect_s2 " << defect_s2 << "\n";
  os << "defective " << (defective ? 1 : 0) << "\n";
  os << "residuals " << residuals.size() << "\n";
  for (const auto& r : residuals)
    os << "  " << r.name << " value " << r.value << " tol " << r.tolerance << " "
       << (r.diagnostic ? "diagnostic" : (r.must_exceed ? "min" : "max")) << " "
       << (r.pass ? "pass" : "FAIL") << "\n";
  return os.str();
}

SearchOutcome search_case(const SearchOptions& opt) {
  SearchOutcome out;
  EPParameters base;
  base.c13 = opt.c13;
  base.c23 = opt.c23;
  base.epsilon = opt.epsilon;
  base.volume = opt.volume;
  base.eta = opt.eta;

  const double k = opt.epsilon / opt.volume;

  auto f_root = [&](const EPParameters& p) {
    return p.epsilon * (p.c11 * p.c13 - p.c12 * p.c23) / (p.c13 * p.volume);
  };
  auto g_root = [&](const EPParameters& p) {
    const cplx zeta2 = std::conj(p.c12) * std::conj(p.c12) * p.c13 * p.c13 +
                       4.0 * std::norm(p.c13) * p.c23 * p.c23 +
                       4.0 * std::norm(p.c23) * p.c23 * p.c23;
    const cplx zeta = complex_sqrt_branches(zeta2).first;
    const double sgn = (opt.g_root_sign >= 0) ? 1.0 : -1.0;
    return p.epsilon / p.volume *
           ((std::conj(p.c12) * p.c13 + 2.0 * p.c11 * p.c23) / (2.0 * p.c23) +
            sgn * zeta / (2.0 * p.c23));
  };
  auto membership = [&](cplx c12, double c11) -> cplx {
    EPParameters p = base;
    p.c12 = c12;
    p.c11 = p.c22 = p.c33 = c11;
    const cplx root = (opt.case_id == 1) ? f_root(p) : g_root(p);
    return characteristic_residual(root, p);
  };

  // Damped Newton on the membership residual over c12 (c11 held fixed; the
  // residual is c11-free for case 1 and verified c11-free for case 2).
  const double c11_probe = 0.5 * (opt.c11_lo + opt.c11_hi);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  std::vector<cplx> roots;
  for (int s = 0; s < opt.newton_starts; ++s) {
    cplx c12(box(rng), box(rng));
    bool ok = false;
    for (int it = 0; it < 200; ++it) {
      const cplx F = membership(c12, c11_probe);
      EPParameters probe = base;
      probe.c12 = c12;
      probe.c11 = probe.c22 = probe.c33 = c11_probe;
      const cplx root_here = (opt.case_id == 1) ? f_root(probe) : g_root(probe);
      const double scale = cubic_scale(root_here, probe) + 1.0;
      if (std::abs(F) < 1e-14 * scale) {
        ok = true;
        break;
      }
      const double h = 1e-7 * std::max(1.0, std::abs(c12));
      const cplx Fx = (membership(c12 + h, c11_probe) - membership(c12 - h, c11_probe)) / (2 * h);
      const cplx Fy =
          (membership(c12 + iu * h, c11_probe) - membership(c12 - iu * h, c11_probe)) / (2 * h);
      // solve the real 2x2 system J * d = -F with J columns (Fx, Fy)
      Eigen::Matrix2d J;
      J << Fx.real(), Fy.real(), Fx.imag(), Fy.imag();
      Eigen::Vector2d rhs(-F.real(), -F.imag());
      Eigen::Vector2d dlt = J.fullPivLu().solve(rhs);
      if (!dlt.allFinite()) break;
      double t = 1.0;
      const double f0 = std::abs(F);
      while (t > 1e-8 && std::abs(membership(c12 + t * cplx(dlt[0], dlt[1]), c11_probe)) >= f0)
        t *= 0.5;
      c12 += t * cplx(dlt[0], dlt[1]);
    }
    if (!ok || std::abs(c12) < 1e-6) continue;
    bool dup = false;
    for (const cplx& r : roots)
      if (std::abs(r - c12) < 1e-8) dup = true;
    if (!dup) roots.push_back(c12);
  }

  if (roots.empty()) {
    out.blocking_reason = "membership search: no nonzero Newton root for c12";
    return out;
  }

  std::string last_error;
  for (const cplx& c12 : roots) {
    EPParameters p = base;
    p.c12 = c12;

    // Spectrum shifts rigidly with c11; locate the admissibility boundary of
    // the real-part matching residual by bisection, then step inside it.
    auto pair_state = [&](double c11) {
      p.c11 = p.c22 = p.c33 = c11;
      const cplx root = (opt.case_id == 1) ? f_root(p) : g_root(p);
      auto [y, z] = vieta_complete(root, p);
      const cplx partner = (std::abs(y - root) >= std::abs(z - root)) ? y : z;
      return std::pair<double, double>(root.real(), partner.real());
    };
    auto mismatch = [&](double c11) {
      auto [a, b] = pair_state(c11);
      return std::max(a, b);  // <= 0 means both squared eigenvalues negative
    };

    double lo = opt.c11_lo, hi = opt.c11_hi;
    if (mismatch(lo) > 0.0) {
      last_error = "membership root found, but no c11 in range yields an oscillatory pair";
      continue;
    }
    if (mismatch(hi) > 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mismatch(mid) <= 0.0 ? lo : hi) = mid;
      }
    } else {
      lo = hi;
    }
    const double spread = std::abs(lo) + 1.0;
    const double c11 = lo - 0.25 * spread;  // safely inside the admissible region
    p.c11 = p.c22 = p.c33 = c11;

    const cplx root = (opt.case_id == 1) ? f_root(p) : g_root(p);
    out.c12_root = c12;
    out.membership_residual = std::abs(characteristic_residual(root, p));

    // Candidate congruence data for the report, regardless of which error the
    // construction raises.
    auto [y, z] = vieta_complete(root, p);
    const cplx partner = (std::abs(y - root) >= std::abs(z - root)) ? y : z;
    const double wr = std::sqrt(std::max(1e-300, -root.real()));
    const double wp = std::sqrt(std::max(1e-300, -partner.real()));
    const double imdiff = (opt.branch == EPBranch::difference) ? std::abs(wr - wp) : (wr + wp);
    const double omega_mod = imdiff / opt.n;

    auto [w0r, nr] = fold_frequency(wr, omega_mod);
    auto [w0p, np] = fold_frequency((opt.branch == EPBranch::difference) ? wp : -wp, omega_mod);
    const int k_star = static_cast<int>(nr - np);
    p.xi1.clear();
    if (k_star != 0) {
      p.xi1[k_star] = cplx(0.5 * opt.xi_amplitude, 0.0);
      if (!opt.one_sided_modulation) p.xi1[-k_star] = cplx(0.5 * opt.xi_amplitude, 0.0);
    }

    out.best_candidate = certify(p, omega_mod, opt.n);
    out.best_candidate.case_id = opt.case_id;

    try {
      EPCertificate cert = (opt.case_id == 1)
                               ? case1_construct(p, opt.branch, opt.n)
                               : case2_construct(p, opt.g_root_sign, opt.branch, opt.n);
      if (cert.valid) {
        out.certificate = std::move(cert);
        out.blocking_reason.clear();
        return out;
      }
      last_error = "construction returned an invalid certificate";
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  out.blocking_reason = last_error.empty() ? "no admissible candidate" : last_error;
  return out;
}

}  // namespace floqep
