#ifndef FLOQEP_CORE_EP_HPP
#define FLOQEP_CORE_EP_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/floquet.hpp"

namespace floqep {

/// Parameters of the 3D single-resonator system: B0 = (eps/|D|) times the
/// Hermitian matrix with diagonal (c11, c22, c33) and upper triangle
/// (c12, c13, c23). Modulation acts on the first row only (xi_2 = xi_3 = 0).
struct EPParameters {
  double c11 = 0.0, c22 = 0.0, c33 = 0.0;
  cplx c12, c13, c23;
  double epsilon = 1.0;
  double volume = 1.0;
  double eta = 1e-2;
  std::map<int, cplx> xi1;  // Fourier coefficients of xi_1 (m != 0)

  MatrixXcd B0() const;
  ModulationProfile profile(double omega_mod) const;
  cplx xi1_coeff(int m) const;
};

// Matrix-element factors of the transformed first-order perturbation.
cplx f_of(cplx lambda2, const EPParameters& p);
cplx g_of(cplx lambda2, const EPParameters& p);

/// det(B0 - lambda2 I3) via the explicit cubic (c11 = c22 = c33 form).
cplx characteristic_residual(cplx lambda2, const EPParameters& p);

/// Remaining two squared eigenvalues from Vieta's relations given one root.
std::pair<cplx, cplx> vieta_complete(cplx lambda2_known, const EPParameters& p);

/// Deflation from the symmetric functions alone (no membership check):
/// x^2 - (sum - known) x + prod / known = 0.
std::pair<cplx, cplx> vieta_from_sums(cplx known, cplx sum, cplx prod);

/// Both square roots; the sgn(Im) radical formula off the axes, principal
/// sqrt on them.
std::pair<cplx, cplx> complex_sqrt_branches(cplx z);

struct ResidualEntry {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool must_exceed = false;  // pass means value >= tolerance instead of <=
  bool diagnostic = false;   // recorded, never gates validity
  bool pass = true;
};

enum class EPBranch {
  difference,  // Omega from |omega_i - omega_j| / n
  sum,         // Omega from (omega_i + omega_j) / n
};

struct EPCertificate {
  EPParameters params;
  int case_id = 0;  // 1, 2, or 0 for a theorem-direct certificate
  double omega_mod = 0.0;
  int n = 0;
  long k_star = 0;          // Fourier index whose coefficient must not vanish
  cplx lambda1, lambda2;    // chosen square-root branches of the pair
  int pair_i = 0, pair_j = 0;  // positions in the 6x6 truncated exponent
  long m_congruence = 0;
  double congruence_residual = 0.0;
  cplx vanishing_coeff, partner_coeff;
  bool defective = false;
  double pair_eigengap = 0.0;
  double defect_smin = 0.0, defect_s2 = 0.0;
  std::vector<ResidualEntry> residuals;
  bool valid = false;

  std::string to_text() const;
  const ResidualEntry* find(const std::string& name) const;
};

/// Standalone verifier of the EP theorem's two conditions plus the Jordan
/// diagnostics of F0 + eta F1. Never throws on a failed condition; the
/// certificate carries pass/fail per entry.
EPCertificate certify(const EPParameters& p, double omega_mod, int n);

/// Case-specific constructions (f-root route and g-root route). Throw the
/// spec'd errors when a precondition fails.
EPCertificate case1_construct(const EPParameters& p, EPBranch branch, int n);
EPCertificate case2_construct(const EPParameters& p, int g_root_sign, EPBranch branch, int n);

struct SearchOptions {
  int case_id = 1;
  cplx c13{1.0, 0.0}, c23{2.0, 0.0};
  double epsilon = 0.1;
  double volume = 1.0;
  double eta = 1e-2;
  int n = 1;
  EPBranch branch = EPBranch::difference;
  int g_root_sign = +1;       // case 2: which quadratic root
  double c11_lo = -40.0, c11_hi = 10.0;
  int newton_starts = 12;
  std::uint64_t seed = 1;
  double xi_amplitude = 1.0;
  bool one_sided_modulation = false;  // populate only xi^(k*), not xi^(-k*)
};

struct SearchOutcome {
  std::optional<EPCertificate> certificate;  // present when certification succeeded
  EPCertificate best_candidate;              // always filled with the closest attempt
  std::string blocking_reason;               // empty on success
  cplx c12_root;
  double membership_residual = 0.0;
};

/// Damped-Newton membership search (fixed c13, c23, eps, |D|; c12 solved,
/// then the remaining real parameter c11 moved by scan + bisection).
SearchOutcome search_case(const SearchOptions& opt);

/// Theorem-direct certificate on a congruent pair, with the one-sided
/// vanishing supplied by the modulation spectrum.
EPCertificate construct_direct(EPParameters p, int n, EPBranch branch);

/// Splitting of the certified pair when the vanishing transformed
/// coefficient is replaced by tau; returns (tau, |split|) rows.
std::vector<std::pair<double, double>> splitting_sweep(const EPCertificate& cert,
                                                       const std::vector<double>& taus);

struct Appendix2DReport {
  double varsigma = 0.0;
  double phi_plus = 0.0, phi_minus = 0.0;
  double det_proxy = 0.0;               // |c12|^2 - c11 c22
  double product_identity_residual = 0.0;  // relative
  bool ep_possible = false;
};

/// Appendix obstruction for a 2D single resonator: both coupling factors are
/// nonzero whenever |c12|^2 != c11 c22 and c12 != 0.
Appendix2DReport appendix_2d_check(double c11, double c22, cplx c12);

}  // namespace floqep

#endif
