#include "floqep.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <string>

#include "core/capacitance.hpp"
#include "core/config.hpp"
#include "core/ep.hpp"
#include "core/floquet.hpp"
#include "core/geometry.hpp"
#include "core/green.hpp"
#include "core/lattice.hpp"
#include "core/modulation.hpp"
#include "core/runner.hpp"

using namespace floqep;

namespace {

thread_local std::string g_last_error;

floqep_status status_of(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return FLOQEP_ERR_INVALID_ARGUMENT;
    case Errc::config: return FLOQEP_ERR_CONFIG;
    case Errc::numerical: return FLOQEP_ERR_NUMERICAL;
    case Errc::certification: return FLOQEP_ERR_CERTIFICATION;
    case Errc::io: return FLOQEP_ERR_IO;
  }
  return FLOQEP_ERR_NUMERICAL;
}

template <typename Fn>
floqep_status guarded(Fn&& fn) {
  try {
    fn();
    return FLOQEP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FLOQEP_ERR_NUMERICAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FLOQEP_ERR_NUMERICAL;
  }
}

void copy_matrix(const MatrixXcd& m, double* re, double* im) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      re[i * m.cols() + j] = m(i, j).real();
      im[i * m.cols() + j] = m(i, j).imag();
    }
}

VectorXd vec_of(const double* p, int n) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = p[i];
  return v;
}

nlohmann::json apply_overrides(nlohmann::json j, int64_t seed_override,
                               const char* tol_overrides) {
  if (seed_override >= 0) j["seed"] = static_cast<std::uint64_t>(seed_override);
  if (tol_overrides && *tol_overrides) {
    std::string s(tol_overrides);
    std::size_t pos = 0;
    while (pos < s.size()) {
      const std::size_t comma = s.find(',', pos);
      const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                        : comma - pos);
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos) fail(Errc::config, "bad tolerance override: " + item);
      j["tolerances"][item.substr(0, eq)] = std::stod(item.substr(eq + 1));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  return j;
}

}  // namespace

struct floqep_lattice_s {
  Lattice lat;
};
struct floqep_capacitance_s {
  CapacitanceTensor tensor;
  VectorXd volumes;  // areas of the 2D geometry when computed, else empty
};
struct floqep_certificate_s {
  EPCertificate cert;
};

extern "C" {

const char* floqep_version(void) { return version(); }
const char* floqep_last_error(void) { return g_last_error.c_str(); }

floqep_status floqep_lattice_create(int dim, const double* basis, floqep_lattice** out) {
  return guarded([&] {
    if (!basis || !out) fail(Errc::invalid_argument, "null pointer");
    MatrixXd b(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) b(r, c) = basis[r * dim + c];
    *out = new floqep_lattice_s{Lattice::from_basis(b)};
  });
}

void floqep_lattice_destroy(floqep_lattice* lat) { delete lat; }

floqep_status floqep_lattice_dual_basis(const floqep_lattice* lat, double* dual) {
  return guarded([&] {
    if (!lat || !dual) fail(Errc::invalid_argument, "null pointer");
    const int d = lat->lat.dim;
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) dual[r * d + c] = lat->lat.dual(r, c);
  });
}

floqep_status floqep_lattice_cell_volume(const floqep_lattice* lat, double* volume) {
  return guarded([&] {
    if (!lat || !volume) fail(Errc::invalid_argument, "null pointer");
    *volume = lat->lat.cell_volume;
  });
}

floqep_status floqep_lattice_canonicalize(const floqep_lattice* lat, const double* alpha,
                                          double* alpha_reduced) {
  return guarded([&] {
    if (!lat || !alpha || !alpha_reduced) fail(Errc::invalid_argument, "null pointer");
    const VectorXd r = canonicalize_quasimomentum(vec_of(alpha, lat->lat.dim), lat->lat);
    for (int i = 0; i < lat->lat.dim; ++i) alpha_reduced[i] = r[i];
  });
}

floqep_status floqep_lattice_dual_shell_count(const floqep_lattice* lat, const double* alpha,
                                              double q_max, int64_t* count) {
  return guarded([&] {
    if (!lat || !alpha || !count) fail(Errc::invalid_argument, "null pointer");
    *count = static_cast<int64_t>(dual_shell(lat->lat, vec_of(alpha, lat->lat.dim), q_max).size());
  });
}

floqep_status floqep_green_static(const floqep_lattice* lat, double lambda, double mu,
                                  const double* alpha, const double* x, const double* y,
                                  double q_max, double* re, double* im) {
  return guarded([&] {
    if (!lat || !alpha || !x || !y || !re || !im) fail(Errc::invalid_argument, "null pointer");
    const int d = lat->lat.dim;
    const GreenEval g = green_static(lat->lat, {lambda, mu}, vec_of(alpha, d), vec_of(x, d),
                                     vec_of(y, d), q_max);
    copy_matrix(g.value, re, im);
  });
}

floqep_status floqep_green_full(const floqep_lattice* lat, double lambda, double mu,
                                const double* theta, double omega, const double* alpha,
                                const double* x, const double* y, double q_max, double* re,
                                double* im) {
  return guarded([&] {
    if (!lat || !theta || !alpha || !x || !y || !re || !im)
      fail(Errc::invalid_argument, "null pointer");
    const int d = lat->lat.dim;
    const GreenEval g = green_full(lat->lat, {lambda, mu}, vec_of(theta, d), omega,
                                   vec_of(alpha, d), vec_of(x, d), vec_of(y, d), q_max);
    copy_matrix(g.value, re, im);
  });
}

floqep_status floqep_green_correction1(const floqep_lattice* lat, double lambda, double mu,
                                       const double* theta, const double* alpha, const double* x,
                                       const double* y, double q_max, double* re, double* im) {
  return guarded([&] {
    if (!lat || !theta || !alpha || !x || !y || !re || !im)
      fail(Errc::invalid_argument, "null pointer");
    const int d = lat->lat.dim;
    const GreenEval g = green_correction1(lat->lat, {lambda, mu}, vec_of(theta, d),
                                          vec_of(alpha, d), vec_of(x, d), vec_of(y, d), q_max);
    copy_matrix(g.value, re, im);
  });
}

floqep_status floqep_capacitance_compute_disks(const floqep_lattice* lat, double lambda,
                                               double mu, const double* alpha,
                                               const double* centers, const double* radii,
                                               int n_disks, int nodes_per_boundary, double q_max,
                                               floqep_capacitance** out) {
  return guarded([&] {
    if (!lat || !alpha || !centers || !radii || !out) fail(Errc::invalid_argument, "null pointer");
    std::vector<Eigen::Vector2d> c;
    std::vector<double> r;
    for (int i = 0; i < n_disks; ++i) {
      c.emplace_back(centers[2 * i], centers[2 * i + 1]);
      r.push_back(radii[i]);
    }
    const ResonatorGeometry geom = make_disks(c, r, nodes_per_boundary);
    const LayerOperatorMatrix layer =
        assemble_single_layer(lat->lat, {lambda, mu}, geom, vec_of(alpha, 2), q_max);
    *out = new floqep_capacitance_s{capacitance_tensor(layer, geom), geom.volumes()};
  });
}

floqep_status floqep_capacitance_load(const char* path, floqep_capacitance** out) {
  return guarded([&] {
    if (!path || !out) fail(Errc::invalid_argument, "null pointer");
    *out = new floqep_capacitance_s{load_capacitance_file(path), VectorXd()};
  });
}

floqep_status floqep_capacitance_save(const floqep_capacitance* cap, const char* path) {
  return guarded([&] {
    if (!cap || !path) fail(Errc::invalid_argument, "null pointer");
    save_capacitance_file(cap->tensor, path);
  });
}

void floqep_capacitance_destroy(floqep_capacitance* cap) { delete cap; }

floqep_status floqep_capacitance_dims(const floqep_capacitance* cap, int* dim, int* n_res) {
  return guarded([&] {
    if (!cap || !dim || !n_res) fail(Errc::invalid_argument, "null pointer");
    *dim = cap->tensor.dim;
    *n_res = cap->tensor.n_res;
  });
}

floqep_status floqep_capacitance_entries(const floqep_capacitance* cap, double* re, double* im) {
  return guarded([&] {
    if (!cap || !re || !im) fail(Errc::invalid_argument, "null pointer");
    copy_matrix(cap->tensor.entries, re, im);
  });
}

floqep_status floqep_capacitance_symmetry_residual(const floqep_capacitance* cap,
                                                   double* residual) {
  return guarded([&] {
    if (!cap || !residual) fail(Errc::invalid_argument, "null pointer");
    *residual = cap->tensor.symmetry_residual();
  });
}

floqep_status floqep_static_spectrum(const floqep_capacitance* cap, const double* rho,
                                     const double* volumes, double epsilon, double* xi_re,
                                     double* xi_im, double* omega_re, double* omega_im) {
  return guarded([&] {
    if (!cap || !xi_re || !xi_im || !omega_re || !omega_im)
      fail(Errc::invalid_argument, "null pointer");
    const int d = cap->tensor.dim, n = cap->tensor.n_res;
    const VectorXd rv = rho ? vec_of(rho, d) : VectorXd::Ones(d);
    VectorXd vv;
    if (volumes)
      vv = vec_of(volumes, n);
    else if (cap->volumes.size() == n)
      vv = cap->volumes;
    else
      vv = VectorXd::Ones(n);
    const StaticSpectrum sp = static_spectrum(cap->tensor, rv, vv, epsilon);
    for (int k = 0; k < d * n; ++k) {
      xi_re[k] = sp.xi[k].real();
      xi_im[k] = sp.xi[k].imag();
      omega_re[k] = sp.omega[k].real();
      omega_im[k] = sp.omega[k].imag();
    }
  });
}

floqep_status floqep_floquet_unmodulated(const floqep_capacitance* cap, const double* rho,
                                         const double* volumes, double epsilon, double omega_mod,
                                         double tol, double* exp_re, double* exp_im) {
  return guarded([&] {
    if (!cap || !exp_re || !exp_im) fail(Errc::invalid_argument, "null pointer");
    const int d = cap->tensor.dim, n = cap->tensor.n_res;
    const VectorXd rv = rho ? vec_of(rho, d) : VectorXd::Ones(d);
    VectorXd vv;
    if (volumes)
      vv = vec_of(volumes, n);
    else if (cap->volumes.size() == n)
      vv = cap->volumes;
    else
      vv = VectorXd::Ones(n);
    const ModulationProfile prof = ModulationProfile::zero(d, n, omega_mod);
    const SystemAssembly sys = assemble_system(cap->tensor, rv, vv, epsilon, prof);
    const Monodromy mono = integrate_monodromy([&](double t) { return sys.A_at(t); }, 2 * d * n,
                                               sys.period(), tol > 0 ? tol : 1e-10);
    const FloquetExponents fe = floquet_exponents(mono);
    for (int k = 0; k < 2 * d * n; ++k) {
      exp_re[k] = fe.exponents[k].real();
      exp_im[k] = fe.exponents[k].imag();
    }
  });
}

floqep_status floqep_ep_certify(const double* params12, const double* xi1_triples, int n_coeffs,
                                double omega_mod, int n, floqep_certificate** out) {
  return guarded([&] {
    if (!params12 || !out) fail(Errc::invalid_argument, "null pointer");
    EPParameters p;
    p.c11 = params12[0];
    p.c22 = params12[1];
    p.c33 = params12[2];
    p.c12 = cplx(params12[3], params12[4]);
    p.c13 = cplx(params12[5], params12[6]);
    p.c23 = cplx(params12[7], params12[8]);
    p.epsilon = params12[9];
    p.volume = params12[10];
    p.eta = params12[11];
    for (int k = 0; k < n_coeffs; ++k)
      p.xi1[static_cast<int>(xi1_triples[3 * k])] =
          cplx(xi1_triples[3 * k + 1], xi1_triples[3 * k + 2]);
    *out = new floqep_certificate_s{certify(p, omega_mod, n)};
  });
}

floqep_status floqep_ep_search(const char* options_json, uint64_t seed, floqep_certificate** out) {
  return guarded([&] {
    if (!options_json || !out) fail(Errc::invalid_argument, "null pointer");
    nlohmann::json j = nlohmann::json::parse(options_json);
    nlohmann::json cfgj;
    cfgj["experiment"] = "ep-construct";
    cfgj["seed"] = seed;
    cfgj["ep"] = j;
    const ExperimentConfig cfg = ExperimentConfig::parse(cfgj.dump());
    const RunResult r = run_experiment(cfg, 1);
    // re-run the underlying search to recover the structured certificate
    SearchOptions opt;
    opt.case_id = j.at("case").get<int>();
    if (j.contains("c13")) opt.c13 = cplx(j["c13"].at(0).get<double>(), j["c13"].at(1).get<double>());
    if (j.contains("c23")) opt.c23 = cplx(j["c23"].at(0).get<double>(), j["c23"].at(1).get<double>());
    opt.epsilon = j.value("epsilon", 0.1);
    opt.volume = j.value("volume", 1.0);
    opt.eta = j.value("eta", 1e-2);
    opt.n = j.value("n", 1);
    opt.seed = seed;
    const SearchOutcome so = search_case(opt);
    *out = new floqep_certificate_s{so.certificate ? *so.certificate : so.best_candidate};
    if (!so.certificate)
      fail(Errc::certification, "search produced no valid certificate: " + so.blocking_reason);
    (void)r;
  });
}

floqep_status floqep_certificate_valid(const floqep_certificate* cert, int* valid) {
  return guarded([&] {
    if (!cert || !valid) fail(Errc::invalid_argument, "null pointer");
    *valid = cert->cert.valid ? 1 : 0;
  });
}

floqep_status floqep_certificate_defective(const floqep_certificate* cert, int* defective) {
  return guarded([&] {
    if (!cert || !defective) fail(Errc::invalid_argument, "null pointer");
    *defective = cert->cert.defective ? 1 : 0;
  });
}

floqep_status floqep_certificate_omega(const floqep_certificate* cert, double* omega_mod) {
  return guarded([&] {
    if (!cert || !omega_mod) fail(Errc::invalid_argument, "null pointer");
    *omega_mod = cert->cert.omega_mod;
  });
}

floqep_status floqep_certificate_text(const floqep_certificate* cert, char* buf, size_t cap,
                                      size_t* needed) {
  return guarded([&] {
    if (!cert) fail(Errc::invalid_argument, "null pointer");
    const std::string text = cert->cert.to_text();
    if (needed) *needed = text.size();
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

void floqep_certificate_destroy(floqep_certificate* cert) { delete cert; }

floqep_status floqep_appendix2d_check(double c11, double c22, double c12_re, double c12_im,
                                      double* phi_plus, double* phi_minus,
                                      double* identity_residual, int* ep_possible) {
  return guarded([&] {
    const Appendix2DReport r = appendix_2d_check(c11, c22, cplx(c12_re, c12_im));
    if (phi_plus) *phi_plus = r.phi_plus;
    if (phi_minus) *phi_minus = r.phi_minus;
    if (identity_residual) *identity_residual = r.product_identity_residual;
    if (ep_possible) *ep_possible = r.ep_possible ? 1 : 0;
  });
}

static void run_config_json(nlohmann::json j, const char* out_dir, int workers,
                            int64_t seed_override, const char* tol_overrides) {
  if (!out_dir) fail(Errc::invalid_argument, "null output directory");
  j = apply_overrides(std::move(j), seed_override, tol_overrides);
  const ExperimentConfig cfg = ExperimentConfig::parse(j.dump());
  const RunResult r = run_experiment(cfg, workers > 0 ? workers : 1);
  write_results(r, cfg, out_dir);
  if (r.certification_failed) fail(Errc::certification, "certification failed");
}

floqep_status floqep_run_experiment(const char* config_path, const char* out_dir, int workers,
                                    int64_t seed_override, const char* tol_overrides) {
  return guarded([&] {
    if (!config_path) fail(Errc::invalid_argument, "null config path");
    std::ifstream f(config_path);
    if (!f) fail(Errc::io, std::string("cannot open config: ") + config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      fail(Errc::config, std::string("config parse error: ") + e.what());
    }
    run_config_json(std::move(j), out_dir, workers, seed_override, tol_overrides);
  });
}

floqep_status floqep_run_experiment_json(const char* config_json, const char* out_dir,
                                         int workers, int64_t seed_override,
                                         const char* tol_overrides) {
  return guarded([&] {
    if (!config_json) fail(Errc::invalid_argument, "null config text");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      fail(Errc::config, std::string("config parse error: ") + e.what());
    }
    run_config_json(std::move(j), out_dir, workers, seed_override, tol_overrides);
  });
}

}  // extern "C"
