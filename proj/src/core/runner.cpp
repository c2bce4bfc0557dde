#include "core/runner.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "core/capacitance.hpp"
#include "core/ep.hpp"
#include "core/floquet.hpp"
#include "core/geometry.hpp"
#include "core/green.hpp"
#include "core/lattice.hpp"
#include "core/modulation.hpp"

namespace floqep {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

using nlohmann::json;

VectorXd vec_from(const json& j) {
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

cplx cplx_from(const json& j) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  return cplx(j.at(0).get<double>(), j.at(1).get<double>());
}

Lattice lattice_from(const json& j) {
  const int d = j.at("dimension").get<int>();
  const auto& b = j.at("basis");
  MatrixXd basis(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) basis(r, c) = b.at(c).at(r).get<double>();
  return Lattice::from_basis(basis);
}

BackgroundMedium medium_from(const json& j) {
  BackgroundMedium m;
  m.lambda = j.at("lambda").get<double>();
  m.mu = j.at("mu").get<double>();
  return m;
}

double tol_of(const ExperimentConfig& cfg, const char* key, double dflt) {
  if (cfg.has("tolerances") && cfg.raw["tolerances"].contains(key))
    return cfg.raw["tolerances"][key].get<double>();
  return dflt;
}

struct CapSource {
  CapacitanceTensor tensor;
  VectorXd volumes;
};

CapSource capacitance_from(const ExperimentConfig& cfg) {
  const auto& cap = cfg.section("capacitance");
  CapSource out;
  if (cap.contains("file")) {
    out.tensor = load_capacitance_file(cap["file"].get<std::string>());
    if (cfg.section("contrast").contains("volumes"))
      out.volumes = vec_from(cfg.raw["contrast"]["volumes"]);
    else
      out.volumes = VectorXd::Ones(out.tensor.n_res);
    return out;
  }
  const auto& c2d = cap.at("computed2d");
  const Lattice lat = lattice_from(cfg.section("lattice"));
  const BackgroundMedium med = medium_from(cfg.section("medium"));
  const VectorXd alpha = vec_from(cfg.section("alpha"));
  std::vector<Eigen::Vector2d> centers;
  std::vector<double> radii;
  for (const auto& d : c2d.at("disks")) {
    centers.emplace_back(d.at("center").at(0).get<double>(), d.at("center").at(1).get<double>());
    radii.push_back(d.at("radius").get<double>());
  }
  const int nodes = c2d.value("nodes", 64);
  const double q_max = c2d.value("q_max", 20.0 * pi);
  const ResonatorGeometry geom = make_disks(centers, radii, nodes);
  const LayerOperatorMatrix layer = assemble_single_layer(lat, med, geom, alpha, q_max);
  out.tensor = capacitance_tensor(layer, geom);
  out.volumes = geom.volumes();
  return out;
}

VectorXd rho_from(const ExperimentConfig& cfg, int dim) {
  if (cfg.section("contrast").contains("rho")) return vec_from(cfg.raw["contrast"]["rho"]);
  return VectorXd::Ones(dim);
}

ModulationProfile modulation_from(const json& j, int dim, int n_res) {
  ModulationProfile p = ModulationProfile::zero(dim, n_res, j.at("omega").get<double>(),
                                                j.value("eta", 0.0));
  p.real_modulation = j.value("real", false);
  if (j.contains("coefficients"))
    for (const auto& c : j["coefficients"])
      p.set_coeff(c.at("resonator").get<int>(), c.at("direction").get<int>(), c.at("m").get<int>(),
                  cplx(c.value("re", 0.0), c.value("im", 0.0)));
  p.validate();
  return p;
}

std::vector<double> sweep_points(const json& j) {
  const double from = j.at("from").get<double>(), to = j.at("to").get<double>();
  const int n = j.at("samples").get<int>();
  const bool logsp = j.value("log", false);
  std::vector<double> pts(n);
  for (int i = 0; i < n; ++i) {
    const double t = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
    pts[i] = logsp ? from * std::pow(to / from, t) : from + (to - from) * t;
  }
  return pts;
}

// greedy nearest-neighbour pairing of the current exponent set to the
// previous sweep point, to keep branches from swapping mid-sweep
std::vector<int> continuation_order(const VectorXcd& prev, const VectorXcd& cur) {
  const int n = static_cast<int>(cur.size());
  std::vector<int> order(n, -1);
  std::vector<bool> used(n, false);
  for (int i = 0; i < n; ++i) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(prev[i] - cur[j]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    order[i] = best;
    used[best] = true;
  }
  return order;
}

RunResult run_static_spectrum(const ExperimentConfig& cfg) {
  CapSource src = capacitance_from(cfg);
  const double eps = cfg.section("contrast").at("epsilon").get<double>();
  const VectorXd rho = rho_from(cfg, src.tensor.dim);
  const StaticSpectrum sp = static_spectrum(src.tensor, rho, src.volumes, eps);

  ResultTable t({{"index", ResultTable::ColType::integer},
                 {"xi", ResultTable::ColType::cplx},
                 {"omega", ResultTable::ColType::cplx}});
  for (int k = 0; k < sp.xi.size(); ++k)
    t.add_row({cplx(k), sp.xi[k], sp.omega[k]});
  RunResult r;
  r.tables.emplace_back("spectrum", std::move(t));
  return r;
}

RunResult run_band(const ExperimentConfig& cfg, int workers) {
  const auto& band = cfg.section("band");
  const Lattice lat = lattice_from(cfg.section("lattice"));
  const BackgroundMedium med = medium_from(cfg.section("medium"));
  const double eps = cfg.section("contrast").at("epsilon").get<double>();
  const auto& c2d = cfg.section("capacitance").at("computed2d");
  std::vector<Eigen::Vector2d> centers;
  std::vector<double> radii;
  for (const auto& d : c2d.at("disks")) {
    centers.emplace_back(d.at("center").at(0).get<double>(), d.at("center").at(1).get<double>());
    radii.push_back(d.at("radius").get<double>());
  }
  const int nodes = c2d.value("nodes", 64);
  const double q_max = c2d.value("q_max", 20.0 * pi);
  const ResonatorGeometry geom = make_disks(centers, radii, nodes);
  const VectorXd rho = rho_from(cfg, 2);

  // uniform samples along the polyline of alpha vertices
  std::vector<VectorXd> verts;
  for (const auto& v : band.at("path")) verts.push_back(vec_from(v));
  const int samples = band.at("samples").get<int>();
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < verts.size(); ++s) total += (verts[s + 1] - verts[s]).norm();
  std::vector<VectorXd> alphas(samples);
  std::vector<double> params(samples);
  for (int i = 0; i < samples; ++i) {
    double want = total * i / (samples - 1);
    params[i] = want;
    VectorXd a = verts.back();
    for (std::size_t s = 0; s + 1 < verts.size(); ++s) {
      const double seg = (verts[s + 1] - verts[s]).norm();
      if (want <= seg || s + 2 == verts.size()) {
        a = verts[s] + (verts[s + 1] - verts[s]) * std::clamp(want / seg, 0.0, 1.0);
        break;
      }
      want -= seg;
    }
    alphas[i] = a;
  }

  const int dn = 2 * geom.n_resonators();
  std::vector<std::vector<cplx>> rows(samples);
  parallel_for(samples, workers, [&](int i) {
    const LayerOperatorMatrix layer = assemble_single_layer(lat, med, geom, alphas[i], q_max);
    const CapacitanceTensor ct = capacitance_tensor(layer, geom);
    const StaticSpectrum sp = static_spectrum(ct, rho, geom.volumes(), eps);
    std::vector<cplx> row{cplx(params[i]), cplx(alphas[i][0]), cplx(alphas[i][1])};
    for (int k = 0; k < dn; ++k) row.push_back(sp.omega[k]);
    rows[i] = std::move(row);
  });

  std::vector<ResultTable::Column> cols{{"s", ResultTable::ColType::real},
                                        {"alpha_1", ResultTable::ColType::real},
                                        {"alpha_2", ResultTable::ColType::real}};
  for (int k = 0; k < dn; ++k)
    cols.push_back({"omega_" + std::to_string(k + 1), ResultTable::ColType::cplx});
  ResultTable t(cols);
  for (auto& row : rows) t.add_row(std::move(row));
  RunResult r;
  r.tables.emplace_back("band", std::move(t));
  return r;
}

RunResult run_floquet(const ExperimentConfig& cfg, int workers) {
  CapSource src = capacitance_from(cfg);
  const double eps = cfg.section("contrast").at("epsilon").get<double>();
  const VectorXd rho = rho_from(cfg, src.tensor.dim);
  const ModulationProfile base_prof =
      modulation_from(cfg.section("modulation"), src.tensor.dim, src.tensor.n_res);
  const double tol = tol_of(cfg, "integrator", 1e-10);

  const auto& swp = cfg.section("sweep");
  const std::string param = swp.value("parameter", "eta");
  if (param != "eta") fail(Errc::config, "floquet sweep supports parameter 'eta' only");
  const std::vector<double> pts = sweep_points(swp);

  const int n2 = 2 * src.tensor.dim * src.tensor.n_res;
  std::vector<VectorXcd> raw_exp(pts.size());
  std::vector<double> gaps(pts.size()), conds(pts.size());
  parallel_for(static_cast<int>(pts.size()), workers, [&](int i) {
    ModulationProfile prof = base_prof;
    prof.eta = pts[i];
    const SystemAssembly sys = assemble_system(src.tensor, rho, src.volumes, eps, prof);
    const Monodromy mono = integrate_monodromy([&](double t) { return sys.A_at(t); }, n2,
                                               sys.period(), tol);
    const FloquetExponents fe = floquet_exponents(mono);
    raw_exp[i] = fe.exponents;
    double g = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n2; ++a)
      for (int b = a + 1; b < n2; ++b) g = std::min(g, std::abs(fe.exponents[a] - fe.exponents[b]));
    gaps[i] = g;
    Eigen::JacobiSVD<MatrixXcd> svd(fe.V_T);
    conds[i] = svd.singularValues().maxCoeff() / svd.singularValues().minCoeff();
  });

  std::vector<ResultTable::Column> cols{{"eta", ResultTable::ColType::real}};
  for (int k = 0; k < n2; ++k)
    cols.push_back({"phi_" + std::to_string(k + 1), ResultTable::ColType::cplx});
  cols.push_back({"eigengap", ResultTable::ColType::real});
  cols.push_back({"eigvec_condition", ResultTable::ColType::real});
  ResultTable t(cols);

  VectorXcd prev;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    VectorXcd cur = raw_exp[i];
    if (i > 0) {
      const auto order = continuation_order(prev, cur);
      VectorXcd re(cur.size());
      for (int k = 0; k < cur.size(); ++k) re[k] = cur[order[k]];
      cur = re;
    }
    prev = cur;
    std::vector<cplx> row{cplx(pts[i])};
    for (int k = 0; k < n2; ++k) row.push_back(cur[k]);
    row.push_back(cplx(gaps[i]));
    row.push_back(cplx(conds[i]));
    t.add_row(std::move(row));
  }
  RunResult r;
  r.tables.emplace_back("floquet", std::move(t));
  return r;
}

EPParameters ep_params_from(const json& j) {
  EPParameters p;
  p.c11 = j.at("c11").get<double>();
  p.c22 = j.value("c22", p.c11);
  p.c33 = j.value("c33", p.c11);
  p.c12 = cplx_from(j.at("c12"));
  p.c13 = cplx_from(j.at("c13"));
  p.c23 = cplx_from(j.at("c23"));
  p.epsilon = j.value("epsilon", 1.0);
  p.volume = j.value("volume", 1.0);
  p.eta = j.value("eta", 1e-2);
  if (j.contains("xi1"))
    for (const auto& c : j["xi1"])
      p.xi1[c.at("m").get<int>()] = cplx(c.value("re", 0.0), c.value("im", 0.0));
  return p;
}

ResultTable residual_table(const EPCertificate& cert) {
  ResultTable t({{"name", ResultTable::ColType::integer},
                 {"value", ResultTable::ColType::real},
                 {"tolerance", ResultTable::ColType::real},
                 {"pass", ResultTable::ColType::integer}});
  // names are carried in the certificate document; rows are indexed
  for (std::size_t k = 0; k < cert.residuals.size(); ++k) {
    const auto& e = cert.residuals[k];
    t.add_row({cplx(static_cast<double>(k)), cplx(e.value), cplx(e.tolerance),
               cplx(e.pass ? 1.0 : 0.0)});
  }
  return t;
}

ResultTable splitting_table(const EPCertificate& cert, const json& taus_spec) {
  std::vector<double> taus = sweep_points(taus_spec);
  ResultTable t({{"tau", ResultTable::ColType::real},
                 {"splitting", ResultTable::ColType::real}});
  for (auto [tau, split] : splitting_sweep(cert, taus)) t.add_row({cplx(tau), cplx(split)});
  return t;
}

RunResult run_ep_construct(const ExperimentConfig& cfg) {
  const auto& j = cfg.section("ep");
  SearchOptions opt;
  opt.case_id = j.at("case").get<int>();
  if (j.contains("c13")) opt.c13 = cplx_from(j["c13"]);
  if (j.contains("c23")) opt.c23 = cplx_from(j["c23"]);
  opt.epsilon = j.value("epsilon", 0.1);
  opt.volume = j.value("volume", 1.0);
  opt.eta = j.value("eta", 1e-2);
  opt.n = j.value("n", 1);
  opt.branch = (j.value("branch", "difference") == "sum") ? EPBranch::sum : EPBranch::difference;
  opt.g_root_sign = j.value("g_root_sign", 1);
  if (j.contains("c11_range")) {
    opt.c11_lo = j["c11_range"].at(0).get<double>();
    opt.c11_hi = j["c11_range"].at(1).get<double>();
  }
  opt.newton_starts = j.value("newton_starts", 12);
  opt.seed = cfg.seed;
  opt.one_sided_modulation = j.value("one_sided", false);

  const SearchOutcome outcome = search_case(opt);
  RunResult r;
  const EPCertificate& cert =
      outcome.certificate ? *outcome.certificate : outcome.best_candidate;
  std::ostringstream doc;
  doc << cert.to_text();
  if (!outcome.blocking_reason.empty()) doc << "blocking_reason " << outcome.blocking_reason << "\n";
  r.documents.emplace_back("certificate", doc.str());
  r.tables.emplace_back("residuals", residual_table(cert));
  if (j.contains("taus") && cert.pair_i >= 0)
    r.tables.emplace_back("splitting", splitting_table(cert, j["taus"]));
  r.certification_failed = !outcome.certificate.has_value();
  return r;
}

RunResult run_ep_verify(const ExperimentConfig& cfg) {
  const auto& j = cfg.section("ep");
  const EPParameters p = ep_params_from(j.at("params"));
  const EPCertificate cert = certify(p, j.at("omega").get<double>(), j.at("n").get<int>());
  RunResult r;
  r.documents.emplace_back("certificate", cert.to_text());
  r.tables.emplace_back("residuals", residual_table(cert));
  if (j.contains("taus") && cert.pair_i >= 0)
    r.tables.emplace_back("splitting", splitting_table(cert, j["taus"]));
  r.certification_failed = !cert.valid;
  return r;
}

RunResult run_appendix2d(const ExperimentConfig& cfg) {
  const auto& j = cfg.section("appendix2d");
  const int draws = j.at("draws").get<int>();
  const double range = j.value("range", 5.0);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-range, range);
  std::uniform_real_distribution<double> ur(0.0, range);
  std::uniform_real_distribution<double> uphi(0.0, 2.0 * pi);

  ResultTable t({{"draw", ResultTable::ColType::integer},
                 {"c11", ResultTable::ColType::real},
                 {"c22", ResultTable::ColType::real},
                 {"c12", ResultTable::ColType::cplx},
                 {"varsigma", ResultTable::ColType::real},
                 {"phi_plus", ResultTable::ColType::real},
                 {"phi_minus", ResultTable::ColType::real},
                 {"identity_residual", ResultTable::ColType::real},
                 {"candidate", ResultTable::ColType::integer}});
  int candidates = 0;
  double worst = 0.0;
  for (int i = 0; i < draws; ++i) {
    double c11, c22;
    cplx c12;
    for (;;) {  // reject draws on the excluded det(B0)=0 boundary
      c11 = u(rng);
      c22 = u(rng);
      c12 = std::polar(ur(rng), uphi(rng));
      if (std::abs(c12) > 1e-6 && std::abs(std::norm(c12) - c11 * c22) > 1e-6) break;
    }
    const Appendix2DReport rep = appendix_2d_check(c11, c22, c12);
    candidates += rep.ep_possible ? 1 : 0;
    worst = std::max(worst, rep.product_identity_residual);
    t.add_row({cplx(static_cast<double>(i)), cplx(c11), cplx(c22), c12, cplx(rep.varsigma),
               cplx(rep.phi_plus), cplx(rep.phi_minus), cplx(rep.product_identity_residual),
               cplx(rep.ep_possible ? 1.0 : 0.0)});
  }
  RunResult r;
  r.tables.emplace_back("draws", std::move(t));
  std::ostringstream doc;
  doc << "draws " << draws << "\n"
      << "ep_candidates " << candidates << "\n"
      << "max_identity_residual " << format_g17(worst) << "\n";
  r.documents.emplace_back("summary", doc.str());
  return r;
}

RunResult run_green_validate(const ExperimentConfig& cfg, int workers) {
  const Lattice lat = lattice_from(cfg.section("lattice"));
  const BackgroundMedium med = medium_from(cfg.section("medium"));
  const VectorXd alpha = vec_from(cfg.section("alpha"));
  const auto& g = cfg.section("green");
  const VectorXd theta = vec_from(g.at("theta"));
  const VectorXd x = vec_from(g.at("x"));
  const VectorXd y = g.contains("y") ? vec_from(g["y"]) : VectorXd::Zero(lat.dim);
  const double q_max = g.value("q_max", 20.0 * pi);
  const std::vector<double> omegas = sweep_points(g.at("omegas"));

  const GreenEval g0 = green_static(lat, med, alpha, x, y, q_max);
  const GreenEval g1 = green_correction1(lat, med, theta, alpha, x, y, q_max);

  std::vector<double> rnorm(omegas.size());
  parallel_for(static_cast<int>(omegas.size()), workers, [&](int i) {
    const GreenEval gf = green_full(lat, med, theta, omegas[i], alpha, x, y, q_max);
    rnorm[i] = (gf.value - g0.value - omegas[i] * omegas[i] * g1.value).norm();
  });

  ResultTable t({{"omega", ResultTable::ColType::real},
                 {"remainder_norm", ResultTable::ColType::real}});
  for (std::size_t i = 0; i < omegas.size(); ++i)
    t.add_row({cplx(omegas[i]), cplx(rnorm[i])});

  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const double lx = std::log(omegas[i]), ly = std::log(std::max(rnorm[i], 1e-300));
    sx += lx;
    sy += ly;
    sxy += lx * ly;
    sxx += lx * lx;
  }
  const double n = static_cast<double>(omegas.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  RunResult r;
  r.tables.emplace_back("remainder", std::move(t));
  std::ostringstream doc;
  doc << "slope " << format_g17(slope) << "\n";
  r.documents.emplace_back("fit", doc.str());
  return r;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, int workers) {
  switch (cfg.kind) {
    case ExperimentKind::static_spectrum:
      return run_static_spectrum(cfg);
    case ExperimentKind::band:
      return run_band(cfg, workers);
    case ExperimentKind::floquet:
      return run_floquet(cfg, workers);
    case ExperimentKind::ep_construct:
      return run_ep_construct(cfg);
    case ExperimentKind::ep_verify:
      return run_ep_verify(cfg);
    case ExperimentKind::appendix2d:
      return run_appendix2d(cfg);
    case ExperimentKind::green_validate:
      return run_green_validate(cfg, workers);
  }
  fail(Errc::config, "unhandled experiment kind");
}

std::vector<std::string> write_results(const RunResult& r, const ExperimentConfig& cfg,
                                       const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Errc::io, "cannot create output directory: " + out_dir);
  std::vector<std::string> written;
  for (const auto& [name, table] : r.tables) {
    ResultTable t = table;
    t.config_hash = cfg.hash();
    t.tool_version = version();
    const std::string path = out_dir + "/" + cfg.output_prefix + "." + name + ".csv";
    write_csv_file(t, path);
    written.push_back(path);
  }
  for (const auto& [name, text] : r.documents) {
    const std::string path = out_dir + "/" + cfg.output_prefix + "." + name + ".txt";
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(Errc::io, "cannot open for writing: " + path);
    f << text;
    written.push_back(path);
  }
  return written;
}

}  // namespace floqep
