#include <doctest.h>

#include <random>

#include "core/green.hpp"
#include "core/lattice.hpp"

using namespace floqep;

namespace {

// Independent summation oracle: generous integer box, per-mode matrix via a
// direct dense inverse of the symbol (not the closed-form formulas), naive
// complex accumulation.
MatrixXcd oracle_green(const Lattice& lat, double lambda, double mu, const VectorXd& theta,
                       double omega, const VectorXd& alpha, const VectorXd& x, const VectorXd& y,
                       double q_max) {
  const int d = lat.dim;
  long K = 2;
  for (int i = 0; i < d; ++i)
    K = std::max(K, static_cast<long>(std::ceil(lat.basis.col(i).norm() *
                                                (q_max + alpha.norm()) / (2.0 * pi))) + 3);
  MatrixXcd acc = MatrixXcd::Zero(d, d);
  const long k3 = (d == 3) ? K : 0;
  for (long a = -K; a <= K; ++a)
    for (long b = -K; b <= K; ++b)
      for (long c = -k3; c <= k3; ++c) {
        VectorXd k(d);
        k[0] = static_cast<double>(a);
        k[1] = static_cast<double>(b);
        if (d == 3) k[2] = static_cast<double>(c);
        const VectorXd p = lat.dual * k + alpha;
        if (p.norm() > q_max) continue;
        MatrixXd symbol = MatrixXd::Zero(d, d);
        for (int i = 0; i < d; ++i) {
          symbol(i, i) = omega * omega * theta[i] - mu * p.squaredNorm();
          for (int j = 0; j < d; ++j) symbol(i, j) -= (lambda + mu) * p[i] * p[j];
        }
        const MatrixXd minv = symbol.inverse();
        acc += minv.cast<cplx>() * std::exp(iu * p.dot(x - y));
      }
  return acc / lat.cell_volume;
}

const Lattice kSquare = Lattice::square();
const BackgroundMedium kMed{1.0, 1.0};

VectorXd v2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("full Green tensor matches an independent brute-force summation") {
  const VectorXd alpha = v2(pi, pi);
  const VectorXd x = v2(0.2, 0.1), y = v2(0.0, 0.0);
  const VectorXd theta = VectorXd::Ones(2);
  const double q_max = 40.0 * pi;
  const GreenEval g = green_full(kSquare, kMed, theta, 0.1, alpha, x, y, q_max);
  const MatrixXcd o = oracle_green(kSquare, kMed.lambda, kMed.mu, theta, 0.1, alpha, x, y, q_max);
  CHECK((g.value - o).cwiseAbs().maxCoeff() < 1e-12 * o.cwiseAbs().maxCoeff());
}

TEST_CASE("static Green tensor matches the zero-frequency oracle") {
  const VectorXd alpha = v2(1.1, -0.4);
  const VectorXd x = v2(0.33, 0.82), y = v2(0.05, 0.4);
  const double q_max = 25.0 * pi;
  const GreenEval g = green_static(kSquare, kMed, alpha, x, y, q_max);
  const MatrixXcd o = oracle_green(kSquare, kMed.lambda, kMed.mu, VectorXd::Zero(2), 0.0, alpha,
                                   x, y, q_max);
  CHECK((g.value - o).cwiseAbs().maxCoeff() < 1e-12 * o.cwiseAbs().maxCoeff());
}

TEST_CASE("omega = 0 reduces the full tensor to the static one term-by-term") {
  const VectorXd alpha = v2(0.8, 0.3);
  const VectorXd x = v2(0.25, 0.6), y = v2(0.1, 0.15);
  const VectorXd theta = v2(1.0, 0.7);
  const GreenEval full0 = green_full(kSquare, kMed, theta, 0.0, alpha, x, y, 12.0 * pi);
  const GreenEval stat = green_static(kSquare, kMed, alpha, x, y, 12.0 * pi);
  CHECK(full0.term_count == stat.term_count);
  CHECK((full0.value - stat.value).cwiseAbs().maxCoeff() <
        1e-14 * stat.value.cwiseAbs().maxCoeff());
}

TEST_CASE("quasiperiodicity: G(x + l1, y) = e^{i alpha.l1} G(x, y)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    const Lattice& lat = (trial % 2) ? kSquare : Lattice::hexagonal();
    const VectorXd alpha = v2(1.5 * u(rng), 2.0 * u(rng));
    const VectorXd x = v2(u(rng), u(rng)), y = v2(u(rng), u(rng));
    const GreenEval a = green_static(lat, kMed, alpha, x, y, 10.0 * pi);
    const GreenEval b = green_static(lat, kMed, alpha, x + lat.basis.col(0), y, 10.0 * pi);
    const cplx phase = std::exp(iu * alpha.dot(lat.basis.col(0)));
    CHECK((b.value - phase * a.value).norm() < 1e-13 * std::max(1.0, a.value.norm()));
  }
}

TEST_CASE("conjugation and index symmetry of the static tensor") {
  const VectorXd alpha = v2(0.9, 0.2);
  const VectorXd x = v2(0.3, 0.7), y = v2(0.6, 0.25);
  const GreenEval gxy = green_static(kSquare, kMed, alpha, x, y, 14.0 * pi);
  const GreenEval gyx = green_static(kSquare, kMed, alpha, y, x, 14.0 * pi);
  CHECK((gxy.value.conjugate() - gyx.value).cwiseAbs().maxCoeff() <
        1e-15 * gxy.value.cwiseAbs().maxCoeff());
  CHECK((gxy.value - gxy.value.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first correction: theta = 0 kills every term") {
  const VectorXd alpha = v2(pi / 2, pi / 3);
  const GreenEval g1 = green_correction1(kSquare, kMed, VectorXd::Zero(2), alpha, v2(0.2, 0.4),
                                         v2(0.0, 0.0), 10.0 * pi);
  CHECK(g1.value.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first correction matches the Richardson finite-difference oracle") {
  const VectorXd alpha = v2(pi, pi / 2);
  const VectorXd x = v2(0.2, 0.1), y = v2(0.0, 0.0);
  const VectorXd theta = v2(1.0, 0.7);
  const double q_max = 12.0 * pi;
  const GreenEval g0 = green_static(kSquare, kMed, alpha, x, y, q_max);
  const GreenEval g1 = green_correction1(kSquare, kMed, theta, alpha, x, y, q_max);

  auto fd = [&](double w) {
    const GreenEval gf = green_full(kSquare, kMed, theta, w, alpha, x, y, q_max);
    return MatrixXcd((gf.value - g0.value) / (w * w));
  };
  const double w = 1e-3;
  const MatrixXcd r1 = fd(w), r2 = fd(w / 2);
  const MatrixXcd richardson = (4.0 * r2 - r1) / 3.0;
  CHECK((richardson - g1.value).norm() < 1e-8 * g1.value.norm());
  // the plain quotient converges at second order: halving omega quarters it
  CHECK((fd(2 * w) - g1.value).norm() / (r1 - g1.value).norm() == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("expansion remainder has log-log slope 4 in omega") {
  const VectorXd alpha = v2(pi, pi / 2);
  const VectorXd x = v2(0.2, 0.1), y = v2(0.0, 0.0);
  const VectorXd theta = v2(1.0, 0.7);
  const double q_max = 12.0 * pi;
  const GreenEval g0 = green_static(kSquare, kMed, alpha, x, y, q_max);
  const GreenEval g1 = green_correction1(kSquare, kMed, theta, alpha, x, y, q_max);

  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  const int n = 6;
  for (int i = 0; i < n; ++i) {
    const double w = 1e-3 * std::pow(10.0, i / static_cast<double>(n - 1));
    const GreenEval gf = green_full(kSquare, kMed, theta, w, alpha, x, y, q_max);
    const double r = (gf.value - g0.value - w * w * g1.value).norm();
    const double lx = std::log(w), ly = std::log(r);
    sx += lx;
    sy += ly;
    sxy += lx * ly;
    sxx += lx * lx;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("truncation consistency: tail terms account for the q_max increase") {
  const VectorXd alpha = v2(0.7, 1.3);
  const VectorXd x = v2(0.4, 0.1), y = v2(0.0, 0.3);
  const double q1 = 8.0 * pi, q2 = 16.0 * pi;
  const GreenEval a = green_static(kSquare, kMed, alpha, x, y, q1);
  const GreenEval b = green_static(kSquare, kMed, alpha, x, y, q2);

  // naive re-summation of exactly the tail modes
  MatrixXcd tail = MatrixXcd::Zero(2, 2);
  for (const auto& sp : dual_shell(kSquare, alpha, q2)) {
    if (sp.norm <= q1) continue;
    const double P = sp.norm * sp.norm;
    const double lm = kMed.lambda + kMed.mu, l2m = kMed.lambda + 2.0 * kMed.mu;
    MatrixXd m(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        m(i, j) = lm / (kMed.mu * l2m) * sp.p[i] * sp.p[j] / (P * P);
        if (i == j) m(i, j) -= 1.0 / (kMed.mu * P);
      }
    const double arg = sp.p[0] * (x[0] - y[0]) + sp.p[1] * (x[1] - y[1]);
    tail += m.cast<cplx>() * std::polar(1.0, arg) / kSquare.cell_volume;
  }
  CHECK((b.value - a.value - tail).cwiseAbs().maxCoeff() <
        1e-14 * std::max(1.0, b.value.cwiseAbs().maxCoeff()));
}

TEST_CASE("near-resonant denominators are reported with the offending mode") {
  const VectorXd alpha = v2(pi, 0.0);
  const VectorXd theta = VectorXd::Ones(2);
  // smallest retained |q + alpha| is pi: omega = sqrt(mu) * pi hits it exactly
  CHECK_THROWS_WITH_AS(
      green_full(kSquare, kMed, theta, pi, alpha, v2(0.1, 0.2), v2(0.0, 0.0), 6.0 * pi),
      doctest::Contains("near-resonant"), Error);
  CHECK_THROWS_AS(
      green_full(kSquare, kMed, theta, 0.1, VectorXd::Zero(2), v2(0.1, 0.2), v2(0.0, 0.0), pi),
      Error);
}
