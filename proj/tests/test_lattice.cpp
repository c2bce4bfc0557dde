#include <doctest.h>

#include <random>
#include <set>

#include "core/lattice.hpp"

using namespace floqep;

namespace {

// independent enumeration: generous integer box, no norm-derived bound
std::set<std::array<long, 3>> box_scan(const Lattice& lat, const VectorXd& alpha, double q_max) {
  long K = 2;
  for (int i = 0; i < lat.dim; ++i)
    K = std::max(K, static_cast<long>(std::ceil(lat.basis.col(i).norm() *
                                                (q_max + alpha.norm()) / (2.0 * pi))) + 3);
  std::set<std::array<long, 3>> hits;
  const long k3 = (lat.dim == 3) ? K : 0;
  for (long a = -K; a <= K; ++a)
    for (long b = -K; b <= K; ++b)
      for (long c = -k3; c <= k3; ++c) {
        VectorXd k(lat.dim);
        k[0] = static_cast<double>(a);
        k[1] = static_cast<double>(b);
        if (lat.dim == 3) k[2] = static_cast<double>(c);
        if ((lat.dual * k + alpha).norm() <= q_max) hits.insert({a, b, c});
      }
  return hits;
}

}  // namespace

TEST_CASE("dual basis satisfies l_i . gamma_j = 2 pi delta_ij") {
  const Lattice sq = Lattice::square();
  CHECK((sq.dual - 2.0 * pi * MatrixXd::Identity(2, 2)).norm() == doctest::Approx(0.0));

  const Lattice cu = Lattice::cubic();
  CHECK((cu.dual - 2.0 * pi * MatrixXd::Identity(3, 3)).norm() == doctest::Approx(0.0));

  // hexagonal: solve the defining 2x2 linear systems directly (Cramer)
  const Lattice hex = Lattice::hexagonal();
  const double a11 = hex.basis(0, 0), a12 = hex.basis(1, 0);
  const double a21 = hex.basis(0, 1), a22 = hex.basis(1, 1);
  const double det = a11 * a22 - a12 * a21;
  MatrixXd expected(2, 2);
  expected(0, 0) = 2.0 * pi * a22 / det;
  expected(1, 0) = -2.0 * pi * a21 / det;
  expected(0, 1) = -2.0 * pi * a12 / det;
  expected(1, 1) = 2.0 * pi * a11 / det;
  CHECK((hex.dual - expected).norm() < 1e-12);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(hex.basis.col(i).dot(hex.dual.col(j)) - (i == j ? 2.0 * pi : 0.0)) < 1e-12);
}

TEST_CASE("degenerate basis is rejected") {
  MatrixXd b(2, 2);
  b << 1.0, 2.0, 1.0, 2.0;
  CHECK_THROWS_AS(dual_basis(b), Error);
}

TEST_CASE("dual of the dual recovers the original basis") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = (trial % 2) ? 2 : 3;
    MatrixXd b(d, d);
    do {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b(i, j) = u(rng);
    } while (std::abs(b.determinant()) < 0.1);
    CHECK((dual_basis(dual_basis(b)) - b).norm() < 1e-10 * b.norm());
  }
}

TEST_CASE("dual shell equals the brute-force box scan") {
  const Lattice cu = Lattice::cubic();
  VectorXd alpha(3);
  alpha << pi, 0.0, 0.0;
  const auto shell = dual_shell(cu, alpha, 2.0 * pi);
  const auto oracle = box_scan(cu, alpha, 2.0 * pi);
  CHECK(shell.size() == oracle.size());
  for (const auto& sp : shell) CHECK(oracle.count(sp.index) == 1);

  const Lattice sq = Lattice::square();
  VectorXd a2(2);
  a2 << pi, pi;
  const auto shell2 = dual_shell(sq, a2, 10.0 * pi);
  const auto oracle2 = box_scan(sq, a2, 10.0 * pi);
  CHECK(shell2.size() == oracle2.size());
  for (const auto& sp : shell2) CHECK(oracle2.count(sp.index) == 1);
}

TEST_CASE("dual shell: q_max = 0 yields the empty set for nonzero alpha") {
  VectorXd alpha(2);
  alpha << 0.1, 0.0;
  CHECK(dual_shell(Lattice::square(), alpha, 0.0).empty());
}

TEST_CASE("dual shell ordering is lexicographic and monotone in q_max") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.2, 2.8);
  const Lattice hex = Lattice::hexagonal();
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd alpha(2);
    alpha << u(rng), u(rng);
    const double q1 = 4.0 * u(rng), q2 = q1 + 6.0 * u(rng);
    const auto s1 = dual_shell(hex, alpha, q1);
    const auto s2 = dual_shell(hex, alpha, q2);
    for (std::size_t k = 1; k < s2.size(); ++k) CHECK(s2[k - 1].index < s2[k].index);
    std::set<std::array<long, 3>> big;
    for (const auto& sp : s2) big.insert(sp.index);
    for (const auto& sp : s1) CHECK(big.count(sp.index) == 1);
    CHECK(box_scan(hex, alpha, q1).size() == s1.size());
  }
}

TEST_CASE("quasimomentum canonicalization") {
  const Lattice sq = Lattice::square();
  VectorXd a(2);
  a << 2.0 * pi + 0.3, 0.0;
  const VectorXd r = canonicalize_quasimomentum(a, sq);
  CHECK(r[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(std::abs(r[1]) < 1e-15);

  a << 0.3, 0.0;
  CHECK((canonicalize_quasimomentum(a, sq) - a).norm() < 1e-14);

  a << 0.0, 0.0;
  CHECK_THROWS_AS(canonicalize_quasimomentum(a, sq), Error);

  // the difference alpha - alpha_reduced lies on the dual lattice
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  const Lattice hex = Lattice::hexagonal();
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd x(2);
    x << u(rng), u(rng);
    const VectorXd red = canonicalize_quasimomentum(x, hex);
    const VectorXd k = hex.dual.fullPivLu().solve(x - red);
    CHECK(std::abs(k[0] - std::round(k[0])) < 1e-9);
    CHECK(std::abs(k[1] - std::round(k[1])) < 1e-9);
  }
}
