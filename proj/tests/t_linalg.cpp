#include <doctest.h>

#include <cmath>
#include <random>

#include "dimerlab/dimer_graph.hpp"
#include "dimerlab/enumerate.hpp"
#include "dimerlab/linalg.hpp"
#include "dimerlab/rhombus.hpp"

using namespace dimerlab;

namespace {

std::mt19937_64 rng_of(uint64_t seed) { return std::mt19937_64(seed); }

CMat random_cmat(int n, uint64_t seed) {
  auto rng = rng_of(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(u(rng), u(rng));
  return a;
}

void check_z_matches_det(const DimerGraph& g) {
  REQUIRE(g.nW() == g.nB());
  double z = weighted_matching_sum(g);
  REQUIRE(z > 0);
  auto ld = logdet(sk_matrix(g));
  REQUIRE(!ld.is_singular);
  CHECK(std::exp(ld.log_modulus) == doctest::Approx(z).epsilon(1e-10));
  auto ldc = logdet(k_matrix(g));  // gauge factors are unimodular
  CHECK(ldc.log_modulus == doctest::Approx(ld.log_modulus).epsilon(1e-10));
}

}  // namespace

TEST_CASE("logdet agrees with direct determinants") {
  auto a = random_cmat(7, 11).real().eval();
  auto la = logdet(Mat(a));
  CHECK(la.value().real() == doctest::Approx(a.determinant()).epsilon(1e-10));
  CHECK(std::abs(la.phase) == doctest::Approx(1.0));

  auto c = random_cmat(7, 12);
  auto lc = logdet(c);
  cplx det = c.determinant();
  CHECK(std::abs(lc.value() - det) < 1e-10 * std::abs(det));

  CMat s = random_cmat(5, 13);
  s.col(3) = 2.0 * s.col(1);  // rank deficient
  CHECK(logdet(s).is_singular);
  CHECK(logdet(s).value() == cplx(0));

  auto ratio = logdet_ratio(lc, la);
  CHECK(std::abs(ratio.value() - det / a.determinant()) < 1e-9 * std::abs(det / a.determinant()));
  auto prod = logdet_mul(lc, la);
  CHECK(std::abs(prod.value() - det * a.determinant()) < 1e-9 * std::abs(det * a.determinant()));
}

TEST_CASE("Kasteleyn determinant equals the weighted matching sum: boards") {
  for (auto [w, h] : {std::pair{2, 2}, {2, 4}, {4, 4}, {4, 6}, {6, 6}}) {
    check_z_matches_det(build_square_lattice(w, h, Topology::plane, std::sqrt(2.0)));
    check_z_matches_det(build_square_lattice(w, h, Topology::plane, 1.3));
  }
}

TEST_CASE("Kasteleyn determinant equals the weighted matching sum: random subregions") {
  int found = 0;
  for (uint64_t seed = 1; seed <= 60 && found < 8; ++seed) {
    auto mask = column_convex_mask(8, 6, seed);
    auto g = build_square_subregion(8, 6, mask, std::sqrt(2.0));
    if (g.nW() != g.nB() || g.nW() == 0) continue;
    if (count_matchings(g) == 0) continue;
    check_z_matches_det(g);
    ++found;
  }
  CHECK(found == 8);
}

TEST_CASE("Kasteleyn determinant equals the weighted matching sum: isoradial paths") {
  auto loz = build_isoradial(lozenge_tiling(5, 5, 1.1, 1.0, false), Topology::plane);
  auto rho = build_isoradial(rhombille_tiling(4, 4, 1.0, false), Topology::plane);
  for (const DimerGraph* full : {&loz, &rho}) {
    bool ok = false;
    for (uint64_t seed = 1; seed <= 50 && !ok; ++seed) {
      auto faces = quad_face_path(*full, (int)full->faces.size() / 2, 11, seed);
      if ((int)faces.size() != 11) continue;
      auto g = build_quad_subregion(*full, faces);
      if (g.nW() != 12 || g.nB() != 12 || count_matchings(g) == 0) continue;
      check_z_matches_det(g);
      ok = true;
    }
    CHECK(ok);
  }
}

TEST_CASE("inverse columns carry certified residuals") {
  auto a = random_cmat(9, 21);
  auto inv = dense_inverse(a);
  for (int col : {0, 4, 8}) {
    CVec x = inverse_column(a, col);
    CHECK((x - inv.col(col)).norm() < 1e-9);
    CVec r = a * x;
    r(col) -= 1.0;
    CHECK(r.norm() < 1e-10);
  }
}

TEST_CASE("finite rank determinant perturbations") {
  auto g = build_square_lattice(6, 6, Topology::plane, std::sqrt(2.0));
  CMat k = k_matrix(g);
  CMat kinv = dense_inverse(k);
  auto rng = rng_of(31);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<int> rows{2, 7, 11}, cols{3, 7, 15, 16};
  CMat dk = CMat::Zero(k.rows(), k.cols());
  CMat dk_block(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx v(u(rng), u(rng));
      dk_block(i, j) = v;
      dk(rows[i], cols[j]) = v;
    }
  CMat kinv_block(4, 3);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 3; ++i) kinv_block(j, i) = kinv(cols[j], rows[i]);
  auto direct = logdet_ratio(logdet(CMat(k + dk)), logdet(k));
  auto fred = fredholm_det(dk_block, kinv_block);
  CHECK(std::abs(fred.value() - direct.value()) < 1e-9 * std::abs(direct.value()));
}

TEST_CASE("physical twist parameter hits the required holonomies") {
  auto g = build_square_lattice(6, 8, Topology::torus, std::sqrt(2.0));
  for (auto [eps, eps_p] : {std::pair{0.0, 0.0}, {0.25, 0.0}, {0.1, -0.3}, {0.5, 0.5}}) {
    cplx lam = lambda_phys(g, eps, eps_p);
    double h1 = 2 * std::imag(lam * std::conj(g.period1));
    double h2 = 2 * std::imag(lam * std::conj(g.period2));
    CHECK(std::remainder(h1 - M_PI * (1 + 2 * eps), 2 * M_PI) ==
          doctest::Approx(0.0).epsilon(1e-11));
    CHECK(std::remainder(h2 - M_PI * (1 - 2 * eps_p), 2 * M_PI) ==
          doctest::Approx(0.0).epsilon(1e-11));
  }
}

TEST_CASE("twisted determinants depend only on the holonomy class") {
  auto g = build_square_lattice(4, 6, Topology::torus, std::sqrt(2.0));
  // the untwisted real matrix is singular on a torus, and the (1/2, 1/2)
  // twist has trivial holonomy, so it must be singular too
  auto base = logdet(Mat(sk_matrix(g)));
  auto half = logdet(k_twisted(g, 0.5, 0.5));
  CHECK(base.is_singular);
  CHECK(half.is_singular);
  // shifting a twist by a full period leaves |det| unchanged
  auto a = logdet(k_twisted(g, 0.2, -0.1));
  auto b = logdet(k_twisted(g, 1.2, -0.1));
  auto c = logdet(k_twisted(g, 0.2, 0.9));
  CHECK(a.log_modulus == doctest::Approx(b.log_modulus).epsilon(1e-10));
  CHECK(a.log_modulus == doctest::Approx(c.log_modulus).epsilon(1e-10));
}

TEST_CASE("dense kernels invert the twisted operator") {
  auto g = build_square_lattice(4, 4, Topology::torus, std::sqrt(2.0));
  std::vector<std::pair<int, int>> pairs;
  for (int b = 0; b < g.nB(); ++b)
    for (int w = 0; w < g.nW(); ++w) pairs.push_back({b, w});
  for (auto [eps, eps_p] : {std::pair{0.25, 0.25}, {0.3, -0.2}}) {
    auto table = dense_kernel(g, pairs, eps, eps_p);
    CHECK(table.method == "dense");
    CHECK(table.error_bound < 1e-8);
    CMat k = k_twisted(g, eps, eps_p);
    CMat kinv(g.nB(), g.nW());
    for (auto [b, w] : pairs) kinv(b, w) = table.at(b, w);
    CHECK((k * kinv - CMat::Identity(g.nW(), g.nW())).norm() < 1e-9);
  }
  auto gp = build_square_lattice(4, 4, Topology::plane, std::sqrt(2.0));
  std::vector<std::pair<int, int>> some{{0, 0}, {3, 5}, {7, 7}};
  auto tp = dense_kernel(gp, some, 0, 0);
  Mat sk = sk_matrix(gp);
  CMat skinv = dense_inverse(sk.cast<cplx>());
  for (auto [b, w] : some) CHECK(std::abs(tp.at(b, w) - skinv(b, w)) < 1e-10);
}
