#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "dimerlab/enumerate.hpp"
#include "dimerlab/height.hpp"
#include "dimerlab/rhombus.hpp"
#include "dimerlab/sampling.hpp"
#include "dimerlab/theta.hpp"
#include "dimerlab/torus_obs.hpp"
#include "doctest.h"

using namespace dimerlab;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct EnumLaw {
  double z = 0;
  std::vector<double> w, n, m;  // weight and half-periods per matching
};

EnumLaw enum_law(const DimerGraph& g) {
  EnumLaw out;
  for (const auto& mt : enumerate_matchings(g)) {
    double wt = 1;
    for (int e : mt) wt *= std::abs(g.edges[e].sK);
    const HeightField h = height_from_matching(g, mt);
    out.w.push_back(wt);
    out.n.push_back(h.n);
    out.m.push_back(h.m);
    out.z += wt;
  }
  return out;
}

cplx enum_characteristic(const EnumLaw& e, double eps, double eps_p) {
  cplx acc = 0;
  for (size_t i = 0; i < e.w.size(); ++i)
    acc += e.w[i] *
           std::exp(cplx(0, 4 * kPi * (e.m[i] * eps + e.n[i] * eps_p + e.n[i] * e.m[i])));
  return acc / e.z;
}

// matchings of a free-row subset of the length-h ring by vertical dominoes
uint64_t ring_match(unsigned free_rows, int h) {
  const unsigned full = (1u << h) - 1;
  if (free_rows == full) return 2;
  if (free_rows == 0) return 1;
  int start = 0;
  while (free_rows >> start & 1) ++start;
  int run = 0;
  for (int k = 1; k <= h; ++k) {
    if (free_rows >> ((start + k) % h) & 1) {
      ++run;
    } else {
      if (run & 1) return 0;
      run = 0;
    }
  }
  return 1;
}

// column-to-column transfer over horizontal-domino occupancy masks
uint64_t transfer_count(int w, int h) {
  const int n = 1 << h;
  const unsigned full = (1u << h) - 1;
  std::vector<uint64_t> t(size_t(n) * n, 0), acc, tmp(size_t(n) * n);
  for (int s = 0; s < n; ++s)
    for (int sp = 0; sp < n; ++sp)
      if (!(s & sp)) t[size_t(s) * n + sp] = ring_match(~unsigned(s | sp) & full, h);
  acc = t;
  for (int step = 1; step < w; ++step) {
    std::fill(tmp.begin(), tmp.end(), 0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const uint64_t a = acc[size_t(i) * n + k];
        if (!a) continue;
        for (int j = 0; j < n; ++j) tmp[size_t(i) * n + j] += a * t[size_t(k) * n + j];
      }
    acc.swap(tmp);
  }
  uint64_t tr = 0;
  for (int i = 0; i < n; ++i) tr += acc[size_t(i) * n + i];
  return tr;
}

double tv_distance(const std::map<std::pair<int, int>, double>& a,
                   const std::map<std::pair<int, int>, double>& b) {
  double tv = 0;
  for (const auto& [k, p] : a) {
    auto it = b.find(k);
    tv += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, p] : b)
    if (!a.count(k)) tv += p;
  return 0.5 * tv;
}

}  // namespace

TEST_CASE("torus partition function matches enumeration") {
  for (auto [w, h] : {std::pair{2, 2}, {4, 4}, {4, 2}, {6, 4}}) {
    auto g = build_square_lattice(w, h, Topology::torus, std::sqrt(2.0));
    const EnumLaw e = enum_law(g);
    const TorusZ tz = kasteleyn_z(g);
    CHECK(std::abs(tz.sigma_star) == 1.0);
    CHECK(std::exp(tz.log_z) == doctest::Approx(e.z).epsilon(1e-10));
  }
  // off-critical edge weights scale the determinants consistently
  auto g = build_square_lattice(4, 4, Topology::torus, 2.0);
  const EnumLaw e = enum_law(g);
  CHECK(std::exp(kasteleyn_z(g).log_z) == doctest::Approx(e.z).epsilon(1e-10));
}

TEST_CASE("torus partition function agrees with a transfer-matrix count") {
  REQUIRE(transfer_count(2, 2) == 8);
  REQUIRE(transfer_count(4, 4) == 272);
  CHECK(transfer_count(4, 2) == 36);
  CHECK(transfer_count(2, 4) == 36);
  CHECK(transfer_count(6, 4) == 3108);

  auto g = build_square_lattice(6, 6, Topology::torus, std::sqrt(2.0));
  const uint64_t n_transfer = transfer_count(6, 6);
  CHECK(n_transfer == enumerate_matchings(g).size());
  CHECK(std::exp(kasteleyn_z(g).log_z) == doctest::Approx(double(n_transfer)).epsilon(1e-8));
}

TEST_CASE("torus partition function on an isoradial lozenge graph") {
  auto g = build_isoradial(lozenge_tiling(3, 3, 1.1, std::sqrt(2.0), true), Topology::torus);
  REQUIRE(g.nW() == 18);
  double z = 0;
  for (const auto& mt : enumerate_matchings(g)) {
    double wt = 1;
    for (int e : mt) wt *= std::abs(g.edges[e].sK);
    z += wt;
  }
  CHECK(std::exp(kasteleyn_z(g).log_z) == doctest::Approx(z).epsilon(1e-10));

  auto law = halfperiod_law(g, 8);
  double tot = 0;
  for (const auto& [k, p] : law) tot += p;
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(halfperiod_moment(g, 0, 0) - 1.0) < 1e-9);
}

TEST_CASE("halfperiod characteristic matches enumeration at generic twists") {
  for (auto [w, h] : {std::pair{4, 4}, {6, 4}, {4, 2}}) {
    auto g = build_square_lattice(w, h, Topology::torus, std::sqrt(2.0));
    const EnumLaw e = enum_law(g);
    for (auto [eps, eps_p] : {std::pair{0.23, -0.41}, {0.1, 0.37}, {0.31, 0.08}}) {
      const cplx det_route = halfperiod_characteristic(g, eps, eps_p);
      CHECK(std::abs(det_route - enum_characteristic(e, eps, eps_p)) < 1e-9);
      // integer twist shifts leave the characteristic invariant
      CHECK(std::abs(det_route - halfperiod_characteristic(g, eps + 1, eps_p)) < 1e-9);
      CHECK(std::abs(det_route - halfperiod_characteristic(g, eps, eps_p - 1)) < 1e-9);
    }
  }
}

TEST_CASE("halfperiod moment drops the period-crossing sign") {
  for (auto [w, h] : {std::pair{4, 4}, {6, 4}}) {
    auto g = build_square_lattice(w, h, Topology::torus, std::sqrt(2.0));
    const EnumLaw e = enum_law(g);
    CHECK(std::abs(halfperiod_moment(g, 0, 0) - 1.0) < 1e-10);
    for (auto [eps, eps_p] : {std::pair{0.23, -0.41}, {0.1, 0.37}}) {
      cplx acc = 0;
      for (size_t i = 0; i < e.w.size(); ++i)
        acc += e.w[i] * std::exp(cplx(0, 4 * kPi * (e.m[i] * eps + e.n[i] * eps_p)));
      CHECK(std::abs(halfperiod_moment(g, eps, eps_p) - acc / e.z) < 1e-9);
    }
  }
}

TEST_CASE("halfperiod law matches enumeration") {
  for (auto [w, h] : {std::pair{4, 4}, {6, 4}, {4, 2}}) {
    auto g = build_square_lattice(w, h, Topology::torus, std::sqrt(2.0));
    const EnumLaw e = enum_law(g);
    std::map<std::pair<int, int>, double> exact;
    for (size_t i = 0; i < e.w.size(); ++i)
      exact[{int(std::lround(2 * e.n[i])), int(std::lround(2 * e.m[i]))}] += e.w[i] / e.z;
    auto law = halfperiod_law(g, 10);
    REQUIRE(law.size() == exact.size());
    for (const auto& [k, p] : exact) {
      REQUIRE(law.count(k) == 1);
      CHECK(law.at(k) == doctest::Approx(p).epsilon(1e-9));
    }
    // the law is even in each half-period separately
    for (const auto& [k, p] : law) {
      auto flip = law.find({-k.first, k.second});
      REQUIRE(flip != law.end());
      CHECK(flip->second == doctest::Approx(p).epsilon(1e-9));
    }
  }
}

TEST_CASE("parity class masses match enumeration") {
  for (auto [w, h] : {std::pair{4, 4}, {6, 4}, {8, 2}}) {
    auto g = build_square_lattice(w, h, Topology::torus, std::sqrt(2.0));
    const EnumLaw e = enum_law(g);
    double exact[4] = {0, 0, 0, 0};
    for (size_t i = 0; i < e.w.size(); ++i) {
      const int p = std::abs(int(std::lround(2 * e.m[i]))) & 1;
      const int q = std::abs(int(std::lround(2 * e.n[i]))) & 1;
      exact[(p << 1) | q] += e.w[i] / e.z;
    }
    const auto mass = parity_class_masses(g);
    double tot = 0;
    for (int c = 0; c < 4; ++c) {
      CHECK(mass[c] == doctest::Approx(exact[c]).epsilon(1e-9));
      tot += mass[c];
    }
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("torus sampler reproduces the matching law") {
  for (auto [w, h, n_samples, bound] :
       {std::tuple{2, 2, 20000, 0.03}, {4, 4, 30000, 0.10}}) {
    auto g = build_square_lattice(w, h, Topology::torus, std::sqrt(2.0));
    auto all = enumerate_matchings(g);
    std::map<Matching, double> exact;
    double z = 0;
    for (const auto& mt : all) {
      double wt = 1;
      for (int e : mt) wt *= std::abs(g.edges[e].sK);
      exact[mt] += wt;
      z += wt;
    }
    TorusSampler ts(g);
    CHECK(ts.log_z() == doctest::Approx(kasteleyn_z(g).log_z).epsilon(1e-12));

    Rng rng(11);
    std::map<Matching, double> hist;
    for (int k = 0; k < n_samples; ++k) {
      Matching mt = ts.sample(rng);
      REQUIRE(exact.count(mt) == 1);  // every draw is a genuine matching
      hist[mt] += 1.0 / n_samples;
    }
    double tv = 0;
    for (const auto& [mt, wt] : exact) {
      auto it = hist.find(mt);
      tv += std::abs(wt / z - (it == hist.end() ? 0.0 : it->second));
    }
    CHECK(0.5 * tv < bound);
  }
}

TEST_CASE("identical seeds give identical torus samples") {
  auto g = build_square_lattice(4, 4, Topology::torus, std::sqrt(2.0));
  TorusSampler a(g), b(g);
  Rng r1(5), r2(5);
  for (int k = 0; k < 10; ++k) CHECK(a.sample(r1) == b.sample(r2));
}

TEST_CASE("edge-set filter agrees with enumeration and carries the periods") {
  auto g = build_square_lattice(4, 4, Topology::torus, std::sqrt(2.0));
  const EnumLaw e = enum_law(g);
  auto all = enumerate_matchings(g);
  const std::vector<int> probe = {0, 5, 11};

  // exact joint law of the probe-edge indicator pattern
  std::map<int, double> pattern_exact;
  for (size_t i = 0; i < all.size(); ++i) {
    int code = 0;
    for (size_t j = 0; j < probe.size(); ++j) {
      const int eid = probe[j];
      if (all[i][g.edges[eid].w] == eid) code |= 1 << j;
    }
    pattern_exact[code] += e.w[i] / e.z;
  }

  TorusSampler ts(g);
  Rng rng(23);
  const int n_samples = 20000;
  std::map<int, double> pattern_hist;
  std::map<std::pair<int, int>, double> period_hist;
  for (int k = 0; k < n_samples; ++k) {
    const EdgeSetSample s = ts.sample_edge_set(probe, rng);
    REQUIRE(s.present.size() == probe.size());
    int code = 0;
    for (size_t j = 0; j < probe.size(); ++j) code |= s.present[j] << j;
    pattern_hist[code] += 1.0 / n_samples;
    period_hist[{int(std::lround(2 * s.n)), int(std::lround(2 * s.m))}] += 1.0 / n_samples;
  }
  double tv = 0;
  for (const auto& [c, p] : pattern_exact) {
    auto it = pattern_hist.find(c);
    tv += std::abs(p - (it == pattern_hist.end() ? 0.0 : it->second));
  }
  CHECK(0.5 * tv < 0.03);
  CHECK(tv_distance(period_hist, halfperiod_law(g, 10)) < 0.04);
}

TEST_CASE("sampled periods follow the period law") {
  for (auto [w, h] : {std::pair{4, 4}, {8, 4}}) {
    auto g = build_square_lattice(w, h, Topology::torus, std::sqrt(2.0));
    TorusSampler ts(g);
    Rng rng(31);
    const int n_samples = 20000;
    std::map<std::pair<int, int>, double> hist;
    for (int k = 0; k < n_samples; ++k) {
      auto [n, m] = ts.sample_periods(rng);
      hist[{int(std::lround(2 * n)), int(std::lround(2 * m))}] += 1.0 / n_samples;
    }
    CHECK(tv_distance(hist, halfperiod_law(g, 12)) < 0.04);
  }
}

TEST_CASE("monte carlo characteristic agrees with the determinant route") {
  auto g = build_square_lattice(4, 4, Topology::torus, std::sqrt(2.0));
  const cplx mc = halfperiod_characteristic_mc(g, 0.23, -0.41, 20000, 7);
  CHECK(std::abs(mc - halfperiod_characteristic(g, 0.23, -0.41)) < 0.04);
}

TEST_CASE("instanton statistics approach the continuum law") {
  auto g = build_square_lattice(8, 8, Topology::torus, std::sqrt(2.0));
  const InstantonTestResult r = instanton_test(g, 5000, 1);
  CHECK(r.samples == 5000);
  CHECK(r.tv_distance < 0.12);
  CHECK(r.var_ratio_n > 0.7);
  CHECK(r.var_ratio_n < 1.4);
  CHECK(r.var_ratio_m > 0.7);
  CHECK(r.var_ratio_m < 1.4);
  CHECK(std::abs(r.skew_z_n) < 5.0);
  CHECK(std::abs(r.skew_z_m) < 5.0);

  // wide torus: winding fluctuates along the long direction only
  auto gw = build_square_lattice(8, 2, Topology::torus, std::sqrt(2.0));
  const EnumLaw e = enum_law(gw);
  double vn = 0, vm = 0;
  for (size_t i = 0; i < e.w.size(); ++i) {
    vn += e.w[i] * e.n[i] * e.n[i] / e.z;
    vm += e.w[i] * e.m[i] * e.m[i] / e.z;
  }
  CHECK(vn > 10 * vm);
  const cplx tau = gw.period2 / gw.period1;
  double lz = 0, lvn = 0, lvm = 0;
  for (int a = -16; a <= 16; ++a)
    for (int b = -16; b <= 16; ++b) {
      const double wt = instanton_weight(0.5 * a, 0.5 * b, tau);
      lz += wt;
      lvn += wt * 0.25 * a * a;
      lvm += wt * 0.25 * b * b;
    }
  CHECK(lvn / lz > 10 * lvm / lz);  // same orientation as the lattice law
  CHECK(vn == doctest::Approx(lvn / lz).epsilon(0.15));
}

TEST_CASE("sector kernel blocks agree with the dense inverse") {
  auto g = build_square_lattice(6, 4, Topology::torus, std::sqrt(2.0));
  const std::vector<int> blacks = {0, 3, 7, 10}, whites = {1, 2, 5, 11};
  // the doubly periodic sector is singular; the sampler only inverts the other three
  for (int sector = 0; sector < 3; ++sector) {
    const Mat sk = sk_sector_matrix(g, sector);
    const Mat inv = Eigen::PartialPivLU<Mat>(sk).inverse();
    const Mat blk = sector_kernel_block(g, sector, blacks, whites);
    REQUIRE(blk.rows() == 4);
    REQUIRE(blk.cols() == 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(std::abs(blk(i, j) - inv(blacks[i], whites[j])) < 1e-10);
  }
}

TEST_CASE("sector kernel blocks stay exact on the large-lattice path") {
  auto g = build_square_lattice(54, 54, Topology::torus, std::sqrt(2.0));
  REQUIRE(g.nW() == 54 * 27);
  std::vector<int> blacks(g.nB()), whites = {0, 401, 977};
  for (int b = 0; b < g.nB(); ++b) blacks[b] = b;
  for (int sector = 0; sector < 3; ++sector) {
    const Mat blk = sector_kernel_block(g, sector, blacks, whites);
    const Mat sk = sk_sector_matrix(g, sector);
    const Mat res = sk * blk;  // should be the selected identity columns
    for (int j = 0; j < int(whites.size()); ++j)
      for (int w = 0; w < g.nW(); ++w) {
        const double want = (w == whites[j]) ? 1.0 : 0.0;
        CHECK(std::abs(res(w, j) - want) < 1e-7);
      }
  }
}
