#include "dimerlab/torus_obs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dimerlab/height.hpp"
#include "dimerlab/theta.hpp"

namespace dimerlab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr cplx kI{0.0, 1.0};

// sectors 0..3 = twists (0,0), (1/2,0), (0,1/2), (1/2,1/2)
constexpr double kSectorEps[4] = {0, 0.5, 0, 0.5};
constexpr double kSectorEpsP[4] = {0, 0, 0.5, 0.5};
// wrap signs z1 = -e^{2 i pi eps}, z2 = -e^{-2 i pi eps'}
constexpr double kSectorZ1[4] = {-1, 1, -1, 1};
constexpr double kSectorZ2[4] = {-1, -1, 1, 1};

// dense real route below this size, block-FFT above
constexpr int kDenseLimit = 1400;

LogDet snap_real_phase(LogDet ld) {
  if (ld.is_singular) return ld;
  if (std::abs(ld.phase.imag()) > 1e-6 || std::abs(std::abs(ld.phase) - 1.0) > 1e-6)
    throw std::runtime_error("torus sector determinant has a non-real phase " +
                             std::to_string(ld.phase.real()) + " + " +
                             std::to_string(ld.phase.imag()) + "i; unsupported node gauge");
  ld.phase = ld.phase.real() > 0 ? 1.0 : -1.0;
  return ld;
}

cplx characteristic_with(const DimerGraph& g, const TorusZ& tz, double eps, double eps_p) {
  LogDet ld;
  if (g.nW() <= kDenseLimit)
    ld = logdet(k_twisted(g, eps, eps_p));
  else
    ld = fft_twisted_logdet(g, eps, eps_p);
  if (ld.is_singular) return 0;
  return tz.sigma_star * ld.phase * std::exp(ld.log_modulus - tz.log_z);
}

}  // namespace

Mat sk_sector_matrix(const DimerGraph& g, int sector) {
  if (g.topology != Topology::torus) throw std::invalid_argument("sector matrix: torus only");
  if (sector < 0 || sector > 3) throw std::invalid_argument("sector matrix: sector in 0..3");
  Mat m = Mat::Zero(g.nW(), g.nB());
  for (int e = 0; e < (int)g.edges.size(); ++e)
    m(g.edges[e].w, g.edges[e].b) += sector_edge_weight(g, e, sector);
  return m;
}

double sector_edge_weight(const DimerGraph& g, int edge_id, int sector) {
  const auto& e = g.edges[edge_id];
  double f = e.sK;
  if (e.wrap[0] % 2 != 0 && kSectorZ1[sector] < 0) f = -f;
  if (e.wrap[1] % 2 != 0 && kSectorZ2[sector] < 0) f = -f;
  return f;
}

LogDet sector_logdet(const DimerGraph& g, int sector) {
  if (g.nW() <= kDenseLimit) return logdet(sk_sector_matrix(g, sector));
  return snap_real_phase(fft_twisted_logdet(g, kSectorEps[sector], kSectorEpsP[sector]));
}

Mat sector_kernel_block(const DimerGraph& g, int sector, const std::vector<int>& blacks,
                        const std::vector<int>& whites) {
  const int nb = (int)blacks.size(), nw = (int)whites.size();
  Mat out(nb, nw);
  if (g.nW() <= kDenseLimit) {
    const Mat sk = sk_sector_matrix(g, sector);
    Eigen::PartialPivLU<Mat> lu(sk);
    const Mat inv = lu.inverse();
    if (!((sk * inv - Mat::Identity(sk.rows(), sk.cols())).cwiseAbs().maxCoeff() < 1e-8))
      throw std::runtime_error("sector kernel: sector matrix is singular");
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nw; ++j) out(i, j) = inv(blacks[i], whites[j]);
    return out;
  }
  // FFT kernel in the twisted gauge, rotated back to the real-sector gauge
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(nb * nw);
  for (int b : blacks)
    for (int w : whites) pairs.emplace_back(b, w);
  const double eps = kSectorEps[sector], eps_p = kSectorEpsP[sector];
  const KernelTable kt = fft_twisted_kernel(g, pairs, eps, eps_p);
  const cplx lam = lambda_phys(g, eps, eps_p);
  int idx = 0;
  for (int i = 0; i < nb; ++i) {
    const cplx gb = std::exp(cplx(0, 2 * std::imag(lam * std::conj(g.black_pos[blacks[i]]))));
    for (int j = 0; j < nw; ++j, ++idx) {
      const cplx gw = std::exp(cplx(0, -2 * std::imag(lam * std::conj(g.white_pos[whites[j]]))));
      const cplx v = gb * kt.entries[idx].value * gw;
      if (std::abs(v.imag()) > 1e-7 * (1 + std::abs(v.real())))
        throw std::runtime_error("sector kernel: gauge rotation left a complex entry");
      out(i, j) = v.real();
    }
  }
  return out;
}

TorusZ kasteleyn_z(const DimerGraph& g) {
  TorusZ out;
  double top = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < 3; ++s) {
    out.dets[s] = sector_logdet(g, s);
    if (!out.dets[s].is_singular) top = std::max(top, out.dets[s].log_modulus);
  }
  if (!std::isfinite(top)) throw std::runtime_error("kasteleyn_z: all twist sectors singular");
  double sum = 0;
  for (int s = 0; s < 3; ++s) {
    const auto& d = out.dets[s];
    if (!d.is_singular) sum += d.phase.real() * std::exp(d.log_modulus - top);
  }
  if (std::abs(sum) < 1e-12)
    throw std::runtime_error("kasteleyn_z: sector determinants cancel");
  out.sigma_star = sum > 0 ? 1.0 : -1.0;
  out.log_z = top + std::log(0.5 * std::abs(sum));
  return out;
}

cplx halfperiod_characteristic(const DimerGraph& g, double eps, double eps_p) {
  return characteristic_with(g, kasteleyn_z(g), eps, eps_p);
}

cplx halfperiod_characteristic_mc(const DimerGraph& g, double eps, double eps_p, int n_samples,
                                  uint64_t seed) {
  TorusSampler sampler(g);
  Rng rng(seed);
  cplx acc = 0;
  for (int i = 0; i < n_samples; ++i) {
    const HeightField h = height_from_matching(g, sampler.sample(rng));
    acc += std::exp(4.0 * kI * kPi * (h.m * eps + h.n * eps_p + h.n * h.m));
  }
  return acc / double(n_samples);
}

cplx halfperiod_moment(const DimerGraph& g, double eps, double eps_p) {
  const TorusZ tz = kasteleyn_z(g);
  return 0.5 * (characteristic_with(g, tz, eps, eps_p) +
                characteristic_with(g, tz, eps + 0.5, eps_p) +
                characteristic_with(g, tz, eps, eps_p + 0.5) -
                characteristic_with(g, tz, eps + 0.5, eps_p + 0.5));
}

std::map<std::pair<int, int>, double> halfperiod_law(const DimerGraph& g, int max2n) {
  const TorusZ tz = kasteleyn_z(g);
  const int grid = 2 * max2n + 1;
  // clean moments E(e^{4 i pi (m eps + n eps')}) on the twist grid
  std::vector<cplx> f(grid * grid);
  for (int j = 0; j < grid; ++j)
    for (int l = 0; l < grid; ++l) {
      const double e = double(j) / grid, ep = double(l) / grid;
      f[j * grid + l] = 0.5 * (characteristic_with(g, tz, e, ep) +
                               characteristic_with(g, tz, e + 0.5, ep) +
                               characteristic_with(g, tz, e, ep + 0.5) -
                               characteristic_with(g, tz, e + 0.5, ep + 0.5));
    }
  // invert: frequency of eps is 2m, frequency of eps' is 2n
  std::map<std::pair<int, int>, double> law;
  double total = 0;
  for (int a = -max2n; a <= max2n; ++a)
    for (int b = -max2n; b <= max2n; ++b) {
      cplx p = 0;
      for (int j = 0; j < grid; ++j)
        for (int l = 0; l < grid; ++l)
          p += f[j * grid + l] *
               std::exp(-2.0 * kI * kPi * double(b * j + a * l) / double(grid));
      p /= double(grid) * double(grid);
      if (std::abs(p.imag()) > 1e-7)
        throw std::runtime_error("halfperiod law: non-real mass at a frequency pair");
      double mass = p.real();
      if (mass < -1e-7) throw std::runtime_error("halfperiod law: negative mass");
      if (mass > 1e-13) {
        law[{a, b}] = mass;
        total += mass;
      }
    }
  if (std::abs(total - 1) > 1e-7)
    throw std::runtime_error("halfperiod law: masses sum to " + std::to_string(total));
  for (auto& [k, v] : law) v /= total;
  return law;
}

std::array<double, 4> parity_class_masses(const DimerGraph& g) {
  const TorusZ tz = kasteleyn_z(g);
  double v[3];
  for (int s = 0; s < 3; ++s) {
    const auto& d = tz.dets[s];
    v[s] = d.is_singular
               ? 0.0
               : tz.sigma_star * d.phase.real() * std::exp(d.log_modulus - tz.log_z);
  }
  // invert the sign table of e^{4 i pi (m eps + n eps' + n m)} over the four
  // parity classes of (2n, 2m); the (1/2,1/2) sector determinant vanishes
  std::array<double, 4> p;
  p[0] = 0.25 * (v[0] + v[1] + v[2]);   // ee
  p[1] = 0.25 * (v[0] + v[1] - v[2]);   // eo: 2n odd, 2m even
  p[2] = 0.25 * (v[0] - v[1] + v[2]);   // oe: 2n even, 2m odd
  p[3] = 0.25 * (-v[0] + v[1] + v[2]);  // oo
  return p;
}

InstantonTestResult instanton_test(const DimerGraph& g, int n_samples, uint64_t seed) {
  if (n_samples <= 1) throw std::invalid_argument("instanton test: need samples");
  TorusSampler sampler(g);
  Rng rng(seed);

  std::map<std::pair<int, int>, double> hist;
  double s1n = 0, s2n = 0, s3n = 0, s1m = 0, s2m = 0, s3m = 0;
  for (int i = 0; i < n_samples; ++i) {
    const auto [n, m] = sampler.sample_periods(rng);
    hist[{int(std::lround(2 * n)), int(std::lround(2 * m))}] += 1.0 / n_samples;
    s1n += n, s2n += n * n, s3n += n * n * n;
    s1m += m, s2m += m * m, s3m += m * m * m;
  }

  const cplx tau = g.period2 / g.period1;
  std::map<std::pair<int, int>, double> law;
  double norm = 0;
  for (int a = -12; a <= 12; ++a)
    for (int b = -12; b <= 12; ++b) {
      const double w = instanton_weight(0.5 * a, 0.5 * b, tau);
      law[{a, b}] = w;
      norm += w;
    }
  for (auto& [k, v] : law) v /= norm;

  InstantonTestResult res;
  res.samples = n_samples;
  res.tv_distance = 0;
  for (const auto& [k, v] : law) {
    const auto it = hist.find(k);
    res.tv_distance += 0.5 * std::abs((it == hist.end() ? 0.0 : it->second) - v);
  }
  for (const auto& [k, v] : hist)
    if (!law.count(k)) res.tv_distance += 0.5 * v;

  double law_vn = 0, law_vm = 0;
  for (const auto& [k, v] : law) {
    law_vn += v * 0.25 * k.first * k.first;
    law_vm += v * 0.25 * k.second * k.second;
  }
  const double inv = 1.0 / n_samples;
  const double mn = s1n * inv, mm = s1m * inv;
  const double vn = s2n * inv - mn * mn, vm = s2m * inv - mm * mm;
  res.var_ratio_n = vn / law_vn;
  res.var_ratio_m = vm / law_vm;
  const double se = std::sqrt(6.0 / n_samples);
  const double g1n = (s3n * inv - 3 * mn * vn - mn * mn * mn) / std::pow(vn, 1.5);
  const double g1m = (s3m * inv - 3 * mm * vm - mm * mm * mm) / std::pow(vm, 1.5);
  res.skew_z_n = g1n / se;
  res.skew_z_m = g1m / se;
  return res;
}

}  // namespace dimerlab
