#include <fftw3.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "dimerlab/linalg.hpp"

namespace dimerlab {

namespace {

// block-circulant symbol of the twisted operator over the biperiodic cell:
// one kW x kB block per cell offset, entries summed with exact aliasing
struct BlockSymbol {
  int n1 = 0, n2 = 0, kW = 0, kB = 0;
  std::vector<std::pair<std::array<int, 2>, CMat>> offsets;
};

BlockSymbol build_symbol(const DimerGraph& g, double eps, double eps_p) {
  if (g.topology != Topology::torus || !g.cell)
    throw std::invalid_argument("fft path requires a biperiodic graph with a cell structure");
  const auto& cs = *g.cell;
  BlockSymbol s;
  s.n1 = cs.n1;
  s.n2 = cs.n2;
  s.kW = cs.kW;
  s.kB = cs.kB;
  const cplx lam = lambda_phys(g, eps, eps_p);
  std::map<std::array<int, 2>, CMat> acc;
  for (const auto& e : g.edges) {
    if (cs.white_cell[e.w] != 0) continue;  // one representative cell
    const int wa = cs.white_cell[e.w] % s.n1, wb = cs.white_cell[e.w] / s.n1;
    const int ba = cs.black_cell[e.b] % s.n1, bb = cs.black_cell[e.b] / s.n1;
    std::array<int, 2> d{((ba - wa) % s.n1 + s.n1) % s.n1, ((bb - wb) % s.n2 + s.n2) % s.n2};
    auto it = acc.find(d);
    if (it == acc.end()) it = acc.emplace(d, CMat::Zero(s.kW, s.kB)).first;
    const cplx tw = std::exp(cplx(0, 2 * std::imag(lam * std::conj(e.disp))));
    it->second(cs.white_slot[e.w], cs.black_slot[e.b]) += e.sK * tw;
  }
  for (auto& [d, m] : acc) s.offsets.emplace_back(d, std::move(m));
  return s;
}

CMat symbol_at(const BlockSymbol& s, int k1, int k2) {
  CMat m = CMat::Zero(s.kW, s.kB);
  for (const auto& [d, blk] : s.offsets) {
    const double ph = 2 * M_PI * (double(k1) * d[0] / s.n1 + double(k2) * d[1] / s.n2);
    m += std::exp(cplx(0, ph)) * blk;
  }
  return m;
}

// overall magnitude of the symbol, used to recognize blocks that vanish
// entrywise (cancellation leaves O(eps) dust that LU pivoting cannot flag)
double symbol_scale(const BlockSymbol& s) {
  double scale = 0;
  for (const auto& [d, blk] : s.offsets) scale = std::max(scale, blk.cwiseAbs().maxCoeff());
  return scale;
}

// inverse symbol on the whole frequency grid, index k1 + n1 * k2
std::vector<CMat> inverse_symbol_grid(const BlockSymbol& s, double* max_inv_norm) {
  std::vector<CMat> inv;
  inv.reserve((size_t)s.n1 * s.n2);
  const double scale = symbol_scale(s);
  double worst = 0;
  for (int k2 = 0; k2 < s.n2; ++k2)
    for (int k1 = 0; k1 < s.n1; ++k1) {
      CMat m = symbol_at(s, k1, k2);
      if (m.cwiseAbs().maxCoeff() < 1e-10 * scale)
        throw std::runtime_error("fft kernel: singular symbol block; twist is not invertible");
      Eigen::PartialPivLU<CMat> lu(m);
      CMat mi = lu.inverse();
      if (!((m * mi - CMat::Identity(s.kW, s.kW)).norm() < 1e-8))
        throw std::runtime_error("fft kernel: singular symbol block; twist is not invertible");
      worst = std::max(worst, mi.cwiseAbs().maxCoeff());
      inv.push_back(std::move(mi));
    }
  if (max_inv_norm) *max_inv_norm = worst;
  return inv;
}

struct NodeKey {
  int cell_a, cell_b, slot;
};

NodeKey white_key(const CellStructure& cs, int w) {
  return {cs.white_cell[w] % cs.n1, cs.white_cell[w] / cs.n1, cs.white_slot[w]};
}
NodeKey black_key(const CellStructure& cs, int b) {
  return {cs.black_cell[b] % cs.n1, cs.black_cell[b] / cs.n1, cs.black_slot[b]};
}

int perm_sign(const std::vector<int>& cell, const std::vector<int>& slot, int k) {
  std::vector<int> p(cell.size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = cell[i] * k + slot[i];
  std::vector<uint8_t> seen(p.size(), 0);
  int sign = 1;
  for (size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (int j = (int)i; !seen[j]; j = p[j]) {
      seen[j] = 1;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

}  // namespace

LogDet fft_twisted_logdet(const DimerGraph& g, double eps, double eps_p) {
  const BlockSymbol s = build_symbol(g, eps, eps_p);
  if (s.kW != s.kB)
    throw std::invalid_argument("fft logdet: cell must hold equal white and black counts");
  const double scale = symbol_scale(s);
  LogDet total;
  for (int k2 = 0; k2 < s.n2; ++k2)
    for (int k1 = 0; k1 < s.n1; ++k1) {
      const CMat m = symbol_at(s, k1, k2);
      if (m.cwiseAbs().maxCoeff() < 1e-10 * scale) return LogDet::singular();
      LogDet blk = logdet(m);
      if (blk.is_singular) return LogDet::singular();
      total.log_modulus += blk.log_modulus;
      total.phase *= blk.phase;
      total.phase /= std::abs(total.phase);
    }
  // reordering nodes into (cell, slot) order flips the sign by the parity of
  // the two permutations
  const auto& cs = *g.cell;
  total.phase *= double(perm_sign(cs.white_cell, cs.white_slot, cs.kW) *
                        perm_sign(cs.black_cell, cs.black_slot, cs.kB));
  return total;
}

KernelTable fft_twisted_kernel(const DimerGraph& g,
                               const std::vector<std::pair<int, int>>& pairs, double eps,
                               double eps_p) {
  const BlockSymbol s = build_symbol(g, eps, eps_p);
  const auto& cs = *g.cell;
  const size_t N = (size_t)s.n1 * s.n2;
  double max_inv = 0;
  auto inv = inverse_symbol_grid(s, &max_inv);

  KernelTable table;
  table.method = "fft_twisted";
  table.eps = eps;
  table.eps_p = eps_p;
  table.error_bound = 1e-13 * max_inv * std::sqrt((double)N);
  table.entries.reserve(pairs.size());

  if (pairs.size() <= 64) {
    // direct frequency sums, one O(N) pass per requested pair
    std::vector<cplx> w1(s.n1), w2(s.n2);
    for (int k = 0; k < s.n1; ++k) w1[k] = std::exp(cplx(0, 2 * M_PI * k / s.n1));
    for (int k = 0; k < s.n2; ++k) w2[k] = std::exp(cplx(0, 2 * M_PI * k / s.n2));
    for (auto [b, w] : pairs) {
      const NodeKey kb = black_key(cs, b), kw = white_key(cs, w);
      const int da = ((kb.cell_a - kw.cell_a) % s.n1 + s.n1) % s.n1;
      const int db = ((kb.cell_b - kw.cell_b) % s.n2 + s.n2) % s.n2;
      cplx sum = 0;
      for (int k2 = 0; k2 < s.n2; ++k2)
        for (int k1 = 0; k1 < s.n1; ++k1)
          sum += inv[k1 + (size_t)s.n1 * k2](kb.slot, kw.slot) *
                 w1[(k1 * da) % s.n1] * w2[(k2 * db) % s.n2];
      table.entries.push_back({b, w, sum / double(N)});
    }
    return table;
  }

  // large requests: inverse transform each slot pair once, then look offsets up
  std::vector<std::vector<cplx>> grids((size_t)s.kB * s.kW,
                                       std::vector<cplx>(N));
  {
    fftw_complex* buf = fftw_alloc_complex(N);
    fftw_plan plan =
        fftw_plan_dft_2d(s.n2, s.n1, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (int sb = 0; sb < s.kB; ++sb)
      for (int sw = 0; sw < s.kW; ++sw) {
        for (size_t i = 0; i < N; ++i) {
          buf[i][0] = inv[i](sb, sw).real();
          buf[i][1] = inv[i](sb, sw).imag();
        }
        fftw_execute(plan);
        auto& gr = grids[sb + (size_t)s.kB * sw];
        for (size_t i = 0; i < N; ++i) gr[i] = cplx(buf[i][0], buf[i][1]) / double(N);
      }
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
  for (auto [b, w] : pairs) {
    const NodeKey kb = black_key(cs, b), kw = white_key(cs, w);
    const int da = ((kb.cell_a - kw.cell_a) % s.n1 + s.n1) % s.n1;
    const int db = ((kb.cell_b - kw.cell_b) % s.n2 + s.n2) % s.n2;
    table.entries.push_back(
        {b, w, grids[kb.slot + (size_t)s.kB * kw.slot][da + (size_t)s.n1 * db]});
  }
  return table;
}

namespace {

// memoized twist-averaged plane tables on an L x L torus: for each slot pair
// and cell offset, the de-phased average over the twists (1/2,0), (0,1/2),
// (1/4,1/4), whose finite-size corrections are O(1/L^2) after taking real parts
struct BulkTable {
  int n = 0;           // cells per direction
  double spacing = 0;  // site spacing
  std::vector<double> avg;  // [sb + 2*sw + 4*(c1 + n*c2)]
  int white_slot_parity[2] = {0, 0};  // by i & 1 of the white site
  int black_slot_parity[2] = {0, 0};  // by i & 1 of the black site
};

const BulkTable& bulk_table(int L, double delta) {
  static std::map<std::pair<int, long long>, BulkTable> memo;
  const auto key = std::make_pair(L, (long long)llround(delta * 1e12));
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;

  DimerGraph g = build_square_lattice(L, L, Topology::torus, delta);
  const auto& cs = *g.cell;
  BulkTable t;
  t.n = cs.n1;
  t.spacing = g.spacing();
  for (int i : {0, 1}) {
    t.white_slot_parity[i] = cs.white_slot[g.site(i == 0 ? 0 : 1, i == 0 ? 1 : 0)];
    t.black_slot_parity[i] = cs.black_slot[g.site(i, i)];
  }
  const size_t N = (size_t)t.n * t.n;
  t.avg.assign(4 * N, 0.0);
  const double twists[3][2] = {{0.5, 0.0}, {0.0, 0.5}, {0.25, 0.25}};
  for (const auto& tw : twists) {
    const BlockSymbol s = build_symbol(g, tw[0], tw[1]);
    auto inv = inverse_symbol_grid(s, nullptr);
    const cplx lam = lambda_phys(g, tw[0], tw[1]);
    // slot offsets within a cell, in the slot numbering of the structure
    std::vector<cplx> wpos(cs.kW), bpos(cs.kB);
    wpos[t.white_slot_parity[0]] = cplx(0, t.spacing);
    wpos[t.white_slot_parity[1]] = cplx(t.spacing, 0);
    bpos[t.black_slot_parity[0]] = cplx(0, 0);
    bpos[t.black_slot_parity[1]] = cplx(t.spacing, t.spacing);
    fftw_complex* buf = fftw_alloc_complex(N);
    fftw_plan plan = fftw_plan_dft_2d(t.n, t.n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (int sb = 0; sb < 2; ++sb)
      for (int sw = 0; sw < 2; ++sw) {
        for (size_t i = 0; i < N; ++i) {
          buf[i][0] = inv[i](sb, sw).real();
          buf[i][1] = inv[i](sb, sw).imag();
        }
        fftw_execute(plan);
        const double cell = 2 * t.spacing;
        for (int c2 = 0; c2 < t.n; ++c2)
          for (int c1 = 0; c1 < t.n; ++c1) {
            const size_t i = c1 + (size_t)t.n * c2;
            // minimal lift of the displacement, for the de-twisting phase
            const int m1 = c1 > t.n / 2 ? c1 - t.n : c1;
            const int m2 = c2 > t.n / 2 ? c2 - t.n : c2;
            const cplx d = bpos[sb] - wpos[sw] + cell * cplx(m1, m2);
            const cplx phase = std::exp(cplx(0, 2 * std::imag(lam * std::conj(d))));
            const cplx v = cplx(buf[i][0], buf[i][1]) / double(N);
            t.avg[sb + 2 * sw + 4 * i] += (phase * v).real() / 3.0;
          }
      }
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
  return memo.emplace(key, std::move(t)).first->second;
}

double bulk_lookup(const BulkTable& t, int wi, int wj, int di, int dj) {
  auto fdiv = [](int x) { return x >= 0 ? x / 2 : (x - 1) / 2; };
  const int bi = wi + di, bj = wj + dj;
  const int c1 = ((fdiv(bi) - fdiv(wi)) % t.n + t.n) % t.n;
  const int c2 = ((fdiv(bj) - fdiv(wj)) % t.n + t.n) % t.n;
  const int sw = t.white_slot_parity[wi & 1];
  const int sb = t.black_slot_parity[bi & 1];
  return t.avg[sb + 2 * sw + 4 * (c1 + (size_t)t.n * c2)];
}

}  // namespace

BulkKernelResult bulk_inverse_square(int white_i, int white_j, int di, int dj, double delta,
                                     int min_size) {
  if (((white_i + white_j) & 1) == 0)
    throw std::invalid_argument("bulk kernel: white site coordinates must have odd sum");
  if (((di + dj) & 1) == 0)
    throw std::invalid_argument("bulk kernel: displacement must connect white to black");
  const int dist = std::abs(di) + std::abs(dj);
  int L = std::max({min_size, 8 * dist, 16});
  L = (L + 3) & ~3;  // multiple of 4 so the half-size comparison torus stays even
  const auto& big = bulk_table(L, delta);
  const auto& small = bulk_table(L / 2, delta);
  const double v = bulk_lookup(big, white_i, white_j, di, dj);
  const double v2 = bulk_lookup(small, white_i, white_j, di, dj);
  return {cplx(v, 0), std::abs(v - v2) / 2.0 + 1e-12, L};
}

}  // namespace dimerlab
