#include "dimerlab/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "dimerlab/height.hpp"
#include "dimerlab/torus_obs.hpp"

namespace dimerlab {

LocalStat local_probability(const DimerGraph& g, const Mat& sk_inv,
                            const std::vector<int>& edge_ids) {
  const int k = (int)edge_ids.size();
  LocalStat out;
  out.edges = edge_ids;
  // edges sharing a vertex can never co-occur in a matching
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const auto &a = g.edges[edge_ids[i]], &b = g.edges[edge_ids[j]];
      if (a.w == b.w || a.b == b.b) return out;
    }
  double pref = 1;
  Mat d(k, k);
  for (int i = 0; i < k; ++i) {
    const auto& ei = g.edges[edge_ids[i]];
    pref *= ei.sK;
    for (int j = 0; j < k; ++j) d(i, j) = sk_inv(ei.b, g.edges[edge_ids[j]].w);
  }
  double p = k == 0 ? 1.0 : pref * d.determinant();
  if (p < 0) {
    if (p < -1e-8)
      std::fprintf(stderr, "local_probability: clamping %.3e to 0 (beyond round-off)\n", p);
    p = 0;
  }
  if (p > 1) {
    if (p > 1 + 1e-8)
      std::fprintf(stderr, "local_probability: clamping %.3e to 1 (beyond round-off)\n", p);
    p = 1;
  }
  out.probability = p;
  return out;
}

Matching sample_matching_plane(const DimerGraph& g, const Mat& sk_inv, Rng& rng) {
  const int n = g.nW();
  if (g.nB() != n) throw std::invalid_argument("sampler: region is unbalanced");
  Mat C = sk_inv;  // inv(b, w), Schur-conditioned as whites get decided
  Matching m(n, -1);
  std::vector<uint8_t> used(g.nB(), 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<int, double>> cand;
  for (int w = 0; w < n; ++w) {
    cand.clear();
    double total = 0;
    for (int e : g.white_edges[w]) {
      const auto& me = g.edges[e];
      if (used[me.b]) continue;
      double p = me.sK * C(me.b, w);
      if (p < -1e-9 || p > 1 + 1e-9)
        throw std::runtime_error("sampler: conditional probability " + std::to_string(p) +
                                 " for edge " + std::to_string(e) + " at white " +
                                 std::to_string(w) + " is outside [0,1]");
      p = std::min(std::max(p, 0.0), 1.0);
      cand.emplace_back(e, p);
      total += p;
    }
    if (total < 1 - 1e-6 || total > 1 + 1e-6)
      throw std::runtime_error("sampler: conditionals at white " + std::to_string(w) +
                               " sum to " + std::to_string(total));
    double u = unif(rng) * total;
    int pick = cand.back().first;
    for (const auto& [e, p] : cand) {
      if (u < p) {
        pick = e;
        break;
      }
      u -= p;
    }
    const auto& me = g.edges[pick];
    const double piv = C(me.b, w);
    const Vec col = C.col(w);
    const Eigen::RowVectorXd row = C.row(me.b) / piv;
    C.noalias() -= col * row;
    used[me.b] = 1;
    m[w] = pick;
  }
  return m;
}

Matching sample_matching_plane(const DimerGraph& g, Rng& rng) {
  const Mat sk = sk_matrix(g);
  if (sk.rows() != sk.cols()) throw std::invalid_argument("sampler: region is unbalanced");
  Eigen::PartialPivLU<Mat> lu(sk);
  const Mat inv = lu.inverse();
  if (!((sk * inv - Mat::Identity(sk.rows(), sk.cols())).cwiseAbs().maxCoeff() < 1e-8))
    throw std::runtime_error("sampler: sign matrix is singular (region has no matching?)");
  return sample_matching_plane(g, inv, rng);
}

namespace {

int parity_class(double n, double m) {
  const long a = std::lround(2 * n), b = std::lround(2 * m);
  if (std::abs(2 * n - a) > 1e-6 || std::abs(2 * m - b) > 1e-6)
    throw std::runtime_error("torus sampler: half-periods are not half-integers");
  return ((a & 1L) == 0 && (b & 1L) == 0) ? 0 : 1;  // 0 = even-even class
}

constexpr double kPivotTol = 1e-9;  // relative det-ratio health threshold
constexpr double kRankTol = 1e-10;  // relative LU-diagonal health threshold
constexpr int kRefreshEvery = 64;   // periodic refactor of the running inverse

// Signed cylinder mass coef * det(M) of one twist sector, where M is the
// growing minor of the sector kernel on the conditioned pairs.  While M is
// invertible the mass of a one-step extension is a bordered determinant
// ratio against a running inverse; through singular stretches it is a fresh
// LU determinant of the bordered minor, so a signed prefix mass that passes
// through zero never cuts off its extensions.
class SectorChain {
 public:
  SectorChain(double coef, int capacity) {
    coef_sign_ = coef > 0 ? 1.0 : (coef < 0 ? -1.0 : 0.0);
    coef_log_ = std::log(std::abs(coef));
    m_.setZero(capacity, capacity);
    inv_.setZero(capacity, capacity);
    reset();
  }

  void reset() {
    k_ = 0;
    fresh_ = 0;
    healthy_ = true;
    sign_ = coef_sign_;
    log_ = coef_log_;
  }

  // cache inv * c for the column shared by this step's candidates
  void prepare(const Vec& c) {
    if (healthy_ && k_ > 0) u_ = inv_.topLeftCorner(k_, k_) * c;
  }

  struct Mass {
    double sign = 0, log = 0;  // signed magnitude sign * e^log
    double value(double log_scale) const {
      return sign == 0 ? 0.0 : sign * std::exp(log - log_scale);
    }
  };

  // signed mass of the prefix extended by row r, the prepared column c, corner d
  Mass extended(const Vec& r, const Vec& c, double d) const {
    if (!healthy_) return bordered_mass(r, c, d);
    Mass out;
    const double alpha = k_ == 0 ? d : d - r.dot(u_);
    if (alpha == 0 || sign_ == 0) return out;
    out.sign = sign_ * (alpha > 0 ? 1.0 : -1.0);
    out.log = log_ + std::log(std::abs(alpha));
    return out;
  }

  // append the chosen extension (same prepared column) and update the state
  void choose(const Vec& r, const Vec& c, double d) {
    m_.block(k_, 0, 1, k_) = r.transpose();
    m_.block(0, k_, k_, 1) = c.head(k_);
    m_(k_, k_) = d;
    if (healthy_ && fresh_ < kRefreshEvery) {
      const double dot = k_ == 0 ? 0.0 : r.dot(u_);
      const double alpha = d - dot;
      if (std::abs(alpha) > kPivotTol * (std::abs(d) + std::abs(dot) + 1e-300)) {
        if (k_ > 0) {
          v_ = inv_.topLeftCorner(k_, k_).transpose() * r;
          inv_.topLeftCorner(k_, k_).noalias() += u_ * v_.transpose() / alpha;
          inv_.block(0, k_, k_, 1) = -u_ / alpha;
          inv_.block(k_, 0, 1, k_) = -v_.transpose() / alpha;
        }
        inv_(k_, k_) = 1.0 / alpha;
        sign_ *= alpha > 0 ? 1.0 : -1.0;
        log_ += std::log(std::abs(alpha));
        ++k_;
        ++fresh_;
        return;
      }
    }
    ++k_;
    refactor();
  }

 private:
  Mass slogdet(const Eigen::PartialPivLU<Mat>& lu, int n) const {
    Mass out;
    const auto diag = lu.matrixLU().diagonal();
    double sgn = lu.permutationP().determinant() > 0 ? 1.0 : -1.0;
    double lg = 0;
    for (int i = 0; i < n; ++i) {
      if (diag(i) == 0) return out;
      sgn *= diag(i) > 0 ? 1.0 : -1.0;
      lg += std::log(std::abs(diag(i)));
    }
    out.sign = coef_sign_ * sgn;
    out.log = coef_log_ + lg;
    return out;
  }

  Mass bordered_mass(const Vec& r, const Vec& c, double d) const {
    Mat b(k_ + 1, k_ + 1);
    b.topLeftCorner(k_, k_) = m_.topLeftCorner(k_, k_);
    b.block(k_, 0, 1, k_) = r.transpose();
    b.block(0, k_, k_, 1) = c.head(k_);
    b(k_, k_) = d;
    Eigen::PartialPivLU<Mat> lu(b);
    return slogdet(lu, k_ + 1);
  }

  void refactor() {
    fresh_ = 0;
    Eigen::PartialPivLU<Mat> lu(m_.topLeftCorner(k_, k_));
    const auto diag = lu.matrixLU().diagonal();
    double dmax = 0, dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k_; ++i) {
      dmax = std::max(dmax, std::abs(diag(i)));
      dmin = std::min(dmin, std::abs(diag(i)));
    }
    if (k_ > 0 && dmin <= kRankTol * dmax) {
      healthy_ = false;
      sign_ = 0;
      log_ = 0;
      return;
    }
    healthy_ = true;
    inv_.topLeftCorner(k_, k_) = lu.inverse();
    const Mass s = slogdet(lu, k_);
    sign_ = s.sign;
    log_ = s.log;
  }

  Mat m_, inv_;
  Vec u_, v_;
  double coef_sign_ = 0, coef_log_ = 0, sign_ = 0, log_ = 0;
  int k_ = 0, fresh_ = 0;
  bool healthy_ = true;
};

}  // namespace

TorusSampler::TorusSampler(const DimerGraph& g) : g_(&g) {
  if (g.topology != Topology::torus || g.grid_w <= 0)
    throw std::invalid_argument("torus sampler: square-grid torus required");
  double top = -std::numeric_limits<double>::infinity();
  LogDet d[3];
  for (int s = 0; s < 3; ++s) {
    d[s] = sector_logdet(g, s);
    if (d[s].is_singular)
      throw std::runtime_error("torus sampler: a twist sector determinant vanishes");
    top = std::max(top, d[s].log_modulus);
  }
  double sum = 0;
  for (int s = 0; s < 3; ++s) sum += d[s].phase.real() * std::exp(d[s].log_modulus - top);
  if (std::abs(sum) < 1e-12)
    throw std::runtime_error("torus sampler: sector determinants cancel");
  const double sigma = sum > 0 ? 1.0 : -1.0;
  log_z_ = top + std::log(0.5 * std::abs(sum));
  double check = 0;
  for (int s = 0; s < 3; ++s) {
    coef_[s] = sigma * d[s].phase.real() * std::exp(d[s].log_modulus - log_z_ - std::log(2.0));
    check += coef_[s];
  }
  if (std::abs(check - 1) > 1e-8)
    throw std::runtime_error("torus sampler: sector coefficients sum to " +
                             std::to_string(check));
  const CutCycle ca = cut_cycle_a(g), cb = cut_cycle_b(g);
  cut_a_ = {ca.edges, ca.sign, ca.p_sum};
  cut_b_ = {cb.edges, cb.sign, cb.p_sum};
}

void TorusSampler::ensure_full() {
  if (full_ready_) return;
  if (g_->nW() > 4096)
    throw std::invalid_argument("torus sampler: graph too large for full sampling");
  for (int s = 0; s < 3; ++s) {
    sk_[s] = sk_sector_matrix(*g_, s);
    Eigen::PartialPivLU<Mat> lu(sk_[s]);
    full_inv_[s] = lu.inverse();
    // spot-check a few columns of the inverse
    const int n = (int)sk_[s].rows();
    for (int probe = 0; probe < std::min(n, 5); ++probe) {
      const int col = (probe * 2654435761u) % n;
      Vec r = sk_[s] * full_inv_[s].col(col);
      r(col) -= 1;
      if (r.cwiseAbs().maxCoeff() > 1e-7)
        throw std::runtime_error("torus sampler: sector inverse failed its residual check");
    }
  }
  full_ready_ = true;
}

Matching TorusSampler::sample(Rng& rng) {
  ensure_full();
  const DimerGraph& g = *g_;
  const int n = g.nW();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::array<SectorChain, 3> ch = {SectorChain(coef_[0], n), SectorChain(coef_[1], n),
                                   SectorChain(coef_[2], n)};
  std::vector<int> bsel;                     // conditioned blacks, in chain order
  std::array<std::vector<double>, 3> selsk;  // sector edge factors of the chosen pairs
  std::array<Vec, 3> col;
  std::vector<std::pair<int, double>> cand;
  Vec row;
  while (true) {
    for (auto& c : ch) c.reset();
    bsel.clear();
    for (auto& v : selsk) v.clear();
    double logq = 0;
    Matching m(n, -1);
    std::vector<uint8_t> used(g.nB(), 0);
    for (int w = 0; w < n; ++w) {
      const int k = (int)bsel.size();
      for (int s = 0; s < 3; ++s) {
        col[s].resize(k);
        for (int i = 0; i < k; ++i) col[s](i) = selsk[s][i] * full_inv_[s](bsel[i], w);
        ch[s].prepare(col[s]);
      }
      cand.clear();
      double total = 0;
      for (int e : g.white_edges[w]) {
        const auto& me = g.edges[e];
        if (used[me.b]) continue;
        double p = 0;
        for (int s = 0; s < 3; ++s) {
          const double sk = sector_edge_weight(g, e, s);
          row.resize(k);
          for (int j = 0; j < k; ++j) row(j) = sk * full_inv_[s](me.b, j);
          const double d = sk * full_inv_[s](me.b, w);
          p += ch[s].extended(row, col[s], d).value(logq);
        }
        if (p < -1e-6 || p > 1 + 1e-6)
          throw std::runtime_error("torus sampler: conditional " + std::to_string(p) +
                                   " for edge " + std::to_string(e) + " is outside [0,1]");
        cand.emplace_back(e, std::min(std::max(p, 0.0), 1.0));
        total += cand.back().second;
      }
      if (total < 1 - 1e-5 || total > 1 + 1e-5)
        throw std::runtime_error("torus sampler: conditionals at white " + std::to_string(w) +
                                 " sum to " + std::to_string(total));
      double u = unif(rng) * total;
      int pick = cand.back().first;
      double ppick = cand.back().second;
      for (const auto& [e, p] : cand) {
        if (u < p) {
          pick = e;
          ppick = p;
          break;
        }
        u -= p;
      }
      const auto& me = g.edges[pick];
      for (int s = 0; s < 3; ++s) {
        const double sk = sector_edge_weight(g, pick, s);
        row.resize(k);
        for (int j = 0; j < k; ++j) row(j) = sk * full_inv_[s](me.b, j);
        ch[s].choose(row, col[s], sk * full_inv_[s](me.b, w));
        selsk[s].push_back(sk);
      }
      logq += std::log(std::max(ppick, 1e-300));
      bsel.push_back(me.b);
      used[me.b] = 1;
      m[w] = pick;
    }
    const HeightField h = height_from_matching(g, m);
    if (parity_class(h.n, h.m) != 0 || unif(rng) < 1.0 / 3.0) return m;
  }
}

void TorusSampler::ensure_block(const std::vector<int>& extra) {
  if (blk_ready_ && extra == blk_extra_) return;
  const DimerGraph& g = *g_;
  blk_edges_.clear();
  std::unordered_map<int, int> seen;
  auto add_edge = [&](int e) {
    if (seen.emplace(e, (int)blk_edges_.size()).second) blk_edges_.push_back(e);
  };
  for (int e : cut_a_.edges) add_edge(e);
  for (int e : cut_b_.edges) add_edge(e);
  for (int e : extra) add_edge(e);

  std::vector<int> blacks, whites;
  std::unordered_map<int, int> bidx, widx;
  blk_row_.clear();
  blk_col_.clear();
  for (int e : blk_edges_) {
    const auto& me = g.edges[e];
    auto [bi, bnew] = bidx.emplace(me.b, (int)blacks.size());
    if (bnew) blacks.push_back(me.b);
    auto [wi, wnew] = widx.emplace(me.w, (int)whites.size());
    if (wnew) whites.push_back(me.w);
    blk_row_.push_back(bi->second);
    blk_col_.push_back(wi->second);
  }
  const int ne = (int)blk_edges_.size();
  for (int s = 0; s < 3; ++s) {
    blk_inv_[s] = sector_kernel_block(g, s, blacks, whites);
    blk_sk_[s].clear();
    for (int e : blk_edges_) blk_sk_[s].push_back(sector_edge_weight(g, e, s));
    blk_L_[s].resize(ne, ne);
    for (int i = 0; i < ne; ++i)
      for (int j = 0; j < ne; ++j)
        blk_L_[s](i, j) = blk_sk_[s][i] * blk_inv_[s](blk_row_[i], blk_col_[j]);
  }
  blk_extra_ = extra;
  blk_ready_ = true;
}

EdgeSetSample TorusSampler::draw_block(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int ne = (int)blk_edges_.size();
  const int na = (int)cut_a_.edges.size();
  std::array<SectorChain, 3> ch = {SectorChain(coef_[0], ne), SectorChain(coef_[1], ne),
                                   SectorChain(coef_[2], ne)};
  std::array<Vec, 3> col;
  Vec rp, ra;
  std::vector<double> typesign(ne);
  while (true) {
    for (auto& c : ch) c.reset();
    double logq = 0;
    std::vector<int> x(ne, 0);
    for (int k = 0; k < ne; ++k) {
      for (int s = 0; s < 3; ++s) {
        col[s].resize(k);
        for (int i = 0; i < k; ++i) col[s](i) = typesign[i] * blk_L_[s](i, k);
        ch[s].prepare(col[s]);
      }
      double ppres = 0, pabs = 0;
      for (int s = 0; s < 3; ++s) {
        rp = blk_L_[s].row(k).head(k).transpose();
        ra = -rp;
        const double d = blk_L_[s](k, k);
        ppres += ch[s].extended(rp, col[s], d).value(logq);
        pabs += ch[s].extended(ra, col[s], 1 - d).value(logq);
      }
      if (ppres < -1e-6 || ppres > 1 + 1e-6 || std::abs(ppres + pabs - 1) > 1e-5)
        throw std::runtime_error("torus sampler: marginal " + std::to_string(ppres) + " / " +
                                 std::to_string(pabs) + " for edge " +
                                 std::to_string(blk_edges_[k]) + " is inconsistent");
      ppres = std::min(std::max(ppres, 0.0), 1.0);
      x[k] = unif(rng) < ppres ? 1 : 0;
      for (int s = 0; s < 3; ++s) {
        rp = blk_L_[s].row(k).head(k).transpose();
        const double d = blk_L_[s](k, k);
        if (x[k]) {
          ch[s].choose(rp, col[s], d);
        } else {
          ra = -rp;
          ch[s].choose(ra, col[s], 1 - d);
        }
      }
      typesign[k] = x[k] ? 1.0 : -1.0;
      logq += std::log(std::max(x[k] ? ppres : 1 - ppres, 1e-300));
    }
    EdgeSetSample out;
    double sa = cut_a_.p_sum, sb = cut_b_.p_sum;
    for (int i = 0; i < na; ++i) sa -= cut_a_.sign[i] * x[i];
    for (int j = 0; j < (int)cut_b_.edges.size(); ++j) sb -= cut_b_.sign[j] * x[na + j];
    out.n = sa / 2;
    out.m = sb / 2;
    if (parity_class(out.n, out.m) != 0 || unif(rng) < 1.0 / 3.0) {
      out.present = std::move(x);
      return out;
    }
  }
}

EdgeSetSample TorusSampler::sample_edge_set(const std::vector<int>& edge_ids, Rng& rng) {
  ensure_block(edge_ids);
  EdgeSetSample s = draw_block(rng);
  std::vector<int> slot(edge_ids.size());
  {
    std::unordered_map<int, int> pos;
    for (int k = 0; k < (int)blk_edges_.size(); ++k) pos[blk_edges_[k]] = k;
    for (size_t i = 0; i < edge_ids.size(); ++i) slot[i] = pos.at(edge_ids[i]);
  }
  std::vector<int> present(edge_ids.size());
  for (size_t i = 0; i < edge_ids.size(); ++i) present[i] = s.present[slot[i]];
  s.present = std::move(present);
  return s;
}

std::pair<double, double> TorusSampler::sample_periods(Rng& rng) {
  ensure_block({});
  const EdgeSetSample s = draw_block(rng);
  return {s.n, s.m};
}

}  // namespace dimerlab
