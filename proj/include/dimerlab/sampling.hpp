#pragma once
#include <cstdint>
#include <random>
#include <vector>

#include "dimerlab/enumerate.hpp"
#include "dimerlab/linalg.hpp"

namespace dimerlab {

using Rng = std::mt19937_64;

// P(all edges in random matching) = (prod sK(w_i,b_i)) det[inv(b_i,w_j)];
// sk_inv is the inverse of the region's sign matrix. Tiny negative round-off
// is clamped to 0 (warning threshold 1e-8).
struct LocalStat {
  std::vector<int> edges;
  double probability = 0;
};
LocalStat local_probability(const DimerGraph& g, const Mat& sk_inv,
                            const std::vector<int>& edge_ids);

// exact sequential sampler for planar regions (real sK, all conditionals >= 0)
Matching sample_matching_plane(const DimerGraph& g, Rng& rng);

// the same, reusing a precomputed inverse of the sign matrix (restored on exit)
Matching sample_matching_plane(const DimerGraph& g, const Mat& sk_inv, Rng& rng);

// joint indicator sample of a requested edge subset, with the half-periods
// of the underlying configuration read off the torus cut cycles
struct EdgeSetSample {
  std::vector<int> present;  // 0/1 per requested edge
  double n = 0, m = 0;
};

// exact torus sampler: runs the three non-degenerate twist sectors as signed
// chains of one determinantal filter, so the proposal is the positive mixture
// with class weights {3,1,1,1}; a rejection step restores the dimer measure
class TorusSampler {
 public:
  explicit TorusSampler(const DimerGraph& g);
  double log_z() const { return log_z_; }
  const std::array<double, 3>& coef() const { return coef_; }

  Matching sample(Rng& rng);  // full matching; materializes dense sector kernels
  EdgeSetSample sample_edge_set(const std::vector<int>& edge_ids, Rng& rng);
  std::pair<double, double> sample_periods(Rng& rng);  // (n, m) only

 private:
  void ensure_full();
  void ensure_block(const std::vector<int>& extra);
  EdgeSetSample draw_block(Rng& rng);  // one accepted indicator sample over the block

  const DimerGraph* g_;
  std::array<double, 3> coef_;  // sigma* sign_t e^{m_t} / (2Z), sums to 1
  double log_z_;
  struct Cut {
    std::vector<int> edges;
    std::vector<double> sign;
    double p_sum;
  } cut_a_, cut_b_;

  std::array<Mat, 3> sk_;        // real sector matrices (rows whites)
  std::array<Mat, 3> full_inv_;  // sector kernels inv(b, w)
  bool full_ready_ = false;

  std::vector<int> blk_edges_;           // cut edges then extras, deduplicated
  std::vector<int> blk_extra_;           // extras the current block was built for
  std::array<Mat, 3> blk_inv_;           // kernel restricted to block nodes
  std::array<Mat, 3> blk_L_;             // edge-indicator kernel sk_i * inv(b_i, w_j)
  std::array<std::vector<double>, 3> blk_sk_;  // sector weight per block edge
  std::vector<int> blk_row_, blk_col_;   // block edge -> (row of its black, col of its white)
  bool blk_ready_ = false;
};

}  // namespace dimerlab
