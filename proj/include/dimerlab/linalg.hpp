#pragma once
#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dimerlab/dimer_graph.hpp"

namespace dimerlab {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// determinant in log scale
struct LogDet {
  double log_modulus = 0;  // -inf when singular
  cplx phase = 1.0;        // unit modulus; +-1 for real input
  bool is_singular = false;

  cplx value() const { return is_singular ? cplx(0) : std::exp(log_modulus) * phase; }
  static LogDet singular();
};

LogDet logdet(const Mat& a);
LogDet logdet(const CMat& a);
LogDet logdet_ratio(const LogDet& num, const LogDet& den);
LogDet logdet_mul(const LogDet& a, const LogDet& b);

CMat dense_inverse(const CMat& a);
CVec inverse_column(const CMat& a, int col);  // residual checked to 1e-10

// Kasteleyn matrices of a DimerGraph (rows = whites, cols = blacks)
Mat sk_matrix(const DimerGraph& g);
CMat k_matrix(const DimerGraph& g);

// torus: entries multiplied by e^{2 i Im(lambda conj(disp))} for twist
// lambda = lambda_phys(eps, eps'); character of loops: chi(p1) = -e^{2 i pi eps},
// chi(p2) = -e^{-2 i pi eps'}
cplx lambda_phys(const DimerGraph& g, double eps, double eps_p);
CMat k_twisted(const DimerGraph& g, double eps, double eps_p);

struct KernelEntry {
  int b, w;
  cplx value;
};
struct KernelTable {
  std::vector<KernelEntry> entries;
  std::string method;  // "dense" | "fft_twisted" | "quadrature"
  double eps = 0, eps_p = 0;
  double error_bound = 0;
  cplx at(int b, int w) const;
};

// dense inverse restricted to requested pairs
KernelTable dense_kernel(const DimerGraph& g, const std::vector<std::pair<int, int>>& pairs,
                         double eps, double eps_p);

// block-FFT diagonalization over the biperiodic cell (torus graphs with cell structure)
LogDet fft_twisted_logdet(const DimerGraph& g, double eps, double eps_p);
KernelTable fft_twisted_kernel(const DimerGraph& g, const std::vector<std::pair<int, int>>& pairs,
                               double eps, double eps_p);

// whole-plane kernel between sites at given displacement, computed as a
// twist-average on tori of doubling size with a Richardson error bound
struct BulkKernelResult {
  cplx value;
  double error_bound;
  int torus_size;
};
// displacement is black position minus white position on the infinite square
// lattice (integer site offsets di, dj from a white of the given parity)
BulkKernelResult bulk_inverse_square(int white_i, int white_j, int di, int dj, double delta,
                                     int min_size = 0);

// det((K + dK) K^{-1}) for a finite-support dK: with whites R and blacks C
// touched by dK, this is det(Id_R + dK_{R x C} Kinv_{C x R})
LogDet fredholm_det(const CMat& dk_block, const CMat& kinv_block);

}  // namespace dimerlab
