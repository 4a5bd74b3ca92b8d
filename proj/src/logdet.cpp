#include "dimerlab/linalg.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dimerlab {

LogDet LogDet::singular() {
  LogDet d;
  d.log_modulus = -std::numeric_limits<double>::infinity();
  d.phase = 0;
  d.is_singular = true;
  return d;
}

namespace {

template <typename Scalar>
LogDet logdet_impl(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("logdet: matrix must be square");
  if (a.rows() == 0) return LogDet{};  // det of empty matrix is 1
  Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(a);
  auto diag = lu.matrixLU().diagonal();
  double max_piv = 0;
  for (int i = 0; i < diag.size(); ++i) max_piv = std::max(max_piv, std::abs(diag[i]));
  LogDet d;
  d.phase = double(lu.permutationP().determinant());
  for (int i = 0; i < diag.size(); ++i) {
    double m = std::abs(diag[i]);
    if (m < 1e-12 * max_piv || m == 0) return LogDet::singular();
    d.log_modulus += std::log(m);
    d.phase *= diag[i] / m;
  }
  return d;
}

}  // namespace

LogDet logdet(const Mat& a) { return logdet_impl<double>(a); }
LogDet logdet(const CMat& a) { return logdet_impl<cplx>(a); }

LogDet logdet_ratio(const LogDet& num, const LogDet& den) {
  if (den.is_singular) throw std::domain_error("logdet_ratio: singular denominator");
  if (num.is_singular) return LogDet::singular();
  LogDet d;
  d.log_modulus = num.log_modulus - den.log_modulus;
  d.phase = num.phase / den.phase;
  return d;
}

LogDet logdet_mul(const LogDet& a, const LogDet& b) {
  if (a.is_singular || b.is_singular) return LogDet::singular();
  LogDet d;
  d.log_modulus = a.log_modulus + b.log_modulus;
  d.phase = a.phase * b.phase;
  return d;
}

CMat dense_inverse(const CMat& a) {
  Eigen::PartialPivLU<CMat> lu(a);
  CMat inv = lu.inverse();
  double resid = (a * inv - CMat::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff();
  if (!(resid < 1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff())))
    throw std::runtime_error("dense_inverse: inversion failed (matrix near-singular)");
  return inv;
}

CVec inverse_column(const CMat& a, int col) {
  Eigen::PartialPivLU<CMat> lu(a);
  CVec e = CVec::Zero(a.rows());
  e[col] = 1;
  CVec x = lu.solve(e);
  x += lu.solve(e - a * x);  // one refinement step
  double resid = (a * x - e).norm();
  if (!(resid <= 1e-10 * std::max(1.0, x.norm() * a.cwiseAbs().maxCoeff())))
    throw std::runtime_error("inverse_column: residual too large");
  return x;
}

Mat sk_matrix(const DimerGraph& g) {
  Mat m = Mat::Zero(g.nW(), g.nB());
  for (const auto& e : g.edges) m(e.w, e.b) += e.sK;
  return m;
}

CMat k_matrix(const DimerGraph& g) {
  CMat m = CMat::Zero(g.nW(), g.nB());
  for (const auto& e : g.edges) m(e.w, e.b) += e.K;
  return m;
}

cplx lambda_phys(const DimerGraph& g, double eps, double eps_p) {
  if (g.topology != Topology::torus) throw std::invalid_argument("lambda_phys: torus only");
  // solve 2 Im(lambda conj(P1)) = pi + 2 pi eps, 2 Im(lambda conj(P2)) = pi - 2 pi eps'
  const double a11 = -2 * g.period1.imag(), a12 = 2 * g.period1.real();
  const double a21 = -2 * g.period2.imag(), a22 = 2 * g.period2.real();
  const double b1 = M_PI * (1 + 2 * eps), b2 = M_PI * (1 - 2 * eps_p);
  const double det = a11 * a22 - a12 * a21;
  return cplx((b1 * a22 - b2 * a12) / det, (a11 * b2 - a21 * b1) / det);
}

CMat k_twisted(const DimerGraph& g, double eps, double eps_p) {
  const cplx lam = lambda_phys(g, eps, eps_p);
  CMat m = CMat::Zero(g.nW(), g.nB());
  for (const auto& e : g.edges) {
    double phase = 2 * std::imag(lam * std::conj(e.disp));
    m(e.w, e.b) += e.sK * std::exp(cplx(0, phase));
  }
  return m;
}

cplx KernelTable::at(int b, int w) const {
  for (const auto& e : entries)
    if (e.b == b && e.w == w) return e.value;
  throw std::out_of_range("KernelTable: pair not tabulated");
}

KernelTable dense_kernel(const DimerGraph& g, const std::vector<std::pair<int, int>>& pairs,
                         double eps, double eps_p) {
  CMat k = (g.topology == Topology::torus) ? k_twisted(g, eps, eps_p)
                                           : CMat(sk_matrix(g).cast<cplx>());
  CMat inv = dense_inverse(k);
  KernelTable t;
  t.method = "dense";
  t.eps = eps;
  t.eps_p = eps_p;
  double scale = k.cwiseAbs().maxCoeff();
  t.error_bound = 1e-12 * scale * inv.cwiseAbs().maxCoeff() * k.rows();
  for (auto [b, w] : pairs) t.entries.push_back({b, w, inv(b, w)});
  return t;
}

LogDet fredholm_det(const CMat& dk_block, const CMat& kinv_block) {
  const int n = (int)dk_block.rows();
  CMat m = CMat::Identity(n, n) + dk_block * kinv_block;
  return logdet(m);
}

}  // namespace dimerlab
