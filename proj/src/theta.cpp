#include "dimerlab/theta.hpp"

#include <cmath>
#include <stdexcept>

namespace dimerlab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr cplx kI{0.0, 1.0};

// half-width of the summation window; terms decay like e^{-pi Im(tau) k^2}
int series_reach(cplx tau) {
  if (!(tau.imag() > 0)) throw std::invalid_argument("theta: Im tau must be positive");
  return static_cast<int>(std::ceil(std::sqrt(34.0 / (kPi * tau.imag())))) + 3;
}

// index around which the Gaussian terms peak (matters for z off the real axis)
int series_center(double eps, cplx z, cplx tau) {
  return static_cast<int>(std::lround(-z.imag() / tau.imag() - eps));
}

}  // namespace

cplx theta_char(double two_eps, double two_eps_p, cplx z, cplx tau) {
  const double eps = 0.5 * two_eps, eps_p = 0.5 * two_eps_p;
  const int reach = series_reach(tau);
  const int n0 = series_center(eps, z, tau);
  cplx sum = 0;
  for (int n = n0 - reach; n <= n0 + reach; ++n) {
    const double ne = n + eps;
    sum += std::exp(2.0 * kI * kPi * (0.5 * tau * ne * ne + ne * (z + eps_p)));
  }
  return sum;
}

cplx theta_char_dz(double two_eps, double two_eps_p, cplx z, cplx tau) {
  const double eps = 0.5 * two_eps, eps_p = 0.5 * two_eps_p;
  const int reach = series_reach(tau);
  const int n0 = series_center(eps, z, tau);
  cplx sum = 0;
  for (int n = n0 - reach; n <= n0 + reach; ++n) {
    const double ne = n + eps;
    sum += 2.0 * kI * kPi * ne * std::exp(2.0 * kI * kPi * (0.5 * tau * ne * ne + ne * (z + eps_p)));
  }
  return sum;
}

cplx theta1(cplx z, cplx tau) { return theta_char(1, 1, z, tau); }
cplx theta3(cplx z, cplx tau) { return theta_char(0, 0, z, tau); }

cplx dedekind_eta(cplx tau) {
  if (!(tau.imag() > 0)) throw std::invalid_argument("eta: Im tau must be positive");
  const cplx q = std::exp(2.0 * kI * kPi * tau);
  cplx prod = 1, qn = 1;
  for (int n = 1; n <= 200; ++n) {
    qn *= q;
    prod *= 1.0 - qn;
    if (std::abs(qn) < 1e-14) break;
  }
  return std::exp(kI * kPi * tau / 12.0) * prod;
}

double torsion(double eps, double eps_p, cplx tau) {
  return std::abs(theta_char(2 * eps, 2 * eps_p, 0, tau)) / std::abs(dedekind_eta(tau));
}

ZInst z_inst(double eps, double eps_p, cplx tau) {
  const double imt = tau.imag();
  if (!(imt > 0)) throw std::invalid_argument("z_inst: Im tau must be positive");
  const cplx taubar = std::conj(tau);
  cplx sum = 0;
  for (int a = -12; a <= 12; ++a) {    // a = 2n
    for (int b = -12; b <= 12; ++b) {  // b = 2m
      const double n = 0.5 * a, m = 0.5 * b;
      const cplx action = (2.0 * kPi / imt) * std::norm(m - taubar * n) +
                          4.0 * kI * kPi * (m * eps + n * eps_p) + 4.0 * kI * kPi * n * m;
      sum += std::exp(-action);
    }
  }
  // the imaginary parts cancel under (n,m) -> (-n,-m)
  const cplx z = eps_p + eps * tau;
  const double theta_form = std::sqrt(2.0 * imt) *
                            std::exp(-2.0 * kPi * z.imag() * z.imag() / imt) *
                            std::norm(theta3(z, tau));
  return {sum.real(), theta_form};
}

double instanton_weight(double n, double m, cplx tau) {
  const double imt = tau.imag();
  return std::exp(-(2.0 * kPi / imt) * std::norm(cplx(m, 0) - std::conj(tau) * n));
}

}  // namespace dimerlab
