#include <cmath>
#include <complex>
#include <random>

#include "dimerlab/theta.hpp"
#include "doctest.h"

using namespace dimerlab;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr cplx kI{0.0, 1.0};
}  // namespace

TEST_CASE("theta quasi-periodicity in both lattice directions") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const cplx tau(0.8 * u(rng), 0.7 + 0.9 * std::abs(u(rng)));
    const cplx z(1.5 * u(rng), 1.2 * u(rng));
    const double eps = 0.75 * u(rng), eps_p = 0.75 * u(rng);
    const cplx th = theta_char(2 * eps, 2 * eps_p, z, tau);
    const cplx th_1 = theta_char(2 * eps, 2 * eps_p, z + 1.0, tau);
    const cplx th_tau = theta_char(2 * eps, 2 * eps_p, z + tau, tau);
    CHECK(std::abs(th_1 - std::exp(2.0 * kI * kPi * eps) * th) / (std::abs(th_1) + 1.0) < 1e-12);
    const cplx jump = std::exp(-2.0 * kI * kPi * (z + eps_p + 0.5 * tau));
    CHECK(std::abs(th_tau - jump * th) / (std::abs(th_tau) + std::abs(jump * th) + 1.0) < 1e-12);
  }
}

TEST_CASE("odd theta vanishes at the origin and its derivative matches eta^3") {
  for (const cplx tau : {cplx(0, 1), cplx(0.3, 0.8), cplx(-0.4, 2.1), cplx(0, 0.5)}) {
    CHECK(std::abs(theta1(0, tau)) < 1e-13);
    const double lhs = std::abs(theta_char_dz(1, 1, 0, tau));
    const double rhs = 2 * kPi * std::pow(std::abs(dedekind_eta(tau)), 3);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("classical values at tau = i") {
  CHECK(std::abs(theta3(0, kI)) == doctest::Approx(1.0864348112).epsilon(1e-9));
  CHECK(std::abs(theta3(0, kI).imag()) < 1e-14);
  CHECK(std::abs(dedekind_eta(kI)) == doctest::Approx(0.7682254223).epsilon(1e-9));
  // eta(i) = Gamma(1/4) / (2 pi^{3/4})
  const double gamma_quarter = 3.625609908221908311930685155867672002995;
  CHECK(std::abs(dedekind_eta(kI)) ==
        doctest::Approx(gamma_quarter / (2 * std::pow(kPi, 0.75))).epsilon(1e-12));
}

TEST_CASE("eta transforms under tau -> tau+1 and tau -> -1/tau") {
  for (const cplx tau : {cplx(0, 1), cplx(0.2, 0.9), cplx(-0.3, 1.4)}) {
    const cplx lhs = dedekind_eta(tau + 1.0);
    const cplx rhs = std::exp(kI * kPi / 12.0) * dedekind_eta(tau);
    CHECK(std::abs(lhs - rhs) < 1e-13);
    const cplx lhs2 = dedekind_eta(-1.0 / tau);
    const cplx rhs2 = std::sqrt(-kI * tau) * dedekind_eta(tau);
    CHECK(std::abs(lhs2 - rhs2) < 1e-13);
  }
}

TEST_CASE("torsion equals the Gaussian-damped theta3 shifted to z = eps' + eps tau") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (const cplx tau : {cplx(0, 1), cplx(0.3, 0.8), cplx(-0.4, 2.1)}) {
    for (int trial = 0; trial < 25; ++trial) {
      const double eps = u(rng), eps_p = u(rng);
      const cplx z = eps_p + eps * tau;
      const double lhs = std::abs(theta_char(2 * eps, 2 * eps_p, 0, tau));
      const double rhs =
          std::exp(-kPi * z.imag() * z.imag() / tau.imag()) * std::abs(theta3(z, tau));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
    CHECK(torsion(0.5, 0.5, tau) < 1e-13);
    // real characters pair up: the torsion only sees (eps, eps') mod signs
    CHECK(torsion(0.3, 0.2, cplx(0, 1.3)) ==
          doctest::Approx(torsion(-0.3, -0.2, cplx(0, 1.3))).epsilon(1e-12));
  }
}

TEST_CASE("instanton sum matches its theta closed form") {
  for (const cplx tau : {cplx(0, 1), cplx(0, 0.8), cplx(0, 2.5), cplx(0.4, 1.1)}) {
    for (const auto [eps, eps_p] :
         {std::pair{0.0, 0.0}, {0.25, 0.0}, {0.0, 0.25}, {0.37, 0.21}, {-0.15, 0.43}}) {
      const ZInst zi = z_inst(eps, eps_p, tau);
      CHECK(std::abs(zi.lattice_sum - zi.theta_form) < 1e-10);
    }
    const ZInst degenerate = z_inst(0.5, 0.5, tau);
    CHECK(std::abs(degenerate.lattice_sum) < 1e-10);
    CHECK(std::abs(degenerate.theta_form) < 1e-10);
  }
}

TEST_CASE("instanton weights are positive, symmetric, and peak at the origin") {
  const cplx tau(0, 1.5);
  CHECK(instanton_weight(0, 0, tau) == doctest::Approx(1.0));
  for (int a = -4; a <= 4; ++a) {
    for (int b = -4; b <= 4; ++b) {
      const double w = instanton_weight(0.5 * a, 0.5 * b, tau);
      CHECK(w > 0);
      CHECK(w <= 1.0);
      CHECK(w == doctest::Approx(instanton_weight(-0.5 * a, -0.5 * b, tau)).epsilon(1e-14));
    }
  }
  // anisotropy follows the modulus: tall torus squeezes the n direction
  CHECK(instanton_weight(0.5, 0, cplx(0, 2)) < instanton_weight(0, 0.5, cplx(0, 2)));
}
