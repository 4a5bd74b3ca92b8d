#pragma once
#include <complex>

namespace dimerlab {

using cplx = std::complex<double>;

// theta with characteristics a = 2 eps, b = 2 eps' :
// sum_n exp(2 i pi ( (tau/2)(n+eps)^2 + (n+eps)(z+eps') ))
cplx theta_char(double two_eps, double two_eps_p, cplx z, cplx tau);
cplx theta1(cplx z, cplx tau);   // odd theta = theta_char(1,1)
cplx theta3(cplx z, cplx tau);   // theta_char(0,0)
cplx theta_char_dz(double two_eps, double two_eps_p, cplx z, cplx tau);
cplx dedekind_eta(cplx tau);

// |theta[2eps,2eps'](0;tau) / eta(tau)| = e^{-pi Im(z)^2 / Im tau} |theta3(z;tau)| / |eta|
// with z = eps' + eps tau
double torsion(double eps, double eps_p, cplx tau);

// lattice sum over half-integer (n,m) of e^{-S(n,m)} with
// S = (2pi/Im tau)|m - conj(tau) n|^2 + 4 i pi (m eps + n eps') + 4 i pi n m,
// equal to sqrt(2 Im tau) e^{-2 pi Im(z)^2 / Im tau} |theta3(z;tau)|^2
struct ZInst {
  double lattice_sum;
  double theta_form;
};
ZInst z_inst(double eps, double eps_p, cplx tau);

// unnormalized weight e^{-(2pi/Im tau)|m - conj(tau) n|^2} of a half-integer
// period pair; normalize over the truncated support to get the law
double instanton_weight(double n, double m, cplx tau);

}  // namespace dimerlab
