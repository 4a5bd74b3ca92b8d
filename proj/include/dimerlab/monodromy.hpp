#pragma once
#include <functional>
#include <vector>

#include "dimerlab/linalg.hpp"

namespace dimerlab {

// Discrete exponential on the tiling vertices: crossing a rhombus side u -> u'
// multiplies by (1 + lambda d)/(1 - lambda d), d = (u'-u)/2.  All poles sit on
// |lambda| = 2/delta.  Values are indexed by black node, base gets 1.
struct DiscreteExp {
  cplx lambda;
  CVec values;
};
DiscreteExp discrete_exponential(const DimerGraph& g, cplx lambda, int base_black);
double k_exp_residual(const DimerGraph& g, const DiscreteExp& e);  // max |K e|

// Multivalued discrete holomorphic functions with one puncture at v0, the
// midpoint of the tiling edge (x0,y0) carried by white w0; character
// chi = e^{2 i pi s}.  Function values live on the blacks of a slit plane:
// arg(u - v0) taken in (-pi, pi], cut just below the negative real direction.

struct PunctureChart {
  const DimerGraph* g;
  int w0;        // white whose rhombus carries the puncture
  int x0, y0;    // ccw-adjacent corners, v0 = midpoint
  cplx v0;
  std::vector<cplx> rel;  // black position - v0 (slit-plane chart)
};
PunctureChart puncture_at(const DimerGraph& g, int w0);

// f_{k,s}(u): keyhole contour integral of lambda^{k-s} e_{-lambda}(u) with the
// return ray on the next sheet; base point x0, per-target ray direction -arg u.
cplx f_k_s(const PunctureChart& c, int k, double s, int target_black);
// normalized version C_{k,s} e^{i nu(b)} f_{k,s}(b); closed form at the
// rhombus corners: (-1)^k e^{i nu(b)} (pi / sin(pi s)) (2(b - v0))^{s-k-1}
cplx f_k_chi(const PunctureChart& c, int k, double s, int target_black);
cplx f_k_chi_corner_closed_form(const PunctureChart& c, int k, double s, int corner_black);

// g_w(b) = 2^s e^{i nu(w)} e^{i nu(b)} * integral over the ray (-conj(u) inf, 0]
// of (-lambda)^{-s} e_lambda(b) dlambda; (sK g_w)(w0) = 2^{1+s} pi (w0 - v0)^s
// and (sK g_w)(w) = 0 elsewhere
cplx g_pole(const PunctureChart& c, double s, int target_black);
cplx g_pole_defect(const PunctureChart& c, double s);  // 2^{1+s} pi (w0-v0)^s

// inverse of the chi-twisted operator on a centered window with a straight
// branch cut, Richardson-extrapolated over a doubled window
struct ChiralKernelResult {
  std::vector<cplx> values;  // per requested black
  double error_bound;
  int window;
};
ChiralKernelResult chiral_cauchy_kernel(const PunctureChart& c, double s,
                                        const std::vector<int>& target_blacks,
                                        int min_window = 0);
// adjacent-site closed form: sK(w0,b) Kinv_chi(b,w0) for b in the rhombus of w0,
// = (1/(1-chi^{-1})) (1 - ((w0-v1)/(w0-v0))^s), v1 the mirror of v0 across (b w0)
cplx chiral_adjacent_closed_form(const PunctureChart& c, double s, int corner_black);

// Green function of the s-twisted primal Laplacian with punctures at the two
// tiling edges carried by w_a and w_b (+s and -s); window solve with doubling
struct TwistedGreenResult {
  Eigen::MatrixXcd values;  // (primal blacks in window) x (primal blacks in window)
  std::vector<int> blacks;  // node ids, row/col order
  double error_bound;
};
TwistedGreenResult green_two_punctures(const DimerGraph& g, int w_a, int w_b, double s,
                                       int window);

// product kernel for several charges: prod_j ((z-x_j)(w-y_j)/((z-y_j)(w-x_j)))^{s_j},
// branch continued along a dual path from a base face
struct ChargeSystem {
  std::vector<int> whites;    // carrier whites, puncture at each edge midpoint
  std::vector<double> s;      // charges
};
cplx s_rho_phase(const DimerGraph& g, const ChargeSystem& rho, const DualPath& path);
// Robin-type mass: (1/pi) sum_j s_j (1/(w-x_j) - 1/(w-y_j))
cplx robin_mass(const DimerGraph& g, const ChargeSystem& rho, cplx w);

}  // namespace dimerlab
