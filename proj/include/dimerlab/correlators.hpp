#pragma once
#include <functional>
#include <vector>

#include "dimerlab/monodromy.hpp"

namespace dimerlab {

// <chi^{h(f2)-h(f1)}> for chi = e^{2 i pi s}: winding phase times the
// determinant of the path-twisted operator against the whole-plane kernel
struct ElectricResult {
  cplx value;
  double error_bound;
  DualPath path;
};
ElectricResult electric_correlator(const DimerGraph& g, int face1, int face2, double s);
ElectricResult electric_correlator_along(const DimerGraph& g, const DualPath& path, double s);

// several charges s_j at faces f_j (sum need not vanish); pairwise product law
// |z_i - z_j|^{2 s_i s_j} in the scaling limit
cplx electric_multi(const DimerGraph& g, const std::vector<int>& faces,
                    const std::vector<double>& s);

// monomer pair correlators: defect line between the two removed sites plus a
// rank-one handle; Mon2 = |det(K' Kinv)|
struct MonomerResult {
  double value;
  DualPath line;
};
MonomerResult monomer_correlator(const DimerGraph& g, int black_site, int white_site);
// 2m monomers: blacks b_k inserted against whites w_k
double monomer_multi(const DimerGraph& g, const std::vector<int>& blacks,
                     const std::vector<int>& whites);
// discrete derivative kernel entering single-site move ratios:
// r_hat(x_k) = 1/(2 pi (y_k - x_k)) + (1/2pi) sum_{i != k} (1/(x_k-x_i) - 1/(x_k-y_i))
cplx monomer_move_kernel(const std::vector<cplx>& xs, const std::vector<cplx>& ys, int k);

// smooth test function support for height-field observables
struct SmoothObservable {
  std::function<double(cplx)> g;        // test function
  std::function<double(cplx)> lap_g;    // its Laplacian
  double dirichlet;                     // (1/pi) int |grad g|^2
};
SmoothObservable gaussian_bump(cplx center, double sigma, double amplitude);

// E e^{i t int h lap(g)}: determinant route on a torus (finite-rank
// perturbation by the discretized dbar of g) and the Gaussian prediction
struct GffResult {
  double det_route;        // |E e^{it X}| from the perturbed determinant
  double gaussian;         // exp(-t^2/2 * (1/pi) int |grad g|^2)
  double variance_exact;   // Var(X) from two-edge covariances
};
GffResult gff_observable(const DimerGraph& g, const SmoothObservable& obs, double t);

// Monte Carlo moments of X = sum_f h(f) lap_g(f) mu_f over torus samples
struct GffMcResult {
  double mean, variance, std_error;
  int samples;
};
GffMcResult gff_observable_mc(const DimerGraph& g, const SmoothObservable& obs, int n_samples,
                              uint64_t seed);

// least squares slope of log y against log x with jackknife spread
struct ExponentFit {
  double slope, intercept, stderr_slope;
};
ExponentFit fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dimerlab
