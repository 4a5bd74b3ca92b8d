#pragma once
#include <array>
#include <map>
#include <string>

#include "dimerlab/linalg.hpp"
#include "dimerlab/sampling.hpp"

namespace dimerlab {

// real twisted sign matrix of sector s in {0..3}: wraps across the two
// periods pick up the signs z = -e^{2 i pi eps}, -e^{-2 i pi eps'} at the
// half-integer twists (0,0), (1/2,0), (0,1/2), (1/2,1/2)
Mat sk_sector_matrix(const DimerGraph& g, int sector);

// signed weight of one edge in the given sector (its sK times the wrap signs)
double sector_edge_weight(const DimerGraph& g, int edge_id, int sector);

// determinant of a sector matrix; dense for small graphs, block-FFT above
// (the FFT route is gauge-equivalent, with the unit phase snapped to +-1)
LogDet sector_logdet(const DimerGraph& g, int sector);

// real sector kernel inv(sk_sector)(b, w) restricted to the given node lists
Mat sector_kernel_block(const DimerGraph& g, int sector, const std::vector<int>& blacks,
                        const std::vector<int>& whites);

// partition function from the three non-degenerate real twist sectors:
// Z = (sigma*/2) (det_00 + det_{1/2,0} + det_{0,1/2})
struct TorusZ {
  double log_z;
  std::array<LogDet, 3> dets;  // twists (0,0), (1/2,0), (0,1/2)
  double sigma_star;
};
TorusZ kasteleyn_z(const DimerGraph& g);

// E( e^{4 i pi (m eps + n eps')} e^{4 i pi m n} ) = det K_{eps,eps'} / Z
cplx halfperiod_characteristic(const DimerGraph& g, double eps, double eps_p);

// the same expectation from sampled matchings and their height periods
cplx halfperiod_characteristic_mc(const DimerGraph& g, double eps, double eps_p, int n_samples,
                                  uint64_t seed);

// E( e^{4 i pi (m eps + n eps')} ) by the four-sector combination
// (d_{e,e'} + d_{e+1/2,e'} + d_{e,e'+1/2} - d_{e+1/2,e'+1/2}) / (2 Z)
cplx halfperiod_moment(const DimerGraph& g, double eps, double eps_p);

// exact joint law of the half-periods (n,m) by Fourier inversion of the
// characteristic function over a twist grid; support |n|,|m| <= 6
std::map<std::pair<int, int>, double> halfperiod_law(const DimerGraph& g, int max2n = 12);

// parity-class masses z_PQ with (P,Q) = (2m, 2n) mod 2
std::array<double, 4> parity_class_masses(const DimerGraph& g);  // ee, eo, oe, oo order

struct InstantonTestResult {
  double tv_distance;        // empirical vs exact law
  double var_ratio_n, var_ratio_m;
  double skew_z_n, skew_z_m;  // standardized skewness (should be ~N(0,1))
  int samples;
};
InstantonTestResult instanton_test(const DimerGraph& g, int n_samples, uint64_t seed);

}  // namespace dimerlab
