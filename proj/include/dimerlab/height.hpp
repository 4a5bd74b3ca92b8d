#pragma once
#include <vector>

#include "dimerlab/enumerate.hpp"

namespace dimerlab {

// Height function on the quad faces: increments across an M-edge are
// (omega0 - omega)(f -> f'), where omega is the matching indicator with the
// crossing sign (+1 when the black endpoint lies left of the travel direction)
// and omega0 the reference one-form built from the ccw-argument weights.
struct HeightField {
  std::vector<double> h;  // per face, h = 0 on the lowest face of each component
  double n = 0, m = 0;    // torus half-periods (in Z/2): n from the +x cut cycle,
                          // m from +y; 0 on the plane, NaN without a square grid
};

HeightField height_from_matching(const DimerGraph& g, const Matching& m);

// signed increment of (omega0 - omega) across edge e traveling f -> f'
double height_step(const DimerGraph& g, const Matching& m, int f_from, int f_to, int edge_id);

// the two cut cycles of a square torus used for period extraction:
// A crosses the column of vertical edges between rows j=0 and j=1,
// B the row of horizontal edges between columns i=0 and i=1
std::vector<int> cut_edges_a(const DimerGraph& g);
std::vector<int> cut_edges_b(const DimerGraph& g);

// affine form of a cut-cycle period: with x_i the matched indicator of
// edges[i], twice the half-period equals p_sum - sum_i sign[i] x_i
struct CutCycle {
  std::vector<int> edges;
  std::vector<double> sign;
  double p_sum = 0;
};
CutCycle cut_cycle_a(const DimerGraph& g);
CutCycle cut_cycle_b(const DimerGraph& g);

}  // namespace dimerlab
