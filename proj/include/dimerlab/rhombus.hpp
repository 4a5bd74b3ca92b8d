#pragma once
#include <array>
#include <complex>
#include <string>
#include <vector>

namespace dimerlab {

using cplx = std::complex<double>;

// A rhombus tiling of a plane region or a fundamental domain of a torus.
// Vertices carry a two-coloring (primal / dual); every rhombus has side delta
// and its corners alternate colors.
struct RhombusTiling {
  double delta = 1.0;
  bool biperiodic = false;
  cplx period1, period2;
  int cells1 = 0, cells2 = 0;  // translational subcells per period (torus)

  std::vector<cplx> vertices;
  std::vector<bool> is_primal;
  // corner ids, ccw; on a torus each corner also carries the wrap of its lift
  struct Rhombus {
    std::array<int, 4> v;
    std::array<std::array<int, 2>, 4> wrap{};
  };
  std::vector<Rhombus> rhombi;

  cplx corner_pos(const Rhombus& r, int k) const {
    cplx p = vertices[r.v[k]];
    if (biperiodic) p += double(r.wrap[k][0]) * period1 + double(r.wrap[k][1]) * period2;
    return p;
  }
};

// Generators. Angles of every rhombus stay within [eta0, pi - eta0].
RhombusTiling square_tiling(int nx, int ny, double delta, bool biperiodic);
// lozenge tiling with rhombus half-angle theta (square at theta = pi/4)
RhombusTiling lozenge_tiling(int nx, int ny, double theta, double delta, bool biperiodic);
// three rhombus orientations around hexagonal vertices
RhombusTiling rhombille_tiling(int nx, int ny, double delta, bool biperiodic);

double min_rhombus_angle(const RhombusTiling& t);
double rhombus_area(const RhombusTiling& t, int r);  // shoelace

std::string tiling_to_json(const RhombusTiling& t);
RhombusTiling tiling_from_json(const std::string& text);

}  // namespace dimerlab
