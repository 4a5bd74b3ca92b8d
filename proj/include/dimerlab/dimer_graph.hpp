#pragma once
#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dimerlab {

using cplx = std::complex<double>;

enum class Topology { plane, torus };
enum class BlackRole { gamma, dual };  // vertex of the primal graph vs of its dual

struct RhombusTiling;

// One edge of the bipartite graph M (white = rhombus center, black = rhombus corner).
struct MEdge {
  int w = -1, b = -1;
  cplx K;                       // complex Kasteleyn entry, K(w,b) = (i/2)(b3-b1)
  double sK = 0;                // signed real entry, |sK| = |K|
  cplx disp;                    // lifted position of b minus position of w
  std::array<int, 2> wrap{0, 0};  // lattice wrap of the black lift (torus), else 0
  std::array<int, 2> face{-1, -1};  // the two incident quad faces (-1 on boundary)
};

// Face of M = edge of the rhombus tiling; quads (w1, x, w2, y) in ccw order,
// x on the primal graph, y on the dual. Heights live on these.
struct QuadFace {
  int w1 = -1, x = -1, w2 = -1, y = -1;
  cplx center;                    // midpoint of the (x,y) edge
  std::array<int, 4> edges{-1, -1, -1, -1};  // (w1,x),(w2,x),(w2,y),(w1,y)
};

// Biperiodic cell structure used by the FFT determinant/kernel path.
struct CellStructure {
  int n1 = 0, n2 = 0;  // cells per period direction
  int kB = 0, kW = 0;  // blacks / whites per cell
  std::vector<int> black_cell, black_slot, white_cell, white_slot;
};

struct DimerGraph {
  Topology topology = Topology::plane;
  double delta = 1.0;
  cplx period1, period2;  // torus only

  std::vector<cplx> black_pos, white_pos;
  std::vector<BlackRole> black_role;
  std::vector<double> nu_black, nu_white;  // gauge phases nu(b), nu(w)
  std::vector<double> mu_white;            // rhombus area per white

  std::vector<MEdge> edges;
  std::vector<double> p_edge;  // geometric edge weight p(w,b) of the full tiling
  std::vector<std::vector<int>> white_edges;  // incident edge ids, ccw
  std::vector<std::vector<int>> black_edges;

  std::vector<QuadFace> faces;
  std::vector<std::vector<int>> face_adj;  // dual adjacency: face -> incident edge ids

  std::optional<CellStructure> cell;

  // square-lattice bookkeeping (set by build_square_lattice)
  int grid_w = 0, grid_h = 0;
  std::vector<int> site_node;  // (i,j) -> node id within its color class
  std::vector<int> face_grid;  // plaquette (i,j) -> face id, -1 if absent

  int nB() const { return (int)black_pos.size(); }
  int nW() const { return (int)white_pos.size(); }
  double spacing() const { return delta / std::sqrt(2.0); }

  int site(int i, int j) const { return site_node[i + (size_t)grid_w * j]; }
  bool site_black(int i, int j) const { return ((i + j) & 1) == 0; }
  int face_at(int i, int j) const { return face_grid[i + (size_t)grid_w * j]; }

  cplx nearest_disp(cplx d) const;  // reduce a displacement mod periods (torus)
  int edge_between(int w, int b) const;  // -1 if absent; smallest id if parallel
  uint64_t signature() const;            // content hash for cache keys
};

DimerGraph build_square_lattice(int width, int height, Topology topo, double delta);
DimerGraph build_isoradial(const RhombusTiling& t, Topology topo);
// restriction to a set of kept sites (simply connected for Kasteleyn validity)
DimerGraph build_square_subregion(int width, int height, const std::vector<uint8_t>& keep,
                                  double delta);
// restriction of any plane graph to a union of quad faces
DimerGraph build_quad_subregion(const DimerGraph& full, const std::vector<int>& face_ids);

// deterministic region generators for tests and validation runs:
// a simply connected path of quad faces, each sharing one edge with the last
std::vector<int> quad_face_path(const DimerGraph& full, int start_face, int length,
                                uint64_t seed);
// a column-convex site mask (always simply connected) on a width x height grid
std::vector<uint8_t> column_convex_mask(int width, int height, uint64_t seed);

// max |K - e^{i nu(w)} sK e^{i nu(b)}| over edges
double gauge_identity_violation(const DimerGraph& g);
// every bounded quad face must carry sign product -1 (odd # clockwise edges)
bool kasteleyn_faces_ok(const DimerGraph& g, std::string* why = nullptr);
// block structure of sK*sK under the measures of the construction:
// off-role blocks vanish, primal entries are |y'-y|/(2|x'-x|), diagonal = -row sum
struct LaplacianSplitReport {
  double max_off_block = 0, max_entry_err = 0, max_diag_err = 0;
};
LaplacianSplitReport laplacian_split_check(const DimerGraph& g);

struct DualPath {
  std::vector<int> faces;
  std::vector<int> crossed_edges;
  std::vector<int> black_on_left;  // per crossed edge, 1 if the black endpoint
                                   // lies left of the direction of travel
};
DualPath straight_dual_path(const DimerGraph& g, int face_from, int face_to);
DualPath dual_path_through(const DimerGraph& g, const std::vector<int>& face_seq);

double p_ccw_arg(const DimerGraph& g, int edge_id);  // (1/2pi) arg((y'-x)/(y-x))

}  // namespace dimerlab
