#include "dimerlab/height.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

namespace dimerlab {

namespace {

// ccw boundary of a quad traverses slots 0,2 white->black and slots 1,3
// black->white; leaving across a white->black segment puts the black endpoint
// left of the travel direction, which is the +1 orientation of the dual edge
constexpr double kSlotSign[4] = {+1, -1, +1, -1};

double slot_sign(const DimerGraph& g, int face, int edge_id) {
  const auto& f = g.faces[face];
  for (int k = 0; k < 4; ++k)
    if (f.edges[k] == edge_id) return kSlotSign[k];
  throw std::invalid_argument("height step: edge does not bound the face");
}

double raw_step(const DimerGraph& g, const Matching& m, int f_from, int edge_id) {
  const auto& e = g.edges[edge_id];
  const double in_m = (m[e.w] == edge_id) ? 1.0 : 0.0;
  return slot_sign(g, f_from, edge_id) * (g.p_edge[edge_id] - in_m);
}

// the unwrapped vertical M-edge covering the segment from site (i,j) to
// (i,j+1); at height 2 the wrapped parallel edge is told apart by direction
int vertical_edge_up(const DimerGraph& g, int i, int j) {
  const bool lo_black = g.site_black(i, j);
  const int lo = g.site(i, j), hi = g.site(i, (j + 1) % g.grid_h);
  const int w = lo_black ? hi : lo, b = lo_black ? lo : hi;
  for (int e : g.white_edges[w]) {
    const auto& me = g.edges[e];
    if (me.b != b) continue;
    if (lo_black ? me.disp.imag() < 0 : me.disp.imag() > 0) return e;
  }
  throw std::logic_error("height: vertical cut edge not found");
}

int horizontal_edge_right(const DimerGraph& g, int i, int j) {
  const bool lo_black = g.site_black(i, j);
  const int lo = g.site(i, j), hi = g.site((i + 1) % g.grid_w, j);
  const int w = lo_black ? hi : lo, b = lo_black ? lo : hi;
  for (int e : g.white_edges[w]) {
    const auto& me = g.edges[e];
    if (me.b != b) continue;
    if (lo_black ? me.disp.real() < 0 : me.disp.real() > 0) return e;
  }
  throw std::logic_error("height: horizontal cut edge not found");
}

}  // namespace

double height_step(const DimerGraph& g, const Matching& m, int f_from, int f_to, int edge_id) {
  const auto& fc = g.edges[edge_id].face;
  if (!((fc[0] == f_from && fc[1] == f_to) || (fc[1] == f_from && fc[0] == f_to)))
    throw std::invalid_argument("height step: the faces do not share the edge");
  return raw_step(g, m, f_from, edge_id);
}

HeightField height_from_matching(const DimerGraph& g, const Matching& m) {
  if ((int)m.size() != g.nW())
    throw std::invalid_argument("height: matching does not cover the graph");
  const int nf = (int)g.faces.size();
  HeightField out;
  out.h.assign(nf, 0.0);
  if (nf == 0) return out;
  const bool torus = g.topology == Topology::torus;

  // integrate over a spanning forest (component roots at 0); non-tree
  // adjacencies re-check closedness, up to the integer periods of
  // non-contractible torus cycles
  std::vector<uint8_t> seen(nf, 0);
  double worst = 0;
  for (int root = 0; root < nf; ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int f = q.front();
      q.pop();
      for (int eid : g.face_adj[f]) {
        const auto& fc = g.edges[eid].face;
        const int o = fc[0] == f ? fc[1] : fc[0];
        if (o < 0) continue;
        const double s = raw_step(g, m, f, eid);
        if (!seen[o]) {
          seen[o] = 1;
          out.h[o] = out.h[f] + s;
          q.push(o);
        } else {
          double r = out.h[o] - out.h[f] - s;
          if (torus) r -= std::round(r);
          worst = std::max(worst, std::abs(r));
        }
      }
    }
  }
  if (worst > 1e-9)
    throw std::runtime_error("height: increments do not close up (orientation bug)");

  if (torus) {
    if (g.grid_w > 0) {
      // trace the two cut cycles: faces (k,0) heading +x and (0,k) heading +y
      double sa = 0, sb = 0;
      for (int k = 0; k < g.grid_w; ++k)
        sa += raw_step(g, m, g.face_at(k, 0), vertical_edge_up(g, (k + 1) % g.grid_w, 0));
      for (int k = 0; k < g.grid_h; ++k)
        sb += raw_step(g, m, g.face_at(0, k), horizontal_edge_right(g, 0, (k + 1) % g.grid_h));
      out.n = sa / 2;
      out.m = sb / 2;
    } else {
      out.n = out.m = std::nan("");  // no square cut structure on this torus
    }
  }
  return out;
}

std::vector<int> cut_edges_a(const DimerGraph& g) {
  if (g.topology != Topology::torus || g.grid_w <= 0)
    throw std::invalid_argument("cut edges: square torus required");
  std::vector<int> out;
  for (int i = 0; i < g.grid_w; ++i) out.push_back(vertical_edge_up(g, i, 0));
  return out;
}

std::vector<int> cut_edges_b(const DimerGraph& g) {
  if (g.topology != Topology::torus || g.grid_w <= 0)
    throw std::invalid_argument("cut edges: square torus required");
  std::vector<int> out;
  for (int j = 0; j < g.grid_h; ++j) out.push_back(horizontal_edge_right(g, 0, j));
  return out;
}

CutCycle cut_cycle_a(const DimerGraph& g) {
  if (g.topology != Topology::torus || g.grid_w <= 0)
    throw std::invalid_argument("cut cycle: square torus required");
  CutCycle c;
  for (int k = 0; k < g.grid_w; ++k) {
    const int e = vertical_edge_up(g, (k + 1) % g.grid_w, 0);
    const double s = slot_sign(g, g.face_at(k, 0), e);
    c.edges.push_back(e);
    c.sign.push_back(s);
    c.p_sum += s * g.p_edge[e];
  }
  return c;
}

CutCycle cut_cycle_b(const DimerGraph& g) {
  if (g.topology != Topology::torus || g.grid_w <= 0)
    throw std::invalid_argument("cut cycle: square torus required");
  CutCycle c;
  for (int k = 0; k < g.grid_h; ++k) {
    const int e = horizontal_edge_right(g, 0, (k + 1) % g.grid_h);
    const double s = slot_sign(g, g.face_at(0, k), e);
    c.edges.push_back(e);
    c.sign.push_back(s);
    c.p_sum += s * g.p_edge[e];
  }
  return c;
}

}  // namespace dimerlab
