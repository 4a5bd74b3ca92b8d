#include "dimerlab/dimer_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "dimerlab/rhombus.hpp"

namespace dimerlab {

namespace {

inline double cross2(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline bool lex_positive(cplx d, double tol) {
  if (d.real() > tol) return true;
  if (d.real() < -tol) return false;
  return d.imag() > 0;
}

void build_incidence(DimerGraph& g) {
  g.white_edges.assign(g.nW(), {});
  g.black_edges.assign(g.nB(), {});
  for (int e = 0; e < (int)g.edges.size(); ++e) {
    g.white_edges[g.edges[e].w].push_back(e);
    g.black_edges[g.edges[e].b].push_back(e);
  }
  for (auto& v : g.white_edges)
    std::sort(v.begin(), v.end(), [&](int a, int b) {
      return std::arg(g.edges[a].disp) < std::arg(g.edges[b].disp);
    });
  for (int b = 0; b < g.nB(); ++b)
    std::sort(g.black_edges[b].begin(), g.black_edges[b].end(), [&](int x, int y) {
      return std::arg(-g.edges[x].disp) < std::arg(-g.edges[y].disp);
    });
}

void fill_face_adj(DimerGraph& g) {
  g.face_adj.assign(g.faces.size(), {});
  for (size_t f = 0; f < g.faces.size(); ++f)
    for (int e : g.faces[f].edges)
      if (e >= 0) g.face_adj[f].push_back(e);
}

void fill_p_edges(DimerGraph& g) {
  g.p_edge.resize(g.edges.size());
  for (int e = 0; e < (int)g.edges.size(); ++e) g.p_edge[e] = p_ccw_arg(g, e);
}

// derive the biperiodic cell structure from cell counts by matching
// fractional offsets within the subcell lattice
CellStructure derive_cells(const DimerGraph& g, int c1, int c2) {
  CellStructure cs;
  cs.n1 = c1;
  cs.n2 = c2;
  const cplx q1 = g.period1 / double(c1), q2 = g.period2 / double(c2);
  const double det = cross2(q1, q2);
  auto classify = [&](const std::vector<cplx>& pos, std::vector<int>& cell,
                      std::vector<int>& slot, int& nslots) {
    cell.resize(pos.size());
    slot.resize(pos.size());
    std::vector<std::pair<long long, long long>> offsets;  // quantized unique offsets
    const double quant = 1e-6 * g.delta;
    std::vector<std::pair<long long, long long>> keys(pos.size());
    for (size_t i = 0; i < pos.size(); ++i) {
      double a = cross2(pos[i], q2) / det;
      double b = cross2(q1, pos[i]) / det;
      int ca = (int)std::floor(a + 1e-9), cb = (int)std::floor(b + 1e-9);
      cplx off = pos[i] - double(ca) * q1 - double(cb) * q2;
      ca = ((ca % c1) + c1) % c1;
      cb = ((cb % c2) + c2) % c2;
      cell[i] = ca + c1 * cb;
      keys[i] = {llround(off.real() / quant), llround(off.imag() / quant)};
      offsets.push_back(keys[i]);
    }
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    nslots = (int)offsets.size();
    for (size_t i = 0; i < pos.size(); ++i)
      slot[i] = (int)(std::lower_bound(offsets.begin(), offsets.end(), keys[i]) - offsets.begin());
  };
  classify(g.black_pos, cs.black_cell, cs.black_slot, cs.kB);
  classify(g.white_pos, cs.white_cell, cs.white_slot, cs.kW);
  if (cs.kB * c1 * c2 != (int)g.black_pos.size() || cs.kW * c1 * c2 != (int)g.white_pos.size())
    throw std::runtime_error("derive_cells: cell structure does not tile the node set");
  return cs;
}

}  // namespace

cplx DimerGraph::nearest_disp(cplx d) const {
  if (topology != Topology::torus) return d;
  const double det = cross2(period1, period2);
  double a = cross2(d, period2) / det;
  double b = cross2(period1, d) / det;
  return d - std::round(a) * period1 - std::round(b) * period2;
}

int DimerGraph::edge_between(int w, int b) const {
  for (int e : white_edges[w])
    if (edges[e].b == b) return e;
  return -1;
}

uint64_t DimerGraph::signature() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&](uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  auto mixd = [&](double x) { mix((uint64_t)llround(x * 1e9)); };
  mix((uint64_t)topology);
  mixd(delta);
  mix((uint64_t)nB());
  mix((uint64_t)nW());
  if (topology == Topology::torus) {
    mixd(period1.real());
    mixd(period1.imag());
    mixd(period2.real());
    mixd(period2.imag());
  }
  for (const auto& p : black_pos) {
    mixd(p.real());
    mixd(p.imag());
  }
  for (const auto& p : white_pos) {
    mixd(p.real());
    mixd(p.imag());
  }
  for (const auto& e : edges) {
    mix((uint64_t)e.w);
    mix((uint64_t)e.b);
    mixd(e.sK);
  }
  return h;
}

DimerGraph build_square_lattice(int width, int height, Topology topo, double delta) {
  if (width < 2 || height < 2)
    throw std::invalid_argument("build_square_lattice: need width, height >= 2");
  if (topo == Topology::torus && (width % 2 || height % 2))
    throw std::invalid_argument("build_square_lattice: torus requires even dimensions");

  DimerGraph g;
  g.topology = topo;
  g.delta = delta;
  g.grid_w = width;
  g.grid_h = height;
  const double s = delta / std::sqrt(2.0);
  if (topo == Topology::torus) {
    g.period1 = cplx(width * s, 0);
    g.period2 = cplx(0, height * s);
  }

  g.site_node.assign((size_t)width * height, -1);
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) {
      cplx p(i * s, j * s);
      if (((i + j) & 1) == 0) {
        g.site_node[i + (size_t)width * j] = (int)g.black_pos.size();
        g.black_pos.push_back(p);
        g.black_role.push_back(i % 2 == 0 ? BlackRole::gamma : BlackRole::dual);
        g.nu_black.push_back(i % 2 == 0 ? 0.0 : M_PI / 2);
      } else {
        g.site_node[i + (size_t)width * j] = (int)g.white_pos.size();
        g.white_pos.push_back(p);
        g.nu_white.push_back(i % 2 == 1 ? 0.0 : M_PI / 2);  // horizontal : vertical
        g.mu_white.push_back(2 * s * s);
      }
    }

  // per white-type sign of sK toward +x, +y, -x, -y
  const int sgn_h[4] = {+1, +1, -1, -1};
  const int sgn_v[4] = {-1, +1, +1, -1};
  const int di[4] = {1, 0, -1, 0}, dj[4] = {0, 1, 0, -1};

  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) {
      if (((i + j) & 1) == 0) continue;
      const int w = g.site_node[i + (size_t)width * j];
      const bool horizontal = (i % 2 == 1);
      for (int d = 0; d < 4; ++d) {
        int bi = i + di[d], bj = j + dj[d], w1 = 0, w2 = 0;
        if (topo == Topology::torus) {
          if (bi < 0) { bi += width; w1 = -1; }
          if (bi >= width) { bi -= width; w1 = 1; }
          if (bj < 0) { bj += height; w2 = -1; }
          if (bj >= height) { bj -= height; w2 = 1; }
        } else if (bi < 0 || bi >= width || bj < 0 || bj >= height) {
          continue;
        }
        MEdge e;
        e.w = w;
        e.b = g.site_node[bi + (size_t)width * bj];
        e.disp = cplx(di[d] * s, dj[d] * s);
        e.K = e.disp;
        e.sK = (horizontal ? sgn_h[d] : sgn_v[d]) * s;
        e.wrap = {w1, w2};
        g.edges.push_back(e);
      }
    }
  build_incidence(g);

  // faces: one per plaquette with lower-left site (i,j)
  const int fw = (topo == Topology::torus) ? width : width - 1;
  const int fh = (topo == Topology::torus) ? height : height - 1;
  g.face_grid.assign((size_t)width * height, -1);
  for (int j = 0; j < fh; ++j)
    for (int i = 0; i < fw; ++i) {
      // ccw corners from lower-left
      const int ci[4] = {i, i + 1, i + 1, i};
      const int cj[4] = {j, j, j + 1, j + 1};
      QuadFace f;
      f.center = cplx((i + 0.5) * s, (j + 0.5) * s);
      int whites[2] = {-1, -1}, blacks[2] = {-1, -1}, nw = 0, nb = 0;
      int wslot[2] = {0, 0}, bslot[2] = {0, 0};
      for (int k = 0; k < 4; ++k) {
        int a = ci[k] % width, b = cj[k] % height;
        int id = g.site_node[a + (size_t)width * b];
        if (((ci[k] + cj[k]) & 1) == 0) {
          bslot[nb] = k;
          blacks[nb++] = id;
        } else {
          wslot[nw] = k;
          whites[nw++] = id;
        }
      }
      // x = primal black; order (w1, x, w2, y) ccw
      int xb = 0;
      if (g.black_role[blacks[0]] != BlackRole::gamma) xb = 1;
      f.x = blacks[xb];
      f.y = blacks[1 - xb];
      // w1 = the white preceding x in ccw corner order
      int xs = bslot[xb], ys = bslot[1 - xb];
      int w1s, w2s;
      if ((wslot[0] + 1) % 4 == xs) {
        f.w1 = whites[0];
        f.w2 = whites[1];
        w1s = wslot[0];
        w2s = wslot[1];
      } else {
        f.w1 = whites[1];
        f.w2 = whites[0];
        w1s = wslot[1];
        w2s = wslot[0];
      }
      // locate edge instances by direction (small tori carry parallel edges)
      auto edge_dir = [&](int w, int ws, int bs) {
        const cplx d((ci[bs] - ci[ws]) * s, (cj[bs] - cj[ws]) * s);
        for (int e : g.white_edges[w])
          if (std::abs(g.edges[e].disp - d) < 1e-9 * s) return e;
        throw std::runtime_error("square faces: missing edge");
      };
      f.edges = {edge_dir(f.w1, w1s, xs), edge_dir(f.w2, w2s, xs),
                 edge_dir(f.w2, w2s, ys), edge_dir(f.w1, w1s, ys)};
      int fid = (int)g.faces.size();
      g.face_grid[i + (size_t)width * j] = fid;
      g.faces.push_back(f);
      for (int e : f.edges) {
        auto& fc = g.edges[e].face;
        if (fc[0] < 0)
          fc[0] = fid;
        else
          fc[1] = fid;
      }
    }
  fill_face_adj(g);
  fill_p_edges(g);

  if (topo == Topology::torus) g.cell = derive_cells(g, width / 2, height / 2);
  return g;
}

DimerGraph build_isoradial(const RhombusTiling& t, Topology topo) {
  if ((topo == Topology::torus) != t.biperiodic)
    throw std::invalid_argument("build_isoradial: topology does not match tiling periodicity");
  DimerGraph g;
  g.topology = topo;
  g.delta = t.delta;
  g.period1 = t.period1;
  g.period2 = t.period2;
  const double tol = 1e-12 * t.delta;

  // blacks = tiling vertices used by at least one rhombus
  std::vector<int> vmap(t.vertices.size(), -1);
  for (const auto& r : t.rhombi)
    for (int k = 0; k < 4; ++k) vmap[r.v[k]] = 0;
  for (size_t v = 0; v < t.vertices.size(); ++v)
    if (vmap[v] == 0) {
      vmap[v] = (int)g.black_pos.size();
      g.black_pos.push_back(t.vertices[v]);
      g.black_role.push_back(t.is_primal[v] ? BlackRole::gamma : BlackRole::dual);
      g.nu_black.push_back(t.is_primal[v] ? 0.0 : M_PI / 2);
    }

  struct SideRec {
    int white, slot_a, slot_b;  // corner slots of the two side endpoints
    cplx lift_a, lift_b;
  };
  std::map<std::tuple<int, int, int, int>, std::vector<SideRec>> sides;
  std::vector<std::array<int, 4>> rh_edge(t.rhombi.size());  // edge id per corner slot

  for (size_t ri = 0; ri < t.rhombi.size(); ++ri) {
    const auto& r = t.rhombi[ri];
    std::array<cplx, 4> lift;
    cplx center = 0;
    for (int k = 0; k < 4; ++k) {
      lift[k] = t.corner_pos(r, k);
      center += lift[k] / 4.0;
    }
    // corners ccw around the center, starting from a primal vertex
    std::array<int, 4> ord{0, 1, 2, 3};
    std::sort(ord.begin(), ord.end(), [&](int u, int v) {
      return std::arg(lift[u] - center) < std::arg(lift[v] - center);
    });
    if (!t.is_primal[r.v[ord[0]]]) std::rotate(ord.begin(), ord.begin() + 1, ord.end());
    for (int k = 0; k < 4; ++k)
      if (t.is_primal[r.v[ord[k]]] != (k % 2 == 0))
        throw std::invalid_argument("build_isoradial: rhombus corners do not alternate colors");

    const int w = (int)g.white_pos.size();
    g.white_pos.push_back(center);
    const cplx dprim = lift[ord[2]] - lift[ord[0]];
    const cplx ddual = lift[ord[3]] - lift[ord[1]];
    g.mu_white.push_back(std::abs(cross2(dprim, ddual)) / 2.0);

    // diagonal orientations: primal head by lexicographic rule, dual head so
    // that (primal head - tail, dual head - tail) is a direct frame
    const bool prim_fwd = lex_positive(dprim, tol);  // head = ord[2] corner
    const cplx oriented_prim = prim_fwd ? dprim : -dprim;
    const bool dual_fwd = cross2(oriented_prim, ddual) > 0;  // head = ord[3]
    g.nu_white.push_back(std::arg(oriented_prim));

    for (int k = 0; k < 4; ++k) {
      const int slot = ord[k];
      MEdge e;
      e.w = w;
      e.b = vmap[r.v[slot]];
      e.disp = lift[slot] - center;
      e.wrap = {r.wrap[slot][0], r.wrap[slot][1]};
      const cplx prev = lift[ord[(k + 3) % 4]], next = lift[ord[(k + 1) % 4]];
      e.K = cplx(0, 0.5) * (prev - next);
      bool head;
      if (k % 2 == 0)
        head = (k == 2) == prim_fwd;
      else
        head = (k == 3) == dual_fwd;
      e.sK = (head ? 1.0 : -1.0) * std::abs(e.K);
      rh_edge[ri][k] = (int)g.edges.size();
      g.edges.push_back(e);
    }

    // register the four sides for face building
    for (int k = 0; k < 4; ++k) {
      const int ka = ord[k], kb = ord[(k + 1) % 4];
      int va = r.v[ka], vb = r.v[kb];
      std::array<int, 2> wa = r.wrap[ka], wb = r.wrap[kb];
      int sa = k, sb = (k + 1) % 4;
      cplx la = lift[ka], lb = lift[kb];
      if (va > vb || (va == vb && lex_positive(la - lb, tol))) {
        std::swap(va, vb);
        std::swap(wa, wb);
        std::swap(sa, sb);
        std::swap(la, lb);
      }
      sides[{va, vb, wb[0] - wa[0], wb[1] - wa[1]}].push_back(SideRec{(int)ri, sa, sb, la, lb});
    }
  }

  build_incidence(g);

  // faces from sides shared by exactly two rhombi
  for (auto& [key, recs] : sides) {
    if (recs.size() == 1) continue;  // tiling boundary
    if (recs.size() != 2) throw std::runtime_error("build_isoradial: side shared by >2 rhombi");
    const auto& A = recs[0];
    const auto& B = recs[1];
    const int va = std::get<0>(key);  // endpoint ids; slot_a of each rec is va's slot
    const bool a_primal = t.is_primal[va];

    QuadFace f;
    f.center = (A.lift_a + A.lift_b) / 2.0;
    const cplx lx = a_primal ? A.lift_a : A.lift_b;
    const cplx ly = a_primal ? A.lift_b : A.lift_a;
    const int slotA_x = a_primal ? A.slot_a : A.slot_b;
    const int slotA_y = a_primal ? A.slot_b : A.slot_a;
    const int slotB_x = a_primal ? B.slot_a : B.slot_b;
    const int slotB_y = a_primal ? B.slot_b : B.slot_a;
    const int eAx = rh_edge[A.white][slotA_x], eAy = rh_edge[A.white][slotA_y];
    const int eBx = rh_edge[B.white][slotB_x], eBy = rh_edge[B.white][slotB_y];
    f.x = g.edges[eAx].b;
    f.y = g.edges[eAy].b;

    // whites in A's frame; orient (w1, x, w2, y) ccw
    const cplx cA = g.white_pos[A.white];
    const cplx cB = g.white_pos[B.white] + (A.lift_a - B.lift_a);
    double area = cross2(cA, lx) + cross2(lx, cB) + cross2(cB, ly) + cross2(ly, cA);
    if (area > 0) {
      f.w1 = A.white;
      f.w2 = B.white;
      f.edges = {eAx, eBx, eBy, eAy};
    } else {
      f.w1 = B.white;
      f.w2 = A.white;
      f.edges = {eBx, eAx, eAy, eBy};
    }
    const int fid = (int)g.faces.size();
    g.faces.push_back(f);
    for (int e : f.edges) {
      auto& fc = g.edges[e].face;
      if (fc[0] < 0)
        fc[0] = fid;
      else
        fc[1] = fid;
    }
  }

  fill_face_adj(g);
  fill_p_edges(g);
  if (topo == Topology::torus && t.cells1 > 0 && t.cells2 > 0)
    g.cell = derive_cells(g, t.cells1, t.cells2);
  return g;
}

namespace {

// restrict a plane graph to the nodes flagged true, keeping edges with both
// endpoints alive and faces whose four edges all survive
DimerGraph restrict_nodes(const DimerGraph& full, const std::vector<uint8_t>& keep_b,
                          const std::vector<uint8_t>& keep_w,
                          const std::vector<uint8_t>* keep_edge) {
  DimerGraph g;
  g.topology = Topology::plane;
  g.delta = full.delta;
  std::vector<int> bmap(full.nB(), -1), wmap(full.nW(), -1);
  for (int b = 0; b < full.nB(); ++b)
    if (keep_b[b]) {
      bmap[b] = (int)g.black_pos.size();
      g.black_pos.push_back(full.black_pos[b]);
      g.black_role.push_back(full.black_role[b]);
      g.nu_black.push_back(full.nu_black[b]);
    }
  for (int w = 0; w < full.nW(); ++w)
    if (keep_w[w]) {
      wmap[w] = (int)g.white_pos.size();
      g.white_pos.push_back(full.white_pos[w]);
      g.nu_white.push_back(full.nu_white[w]);
      g.mu_white.push_back(full.mu_white[w]);
    }
  std::vector<int> emap(full.edges.size(), -1);
  for (int e = 0; e < (int)full.edges.size(); ++e) {
    const auto& fe = full.edges[e];
    if (bmap[fe.b] < 0 || wmap[fe.w] < 0) continue;
    if (keep_edge && !(*keep_edge)[e]) continue;
    MEdge ne = fe;
    ne.w = wmap[fe.w];
    ne.b = bmap[fe.b];
    ne.wrap = {0, 0};
    ne.face = {-1, -1};
    emap[e] = (int)g.edges.size();
    g.edges.push_back(ne);
    g.p_edge.push_back(full.p_edge[e]);
  }
  for (const auto& ff : full.faces) {
    bool alive = true;
    for (int e : ff.edges) alive = alive && e >= 0 && emap[e] >= 0;
    if (!alive) continue;
    QuadFace nf;
    nf.w1 = wmap[ff.w1];
    nf.x = bmap[ff.x];
    nf.w2 = wmap[ff.w2];
    nf.y = bmap[ff.y];
    nf.center = ff.center;
    for (int k = 0; k < 4; ++k) nf.edges[k] = emap[ff.edges[k]];
    const int fid = (int)g.faces.size();
    g.faces.push_back(nf);
    for (int e : nf.edges) {
      auto& fc = g.edges[e].face;
      if (fc[0] < 0)
        fc[0] = fid;
      else
        fc[1] = fid;
    }
  }
  build_incidence(g);
  fill_face_adj(g);
  return g;
}

}  // namespace

DimerGraph build_square_subregion(int width, int height, const std::vector<uint8_t>& keep,
                                  double delta) {
  if ((int)keep.size() != width * height)
    throw std::invalid_argument("build_square_subregion: mask size mismatch");
  DimerGraph full = build_square_lattice(width, height, Topology::plane, delta);
  std::vector<uint8_t> kb(full.nB(), 0), kw(full.nW(), 0);
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) {
      if (!keep[i + width * j]) continue;
      int node = full.site_node[i + width * j];
      if ((i + j) % 2 == 0)
        kb[node] = 1;
      else
        kw[node] = 1;
    }
  return restrict_nodes(full, kb, kw, nullptr);
}

DimerGraph build_quad_subregion(const DimerGraph& full, const std::vector<int>& face_ids) {
  std::vector<uint8_t> kb(full.nB(), 0), kw(full.nW(), 0), ke(full.edges.size(), 0);
  for (int f : face_ids) {
    const auto& q = full.faces.at(f);
    kw[q.w1] = kw[q.w2] = 1;
    kb[q.x] = kb[q.y] = 1;
    for (int e : q.edges) ke[e] = 1;
  }
  return restrict_nodes(full, kb, kw, &ke);
}

std::vector<int> quad_face_path(const DimerGraph& full, int start_face, int length,
                                uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> out{start_face};
  std::vector<uint8_t> used(full.faces.size(), 0);
  used[start_face] = 1;
  int cur = start_face;
  while ((int)out.size() < length) {
    std::vector<int> options;
    for (int e : full.faces[cur].edges) {
      int other = full.edges[e].face[0] == cur ? full.edges[e].face[1] : full.edges[e].face[0];
      if (other >= 0 && !used[other]) options.push_back(other);
    }
    if (options.empty()) break;
    cur = options[rng() % options.size()];
    used[cur] = 1;
    out.push_back(cur);
  }
  return out;
}

std::vector<uint8_t> column_convex_mask(int width, int height, uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&](int lo, int hi) { return lo + (int)(rng() % (uint64_t)(hi - lo + 1)); };
  std::vector<uint8_t> mask((size_t)width * height, 0);
  int lo = draw(0, height - 2), hi = draw(lo + 1, height - 1);
  for (int i = 0; i < width; ++i) {
    for (int j = lo; j <= hi; ++j) mask[i + (size_t)width * j] = 1;
    if (i + 1 == width) break;
    // next interval must overlap [lo, hi] to keep the region connected
    int nlo = draw(std::max(0, lo - 2), std::min(hi, height - 2));
    int nhi = draw(std::max(nlo + 1, lo), std::min(height - 1, hi + 2));
    lo = nlo;
    hi = nhi;
  }
  return mask;
}

double gauge_identity_violation(const DimerGraph& g) {
  double worst = 0;
  for (const auto& e : g.edges) {
    cplx gauge = std::exp(cplx(0, g.nu_white[e.w])) * e.sK * std::exp(cplx(0, g.nu_black[e.b]));
    worst = std::max(worst, std::abs(e.K - gauge));
  }
  return worst;
}

bool kasteleyn_faces_ok(const DimerGraph& g, std::string* why) {
  for (size_t f = 0; f < g.faces.size(); ++f) {
    double prod = 1;
    for (int e : g.faces[f].edges) {
      if (std::abs(g.edges[e].sK) < 1e-14) {
        if (why) *why = "vanishing entry on face " + std::to_string(f);
        return false;
      }
      prod *= g.edges[e].sK > 0 ? 1.0 : -1.0;
    }
    if (prod != -1.0) {
      if (why) *why = "face " + std::to_string(f) + " has sign product +1";
      return false;
    }
  }
  return true;
}

LaplacianSplitReport laplacian_split_check(const DimerGraph& g) {
  // the identities hold in the bulk: a matrix entry is checked only when every
  // white contributing to it carries a full rhombus (boundary whites exempt)
  const int nb = g.nB();
  std::vector<double> L((size_t)nb * nb, 0.0), expect((size_t)nb * nb, 0.0);
  std::vector<int> count((size_t)nb * nb, 0);
  std::vector<uint8_t> full((size_t)nb * nb, 1), black_full(nb, 1);
  for (int w = 0; w < g.nW(); ++w) {
    const auto& es = g.white_edges[w];
    const bool deg4 = es.size() == 4;
    for (int a : es) {
      if (!deg4) black_full[g.edges[a].b] = 0;
      for (int b : es) {
        const auto &ea = g.edges[a], &eb = g.edges[b];
        const size_t idx = ea.b + (size_t)nb * eb.b;
        L[idx] += ea.sK * eb.sK / g.mu_white[w];
        count[idx] += 1;
        if (!deg4) full[idx] = 0;
      }
    }
    // expected block entries: with diagonals (p, p') and (d, d') of the
    // rhombus, the off-diagonal primal weight is -|d'-d| / (2 |p'-p|)
    if (deg4) {
      int prim[2], dual[2], np = 0, nd = 0;
      for (int e : es)
        (g.black_role[g.edges[e].b] == BlackRole::gamma ? prim[np++] : dual[nd++]) = e;
      if (np == 2 && nd == 2) {
        double lp = std::abs(g.edges[prim[0]].disp - g.edges[prim[1]].disp);
        double ld = std::abs(g.edges[dual[0]].disp - g.edges[dual[1]].disp);
        int p0 = g.edges[prim[0]].b, p1 = g.edges[prim[1]].b;
        int d0 = g.edges[dual[0]].b, d1 = g.edges[dual[1]].b;
        expect[p0 + (size_t)nb * p1] += -ld / (2 * lp);
        expect[p1 + (size_t)nb * p0] += -ld / (2 * lp);
        expect[d0 + (size_t)nb * d1] += -lp / (2 * ld);
        expect[d1 + (size_t)nb * d0] += -lp / (2 * ld);
      }
    }
  }
  LaplacianSplitReport r;
  for (int i = 0; i < nb; ++i) {
    double rowsum = 0;
    const bool row_full = black_full[i] == 1;
    for (int j = 0; j < nb; ++j) {
      if (i == j) continue;
      const size_t idx = i + (size_t)nb * j;
      double v = L[idx];
      rowsum += v;
      if (!full[idx]) continue;
      if (g.black_role[i] != g.black_role[j]) {
        // both rhombi on a shared tiling edge must be present to cancel
        if (count[idx] == 2) r.max_off_block = std::max(r.max_off_block, std::abs(v));
      } else {
        r.max_entry_err = std::max(r.max_entry_err, std::abs(v - expect[idx]));
      }
    }
    if (row_full)
      r.max_diag_err = std::max(r.max_diag_err, std::abs(L[i + (size_t)nb * i] + rowsum));
  }
  return r;
}

double p_ccw_arg(const DimerGraph& g, int edge_id) {
  const auto& e = g.edges[edge_id];
  const auto& es = g.white_edges[e.w];
  cplx prev, next;  // corners adjacent to b, relative to the white
  if (es.size() == 4) {
    int k = 0;
    while (es[k] != edge_id) ++k;
    next = g.edges[es[(k + 1) % 4]].disp;
    prev = g.edges[es[(k + 3) % 4]].disp;
  } else {
    // boundary white of a square-lattice region: reconstruct geometrically
    next = e.disp * cplx(0, 1);
    prev = e.disp * cplx(0, -1);
  }
  return std::arg((prev - e.disp) / (next - e.disp)) / (2 * M_PI);
}

namespace {

int shared_edge(const DimerGraph& g, int f, int fp) {
  int found = -1;
  for (int e : g.faces[f].edges) {
    const auto& fc = g.edges[e].face;
    int other = fc[0] == f ? fc[1] : fc[0];
    if (other == fp && (found < 0 || e < found)) found = e;
  }
  return found;
}

void append_step(const DimerGraph& g, DualPath& p, int f, int fp, int e) {
  cplx t = g.nearest_disp(g.faces[fp].center - g.faces[f].center);
  const cplx d = g.edges[e].disp;
  p.crossed_edges.push_back(e);
  p.black_on_left.push_back(t.real() * d.imag() - t.imag() * d.real() > 0 ? 1 : 0);
  p.faces.push_back(fp);
}

DualPath bfs_dual_path(const DimerGraph& g, int from, int to) {
  std::vector<int> parent(g.faces.size(), -2);
  parent[from] = -1;
  std::queue<int> q;
  q.push(from);
  while (!q.empty()) {
    int f = q.front();
    q.pop();
    if (f == to) break;
    for (int e : g.faces[f].edges) {
      const auto& fc = g.edges[e].face;
      int other = fc[0] == f ? fc[1] : fc[0];
      if (other >= 0 && parent[other] == -2) {
        parent[other] = f;
        q.push(other);
      }
    }
  }
  if (parent[to] == -2) throw std::runtime_error("dual path: faces not connected");
  std::vector<int> seq;
  for (int f = to; f != -1; f = parent[f]) seq.push_back(f);
  std::reverse(seq.begin(), seq.end());
  return dual_path_through(g, seq);
}

}  // namespace

DualPath dual_path_through(const DimerGraph& g, const std::vector<int>& face_seq) {
  DualPath p;
  if (face_seq.empty()) return p;
  p.faces.push_back(face_seq[0]);
  for (size_t k = 0; k + 1 < face_seq.size(); ++k) {
    int e = shared_edge(g, face_seq[k], face_seq[k + 1]);
    if (e < 0) throw std::runtime_error("dual path: consecutive faces share no edge");
    append_step(g, p, face_seq[k], face_seq[k + 1], e);
  }
  return p;
}

DualPath straight_dual_path(const DimerGraph& g, int face_from, int face_to) {
  DualPath p;
  p.faces.push_back(face_from);
  std::set<int> seen{face_from};
  int f = face_from;
  size_t guard = 4 * g.faces.size() + 4;
  while (f != face_to && guard--) {
    int best = -1, via = -1;
    double bd = 0;
    for (int e : g.faces[f].edges) {
      const auto& fc = g.edges[e].face;
      int other = fc[0] == f ? fc[1] : fc[0];
      if (other < 0) continue;
      double d = std::abs(g.nearest_disp(g.faces[face_to].center - g.faces[other].center));
      if (best < 0 || d < bd - 1e-12 || (std::abs(d - bd) <= 1e-12 && other < best)) {
        best = other;
        via = e;
        bd = d;
      }
    }
    if (best < 0 || seen.count(best)) return bfs_dual_path(g, face_from, face_to);
    append_step(g, p, f, best, via);
    seen.insert(best);
    f = best;
  }
  if (f != face_to) return bfs_dual_path(g, face_from, face_to);
  return p;
}

}  // namespace dimerlab
