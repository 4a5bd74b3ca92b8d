#include "dimerlab/rhombus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dimerlab {

namespace {

// rectangular-grid tilings (square and lozenge share combinatorics): vertices
// at (i*sx, j*sy) for i+j even, one rhombus per odd site
RhombusTiling grid_tiling(int nx, int ny, double sx, double sy, double delta, bool biperiodic) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid_tiling: need nx, ny >= 1");
  const int W = 2 * nx, H = 2 * ny;
  RhombusTiling t;
  t.delta = delta;
  t.biperiodic = biperiodic;
  if (biperiodic) {
    t.period1 = cplx(W * sx, 0);
    t.period2 = cplx(0, H * sy);
    t.cells1 = nx;
    t.cells2 = ny;
  }

  std::vector<int> vid(W * H, -1);
  auto add_vertex = [&](int i, int j) {
    int& id = vid[i + W * j];
    if (id < 0) {
      id = (int)t.vertices.size();
      t.vertices.push_back(cplx(i * sx, j * sy));
      t.is_primal.push_back((i % 2) == 0);
    }
    return id;
  };

  for (int j = 0; j < H; ++j)
    for (int i = 0; i < W; ++i) {
      if (((i + j) & 1) == 0) continue;  // rhombus centers at odd sites
      // corners ccw: (i+1,j),(i,j+1),(i-1,j),(i,j-1)
      const int ci[4] = {i + 1, i, i - 1, i};
      const int cj[4] = {j, j + 1, j, j - 1};
      RhombusTiling::Rhombus r;
      bool ok = true;
      for (int k = 0; k < 4 && ok; ++k) {
        int a = ci[k], b = cj[k], wa = 0, wb = 0;
        if (biperiodic) {
          if (a < 0) { a += W; wa = -1; }
          if (a >= W) { a -= W; wa = 1; }
          if (b < 0) { b += H; wb = -1; }
          if (b >= H) { b -= H; wb = 1; }
        } else if (a < 0 || a >= W || b < 0 || b >= H) {
          ok = false;
          break;
        }
        r.v[k] = a + W * b;  // resolve to vertex ids later
        r.wrap[k] = {wa, wb};
      }
      if (!ok) continue;
      for (int k = 0; k < 4; ++k) {
        int cell = r.v[k];
        r.v[k] = add_vertex(cell % W, cell / W);
      }
      t.rhombi.push_back(r);
    }
  return t;
}

}  // namespace

RhombusTiling square_tiling(int nx, int ny, double delta, bool biperiodic) {
  const double s = delta / std::sqrt(2.0);
  return grid_tiling(nx, ny, s, s, delta, biperiodic);
}

RhombusTiling lozenge_tiling(int nx, int ny, double theta, double delta, bool biperiodic) {
  if (!(theta > 0 && theta < M_PI / 2))
    throw std::invalid_argument("lozenge_tiling: theta must be in (0, pi/2)");
  return grid_tiling(nx, ny, delta * std::cos(theta), delta * std::sin(theta), delta, biperiodic);
}

RhombusTiling rhombille_tiling(int nx, int ny, double delta, bool biperiodic) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("rhombille_tiling: need nx, ny >= 1");
  // triangular lattice of side sqrt(3) delta plus the two triangle centers per
  // cell; one 60-degree rhombus per triangular-lattice edge
  const double side = std::sqrt(3.0) * delta;
  const cplx a1(side, 0), a2(side * 0.5, side * std::sqrt(3.0) / 2.0);
  RhombusTiling t;
  t.delta = delta;
  t.biperiodic = biperiodic;
  if (biperiodic) {
    t.period1 = double(nx) * a1;
    t.period2 = double(ny) * a2;
    t.cells1 = nx;
    t.cells2 = ny;
  }

  // node kinds per cell: 0 = lattice vertex i a1 + j a2, 1 = up-triangle
  // center (+ (a1+a2)/3), 2 = down-triangle center (+ 2(a1+a2)/3)
  const int gx = biperiodic ? nx : nx + 1;
  const int gy = biperiodic ? ny : ny + 1;
  std::vector<int> node(3 * (size_t)gx * gy, -1);
  auto get_node = [&](int kind, int i, int j) {
    int idx = kind + 3 * (i + gx * j);
    if (node[idx] < 0) {
      node[idx] = (int)t.vertices.size();
      cplx pos = double(i) * a1 + double(j) * a2;
      if (kind == 1) pos += (a1 + a2) / 3.0;
      if (kind == 2) pos += 2.0 * (a1 + a2) / 3.0;
      t.vertices.push_back(pos);
      t.is_primal.push_back(kind == 0);
    }
    return node[idx];
  };

  struct Corner {
    int kind, i, j;
  };
  auto add_rhombus = [&](std::array<Corner, 4> cs) {
    RhombusTiling::Rhombus r;
    cplx center = 0;
    std::array<cplx, 4> pos;
    for (int k = 0; k < 4; ++k) {
      int i = cs[k].i, j = cs[k].j, wi = 0, wj = 0;
      if (biperiodic) {
        while (i < 0) { i += nx; --wi; }
        while (i >= nx) { i -= nx; ++wi; }
        while (j < 0) { j += ny; --wj; }
        while (j >= ny) { j -= ny; ++wj; }
      } else if (i < 0 || i >= gx || j < 0 || j >= gy ||
                 (cs[k].kind > 0 && (i >= nx || j >= ny))) {
        return;  // incomplete rhombus at the plane boundary
      }
      r.v[k] = get_node(cs[k].kind, i, j);
      r.wrap[k] = {wi, wj};
      pos[k] = t.corner_pos(r, k);
      center += pos[k] / 4.0;
    }
    // sort corners ccw around the center
    std::array<int, 4> ord{0, 1, 2, 3};
    std::sort(ord.begin(), ord.end(), [&](int u, int v) {
      return std::arg(pos[u] - center) < std::arg(pos[v] - center);
    });
    RhombusTiling::Rhombus rs;
    for (int k = 0; k < 4; ++k) {
      rs.v[k] = r.v[ord[k]];
      rs.wrap[k] = r.wrap[ord[k]];
    }
    t.rhombi.push_back(rs);
  };

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      // edge (V(i,j), V(i+1,j)): up(i,j) and down(i,j-1) centers
      add_rhombus({Corner{0, i, j}, Corner{0, i + 1, j}, Corner{1, i, j}, Corner{2, i, j - 1}});
      // edge (V(i,j), V(i,j+1)): up(i,j) and down(i-1,j)
      add_rhombus({Corner{0, i, j}, Corner{0, i, j + 1}, Corner{1, i, j}, Corner{2, i - 1, j}});
      // edge (V(i+1,j), V(i,j+1)): up(i,j) and down(i,j)
      add_rhombus({Corner{0, i + 1, j}, Corner{0, i, j + 1}, Corner{1, i, j}, Corner{2, i, j}});
    }
  return t;
}

double min_rhombus_angle(const RhombusTiling& t) {
  double best = M_PI;
  for (size_t r = 0; r < t.rhombi.size(); ++r) {
    const auto& rh = t.rhombi[r];
    for (int k = 0; k < 4; ++k) {
      cplx p = t.corner_pos(rh, k);
      cplx u = t.corner_pos(rh, (k + 1) % 4) - p;
      cplx v = t.corner_pos(rh, (k + 3) % 4) - p;
      double ang = std::abs(std::arg(v / u));
      best = std::min(best, ang);
    }
  }
  return best;
}

double rhombus_area(const RhombusTiling& t, int r) {
  const auto& rh = t.rhombi[r];
  double s = 0;
  for (int k = 0; k < 4; ++k) {
    cplx p = t.corner_pos(rh, k), q = t.corner_pos(rh, (k + 1) % 4);
    s += p.real() * q.imag() - q.real() * p.imag();
  }
  return std::abs(s) / 2.0;
}

std::string tiling_to_json(const RhombusTiling& t) {
  nlohmann::json j;
  j["delta"] = t.delta;
  if (t.biperiodic) {
    j["periods"] = {{t.period1.real(), t.period1.imag()}, {t.period2.real(), t.period2.imag()}};
    j["cells"] = {t.cells1, t.cells2};
  }
  auto& vj = j["vertices"] = nlohmann::json::array();
  for (size_t i = 0; i < t.vertices.size(); ++i)
    vj.push_back({t.vertices[i].real(), t.vertices[i].imag(), t.is_primal[i] ? 1 : 0});
  auto& rj = j["rhombi"] = nlohmann::json::array();
  for (const auto& r : t.rhombi) {
    nlohmann::json e = nlohmann::json::array();
    for (int k = 0; k < 4; ++k)
      e.push_back(nlohmann::json::array({r.v[k], r.wrap[k][0], r.wrap[k][1]}));
    rj.push_back(e);
  }
  return j.dump(1);
}

RhombusTiling tiling_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  RhombusTiling t;
  t.delta = j.at("delta").get<double>();
  if (j.contains("periods")) {
    t.biperiodic = true;
    t.period1 = cplx(j["periods"][0][0], j["periods"][0][1]);
    t.period2 = cplx(j["periods"][1][0], j["periods"][1][1]);
    if (j.contains("cells")) {
      t.cells1 = j["cells"][0];
      t.cells2 = j["cells"][1];
    }
  }
  for (const auto& v : j.at("vertices")) {
    t.vertices.push_back(cplx(v[0], v[1]));
    t.is_primal.push_back(v[2].get<int>() != 0);
  }
  for (const auto& e : j.at("rhombi")) {
    RhombusTiling::Rhombus r;
    for (int k = 0; k < 4; ++k) {
      r.v[k] = e[k][0];
      r.wrap[k] = {e[k][1].get<int>(), e[k][2].get<int>()};
    }
    t.rhombi.push_back(r);
  }
  return t;
}

}  // namespace dimerlab
