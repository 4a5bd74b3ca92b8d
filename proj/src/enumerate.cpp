#include "dimerlab/enumerate.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace dimerlab {

namespace {

uint64_t count_rec(const DimerGraph& g, int w, uint64_t used,
                   std::unordered_map<uint64_t, uint64_t>& memo) {
  if (w == g.nW()) return 1;
  auto it = memo.find(used);
  if (it != memo.end()) return it->second;
  uint64_t total = 0;
  for (int e : g.white_edges[w]) {
    uint64_t bit = 1ull << g.edges[e].b;
    if (used & bit) continue;
    total += count_rec(g, w + 1, used | bit, memo);
  }
  memo.emplace(used, total);
  return total;
}

double weight_rec(const DimerGraph& g, int w, uint64_t used,
                  std::unordered_map<uint64_t, double>& memo) {
  if (w == g.nW()) return 1.0;
  auto it = memo.find(used);
  if (it != memo.end()) return it->second;
  double total = 0;
  for (int e : g.white_edges[w]) {
    uint64_t bit = 1ull << g.edges[e].b;
    if (used & bit) continue;
    total += std::abs(g.edges[e].sK) * weight_rec(g, w + 1, used | bit, memo);
  }
  memo.emplace(used, total);
  return total;
}

void enum_rec(const DimerGraph& g, int w, uint64_t used, Matching& cur,
              std::vector<Matching>& out) {
  if (w == g.nW()) {
    out.push_back(cur);
    return;
  }
  for (int e : g.white_edges[w]) {
    uint64_t bit = 1ull << g.edges[e].b;
    if (used & bit) continue;
    cur.push_back(e);
    enum_rec(g, w + 1, used | bit, cur, out);
    cur.pop_back();
  }
}

}  // namespace

uint64_t count_matchings(const DimerGraph& g) {
  if (g.nW() != g.nB()) return 0;
  if (g.nB() > 62) throw std::invalid_argument("count_matchings: too many vertices");
  std::unordered_map<uint64_t, uint64_t> memo;
  return count_rec(g, 0, 0, memo);
}

double weighted_matching_sum(const DimerGraph& g) {
  if (g.nW() != g.nB()) return 0.0;
  if (g.nB() > 62) throw std::invalid_argument("weighted_matching_sum: too many vertices");
  std::unordered_map<uint64_t, double> memo;
  return weight_rec(g, 0, 0, memo);
}

std::vector<Matching> enumerate_matchings(const DimerGraph& g) {
  if (g.nW() > 28) throw std::invalid_argument("enumerate_matchings: more than 28 whites");
  std::vector<Matching> out;
  if (g.nW() != g.nB()) return out;
  Matching cur;
  enum_rec(g, 0, 0, cur, out);
  return out;
}

uint64_t count_domino_tilings(int width, int height) {
  if (width < 1 || height < 1) return 0;
  if (width > height) std::swap(width, height);
  if (width > 24) throw std::invalid_argument("count_domino_tilings: width too large");
  const uint64_t nmask = 1ull << width;
  // row transfer: mask = columns covered by vertical dominoes from the row above
  std::vector<uint64_t> cur(nmask, 0), nxt(nmask, 0);
  cur[0] = 1;
  // fill one row given incoming protrusions, enumerating outgoing ones
  std::function<void(int, uint64_t, uint64_t, uint64_t, bool)> fill =
      [&](int col, uint64_t in, uint64_t out, uint64_t ways, bool allow_vertical) {
        if (col == width) {
          nxt[out] += ways;
          return;
        }
        const uint64_t bit = 1ull << col;
        if (in & bit) {
          fill(col + 1, in, out, ways, allow_vertical);
          return;
        }
        if (allow_vertical) fill(col + 1, in, out | bit, ways, allow_vertical);
        if (col + 1 < width && !(in & (bit << 1)))
          fill(col + 2, in, out, ways, allow_vertical);
      };
  for (int row = 0; row < height; ++row) {
    std::fill(nxt.begin(), nxt.end(), 0);
    for (uint64_t m = 0; m < nmask; ++m)
      if (cur[m]) fill(0, m, 0, cur[m], row + 1 < height);
    cur.swap(nxt);
  }
  return cur[0];
}

}  // namespace dimerlab
