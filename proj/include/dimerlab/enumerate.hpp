#pragma once
#include <cstdint>
#include <vector>

#include "dimerlab/dimer_graph.hpp"

namespace dimerlab {

// A perfect matching, stored as edge ids (one per white, sorted by white id).
using Matching = std::vector<int>;

// exhaustive count/list via bitmask DP over blacks; requires nW <= 28
uint64_t count_matchings(const DimerGraph& g);
std::vector<Matching> enumerate_matchings(const DimerGraph& g);

// partition function: sum over matchings of the product of |sK| edge weights
double weighted_matching_sum(const DimerGraph& g);

// domino tilings of a width x height board (transfer matrix over row profiles)
uint64_t count_domino_tilings(int width, int height);

}  // namespace dimerlab
