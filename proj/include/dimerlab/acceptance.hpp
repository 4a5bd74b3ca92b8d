#pragma once
#include <string>
#include <vector>

namespace dimerlab {

struct CriterionResult {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

// the 13 release criteria; id runs 1..13
CriterionResult run_criterion(int id, uint64_t seed = 20260816);
std::vector<CriterionResult> run_all_criteria(uint64_t seed = 20260816);

}  // namespace dimerlab
