#pragma once
#include <optional>
#include <string>
#include <vector>

namespace dimerlab {

// Disk cache for expensive kernel/correlator tables.  Root from DIMERLAB_CACHE
// (unset = disabled).  Keys combine a graph signature, the operation name and
// its parameters; payloads are raw little-endian doubles with a small header.
struct CacheKey {
  uint64_t graph_sig;
  std::string op;
  std::string params;
};

std::optional<std::vector<double>> cache_load(const CacheKey& key);
void cache_store(const CacheKey& key, const std::vector<double>& payload);
std::string cache_root();  // empty when disabled

struct CacheGcReport {
  int kept = 0, removed = 0;
  uint64_t bytes_freed = 0;
};
CacheGcReport cache_gc(double max_age_days);

}  // namespace dimerlab
