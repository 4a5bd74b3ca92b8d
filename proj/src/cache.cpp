#include "dimerlab/cache.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace dimerlab {

namespace {

constexpr uint64_t kMagic = 0x444c43414348451full;  // file format tag

uint64_t fnv(const std::string& s, uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::filesystem::path key_path(const CacheKey& key) {
  uint64_t h = fnv(key.params, fnv(key.op, key.graph_sig ^ 1469598103934665603ull));
  char name[64];
  std::snprintf(name, sizeof name, "%s-%016llx.bin", key.op.c_str(),
                (unsigned long long)h);
  return std::filesystem::path(cache_root()) / name;
}

}  // namespace

std::string cache_root() {
  const char* env = std::getenv("DIMERLAB_CACHE");
  return env ? std::string(env) : std::string();
}

std::optional<std::vector<double>> cache_load(const CacheKey& key) {
  if (cache_root().empty()) return std::nullopt;
  std::ifstream in(key_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  uint64_t magic = 0, n = 0;
  in.read(reinterpret_cast<char*>(&magic), 8);
  in.read(reinterpret_cast<char*>(&n), 8);
  if (!in || magic != kMagic || n > (1ull << 32)) return std::nullopt;
  std::vector<double> out(n);
  in.read(reinterpret_cast<char*>(out.data()), (std::streamsize)(8 * n));
  if (!in) return std::nullopt;
  return out;
}

void cache_store(const CacheKey& key, const std::vector<double>& payload) {
  if (cache_root().empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(cache_root(), ec);
  auto path = key_path(key);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return;
    uint64_t magic = kMagic, n = payload.size();
    out.write(reinterpret_cast<const char*>(&magic), 8);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(payload.data()), (std::streamsize)(8 * n));
    if (!out) return;
  }
  std::filesystem::rename(tmp, path, ec);  // atomic publish
}

CacheGcReport cache_gc(double max_age_days) {
  CacheGcReport rep;
  if (cache_root().empty()) return rep;
  std::error_code ec;
  auto now = std::filesystem::file_time_type::clock::now();
  for (const auto& entry : std::filesystem::directory_iterator(cache_root(), ec)) {
    if (!entry.is_regular_file(ec)) continue;
    auto ext = entry.path().extension();
    if (ext != ".bin" && ext != ".tmp") continue;
    auto age = std::chrono::duration_cast<std::chrono::seconds>(
                   now - entry.last_write_time(ec))
                   .count();
    if (age > max_age_days * 86400.0 || ext == ".tmp") {
      rep.bytes_freed += entry.file_size(ec);
      std::filesystem::remove(entry.path(), ec);
      rep.removed += 1;
    } else {
      rep.kept += 1;
    }
  }
  return rep;
}

}  // namespace dimerlab
