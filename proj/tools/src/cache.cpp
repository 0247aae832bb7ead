#include "cache.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;

namespace plbif::cli {

namespace {

constexpr const char* kIndexName = "index.txt";

struct IndexEntry {
  std::uintmax_t size = 0;
  std::uint64_t checksum = 0;
};

bool read_index(const fs::path& path, std::map<std::string, IndexEntry>& out) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string name, checksum;
    IndexEntry e;
    if (!(row >> name >> e.size >> checksum) || checksum.size() != 16) return false;
    try {
      e.checksum = std::stoull(checksum, nullptr, 16);
    } catch (const std::exception&) {
      return false;
    }
    out[name] = e;
  }
  return !out.empty();
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

std::uint64_t file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return h;
}

std::string to_string(CacheStatus status) {
  switch (status) {
    case CacheStatus::off: return "off";
    case CacheStatus::hit: return "hit";
    case CacheStatus::miss: return "miss";
    case CacheStatus::corrupt: return "corrupt";
  }
  return "?";
}

FieldCache::FieldCache(fs::path root) : root_(std::move(root)) {}

fs::path FieldCache::default_root() {
  if (const char* dir = std::getenv("PLBIF_CACHE_DIR"); dir && *dir) return dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "plbif";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "plbif";
  return {};
}

CacheStatus FieldCache::restore(const std::string& key, const std::vector<std::string>& names,
                                const fs::path& out_dir, std::ostream& warn) const {
  if (!enabled()) return CacheStatus::off;
  const fs::path entry = root_ / key;
  std::error_code ec;
  if (!fs::is_directory(entry, ec)) return CacheStatus::miss;

  std::map<std::string, IndexEntry> index;
  bool ok = read_index(entry / kIndexName, index);
  for (const auto& name : names) {
    if (!ok) break;
    auto it = index.find(name);
    const fs::path file = entry / name;
    ok = it != index.end() && fs::is_regular_file(file, ec) && fs::file_size(file, ec) == it->second.size &&
         file_checksum(file) == it->second.checksum;
  }
  if (!ok) {
    warn << "warning: cache entry " << entry.string() << " is corrupt; recomputing\n";
    fs::remove_all(entry, ec);
    return CacheStatus::corrupt;
  }
  fs::create_directories(out_dir);
  for (const auto& name : names) fs::copy_file(entry / name, out_dir / name, fs::copy_options::overwrite_existing);
  return CacheStatus::hit;
}

void FieldCache::store(const std::string& key, const std::vector<std::string>& names, const fs::path& out_dir) const {
  if (!enabled()) return;
  std::error_code ec;
  fs::create_directories(root_, ec);
  // Build in a private directory and rename so readers never see a partial entry.
  const fs::path staging = root_ / fmt::format("{}.tmp-{}", key, ::getpid());
  fs::remove_all(staging, ec);
  fs::create_directories(staging);
  std::ofstream index(staging / kIndexName);
  for (const auto& name : names) {
    fs::copy_file(out_dir / name, staging / name, fs::copy_options::overwrite_existing);
    index << name << ' ' << fs::file_size(staging / name) << ' ' << hex64(file_checksum(staging / name)) << '\n';
  }
  index.close();
  const fs::path entry = root_ / key;
  fs::remove_all(entry, ec);
  fs::rename(staging, entry, ec);
  if (ec) fs::remove_all(staging, ec);
}

}  // namespace plbif::cli
