#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace plbif::cli {

/// 64-bit FNV-1a; stable across runs and platforms.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t value);
std::uint64_t file_checksum(const std::filesystem::path& path);

enum class CacheStatus { off, hit, miss, corrupt };
std::string to_string(CacheStatus status);

/// Content-addressed store of artifact files. Entry <root>/<key>/ holds the
/// files plus an index of names, sizes and checksums.
class FieldCache {
 public:
  /// Disabled when root is empty.
  explicit FieldCache(std::filesystem::path root);

  /// Root from PLBIF_CACHE_DIR, else $XDG_CACHE_HOME/plbif, else ~/.cache/plbif.
  static std::filesystem::path default_root();

  bool enabled() const { return !root_.empty(); }
  const std::filesystem::path& root() const { return root_; }

  /// On a verified hit copies every file into `out_dir`. A damaged entry is
  /// removed, a warning goes to `warn`, and the result is `corrupt`.
  CacheStatus restore(const std::string& key, const std::vector<std::string>& names,
                      const std::filesystem::path& out_dir, std::ostream& warn) const;

  /// Copies the named files of `out_dir` into the entry for `key`.
  void store(const std::string& key, const std::vector<std::string>& names, const std::filesystem::path& out_dir) const;

 private:
  std::filesystem::path root_;
};

}  // namespace plbif::cli
