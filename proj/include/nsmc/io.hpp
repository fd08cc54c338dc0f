#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nsmc {

inline constexpr const char* kVersion = "0.1.0";

struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version = kVersion;

  std::string comment_line() const;  // "# config=<hex> seed=<n> version=<v>"
};

/// Shortest round-trip decimal form of a double; bit-deterministic.
std::string format_double(double v);

std::uint64_t fnv1a_hash(const std::string& data);

/// RFC-4180-style CSV (header row, \n line endings) preceded by one
/// provenance comment line.
void write_csv(const std::string& path, const Provenance& prov,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Prefix relative paths with $NSMC_OUT_DIR when it is set.
std::string resolve_output_path(const std::string& path);

}  // namespace nsmc
