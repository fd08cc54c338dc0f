#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsmc/fields.hpp"

namespace nsmc {

struct FieldDecl {
  std::string kind;
  std::vector<double> params;
};

/// One structured config per run; command-line flags override keys.
/// Parsing is strict: unknown keys and invalid values fail with the key
/// path in the message.
struct RunConfig {
  int dimension = 3;
  double t = 1.0;
  std::vector<FieldDecl> initial;  // one entry per component, or one entry replicated
  std::optional<std::vector<FieldDecl>> forcing;
  int depth = 1;
  long long budget = 10000;
  std::string allocation = "exact";  // exact | paper | uniform | file
  std::optional<std::string> allocation_file;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> grid_points;
  std::vector<double> grid_times;
  std::string bilinear_mode = "convective_only";  // convective_only | full
  std::string u0_mode = "exact";                  // exact | mc
  long long mc_u0_samples = 1000;
  int threads = 1;
  std::optional<double> b_norm;

  std::vector<TestField> initial_fields() const;
  std::optional<std::vector<TestField>> forcing_fields() const;
  SpaceTimeGrid make_grid() const;

  /// Canonical serialization; parse(serialize(c)) == c.
  std::string to_json_string() const;
  std::uint64_t config_hash() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_string(const std::string& json_text);

}  // namespace nsmc
