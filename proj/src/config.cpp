#include "nsmc/config.hpp"

#include <set>
#include <stdexcept>

#include <json.hpp>

#include "nsmc/io.hpp"

namespace nsmc {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.contains(it.key()))
      throw std::invalid_argument("config: unknown key '" + where + it.key() + "'");
}

FieldDecl parse_field_decl(const json& j, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  reject_unknown_keys(j, {"kind", "params"}, where + ".");
  FieldDecl decl;
  decl.kind = j.at("kind").get<std::string>();
  field_kind_from_name(decl.kind);  // validates
  if (j.contains("params")) decl.params = j.at("params").get<std::vector<double>>();
  return decl;
}

std::vector<FieldDecl> parse_field_list(const json& j, const std::string& where) {
  std::vector<FieldDecl> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(parse_field_decl(j[i], where + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(parse_field_decl(j, where));
  }
  if (out.empty()) throw std::invalid_argument("config: " + where + " is empty");
  return out;
}

json field_list_to_json(const std::vector<FieldDecl>& fields) {
  json arr = json::array();
  for (const auto& f : fields) arr.push_back(json{{"kind", f.kind}, {"params", f.params}});
  return arr;
}

std::vector<TestField> build_fields(const std::vector<FieldDecl>& decls, int d,
                                    const std::string& what) {
  std::vector<TestField> out;
  if (static_cast<int>(decls.size()) != 1 && static_cast<int>(decls.size()) != d)
    throw std::invalid_argument("config: " + what + " needs 1 or d field declarations");
  for (int i = 0; i < d; ++i) {
    const FieldDecl& decl = decls[decls.size() == 1 ? 0 : static_cast<std::size_t>(i)];
    out.emplace_back(field_kind_from_name(decl.kind), decl.params, d);
  }
  return out;
}

}  // namespace

std::vector<TestField> RunConfig::initial_fields() const {
  return build_fields(initial, dimension, "initial");
}

std::optional<std::vector<TestField>> RunConfig::forcing_fields() const {
  if (!forcing) return std::nullopt;
  return build_fields(*forcing, dimension, "forcing");
}

SpaceTimeGrid RunConfig::make_grid() const {
  SpaceTimeGrid grid;
  for (const auto& x : grid_points)
    for (double tt : grid_times) grid.points.push_back({x, tt});
  grid.validate();
  return grid;
}

std::string RunConfig::to_json_string() const {
  json j;
  j["dimension"] = dimension;
  j["t"] = t;
  j["initial"] = field_list_to_json(initial);
  if (forcing) j["forcing"] = field_list_to_json(*forcing);
  j["depth"] = depth;
  j["budget"] = budget;
  j["allocation"] = allocation;
  if (allocation_file) j["allocation_file"] = *allocation_file;
  j["seed"] = seed;
  j["grid"] = json{{"points", grid_points}, {"times", grid_times}};
  j["mode"] = json{{"bilinear", bilinear_mode}, {"u0", u0_mode}, {"mc_u0_samples", mc_u0_samples}};
  j["threads"] = threads;
  if (b_norm) j["b_norm"] = *b_norm;
  return j.dump(2);
}

std::uint64_t RunConfig::config_hash() const { return fnv1a_hash(to_json_string()); }

RunConfig parse_config_string(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown_keys(j,
                      {"dimension", "t", "initial", "forcing", "depth", "budget", "allocation",
                       "allocation_file", "seed", "grid", "mode", "threads", "b_norm"},
                      "");

  RunConfig cfg;
  cfg.dimension = j.at("dimension").get<int>();
  if (cfg.dimension < 1) throw std::invalid_argument("config: dimension must be >= 1");
  cfg.t = j.at("t").get<double>();
  if (!(cfg.t > 0.0)) throw std::invalid_argument("config: t must be positive");
  cfg.initial = parse_field_list(j.at("initial"), "initial");
  if (j.contains("forcing")) cfg.forcing = parse_field_list(j.at("forcing"), "forcing");
  if (j.contains("depth")) cfg.depth = j.at("depth").get<int>();
  if (cfg.depth < 0) throw std::invalid_argument("config: depth must be >= 0");
  if (j.contains("budget")) cfg.budget = j.at("budget").get<long long>();
  if (cfg.budget < 1) throw std::invalid_argument("config: budget must be >= 1");
  if (j.contains("allocation")) cfg.allocation = j.at("allocation").get<std::string>();
  if (cfg.allocation != "exact" && cfg.allocation != "paper" && cfg.allocation != "uniform" &&
      cfg.allocation != "file")
    throw std::invalid_argument("config: allocation must be exact|paper|uniform|file");
  if (j.contains("allocation_file"))
    cfg.allocation_file = j.at("allocation_file").get<std::string>();
  if (cfg.allocation == "file" && !cfg.allocation_file)
    throw std::invalid_argument("config: allocation=file needs allocation_file");
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

  const json& grid = j.at("grid");
  reject_unknown_keys(grid, {"points", "times"}, "grid.");
  cfg.grid_points = grid.at("points").get<std::vector<std::vector<double>>>();
  cfg.grid_times = grid.at("times").get<std::vector<double>>();
  for (const auto& x : cfg.grid_points)
    if (static_cast<int>(x.size()) != cfg.dimension)
      throw std::invalid_argument("config: grid point dimension mismatch");
  for (double tt : cfg.grid_times)
    if (!(tt > 0.0)) throw std::invalid_argument("config: grid times must be positive");

  if (j.contains("mode")) {
    const json& mode = j.at("mode");
    reject_unknown_keys(mode, {"bilinear", "u0", "mc_u0_samples"}, "mode.");
    if (mode.contains("bilinear")) cfg.bilinear_mode = mode.at("bilinear").get<std::string>();
    if (cfg.bilinear_mode != "convective_only" && cfg.bilinear_mode != "full")
      throw std::invalid_argument("config: mode.bilinear must be convective_only|full");
    if (mode.contains("u0")) cfg.u0_mode = mode.at("u0").get<std::string>();
    if (cfg.u0_mode != "exact" && cfg.u0_mode != "mc")
      throw std::invalid_argument("config: mode.u0 must be exact|mc");
    if (mode.contains("mc_u0_samples"))
      cfg.mc_u0_samples = mode.at("mc_u0_samples").get<long long>();
    if (cfg.mc_u0_samples < 1)
      throw std::invalid_argument("config: mode.mc_u0_samples must be >= 1");
  }
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (cfg.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (j.contains("b_norm")) {
    cfg.b_norm = j.at("b_norm").get<double>();
    if (!(*cfg.b_norm >= 0.0)) throw std::invalid_argument("config: b_norm must be >= 0");
  }

  // field parameter validation happens on construction
  (void)cfg.initial_fields();
  (void)cfg.forcing_fields();
  (void)cfg.make_grid();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return parse_config_string(text);
}

}  // namespace nsmc
