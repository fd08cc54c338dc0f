#include "nsmc/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nsmc/allocation.hpp"
#include "nsmc/combinatorics.hpp"
#include "nsmc/config.hpp"
#include "nsmc/convolution.hpp"
#include "nsmc/error_ci.hpp"
#include "nsmc/heat.hpp"
#include "nsmc/io.hpp"
#include "nsmc/iteration.hpp"
#include "nsmc/quadrature.hpp"
#include "nsmc/riesz.hpp"
#include "nsmc/simplex.hpp"
#include "nsmc/special.hpp"

namespace nsmc {

using nlohmann::json;

namespace {

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_number_list(text)) out.push_back(static_cast<int>(v));
  return out;
}

void emit_json(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(resolve_output_path(out_path), text);
}

// --- dist ------------------------------------------------------------------

struct DistOptions {
  std::string law = "gauss";
  int m = 1;
  int d = 1;
  long long count = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_dist_sample(const DistOptions& opt) {
  const RandomStream root(opt.seed);
  std::vector<std::string> header{"draw"};
  std::vector<std::vector<std::string>> rows;

  if (opt.law == "gauss") {
    for (int j = 1; j <= opt.m; ++j)
      for (int c = 1; c <= opt.d; ++c)
        header.push_back("z_" + std::to_string(j) + "_" + std::to_string(c));
    for (long long i = 0; i < opt.count; ++i) {
      RandomStream sub = root.child(static_cast<std::uint64_t>(i));
      const GaussianBlock block = gaussian_block_sample(opt.m, opt.d, sub);
      std::vector<std::string> row{std::to_string(i)};
      for (double v : block.z) row.push_back(format_double(v));
      rows.push_back(std::move(row));
    }
  } else if (opt.law == "usimplex" || opt.law == "pb") {
    for (int j = 1; j <= opt.m; ++j) header.push_back("tau_" + std::to_string(j));
    for (long long i = 0; i < opt.count; ++i) {
      RandomStream sub = root.child(static_cast<std::uint64_t>(i));
      const SimplexPoint point =
          opt.law == "pb" ? pb_half_sample(opt.m, sub) : uniform_simplex_sample(opt.m, sub);
      std::vector<std::string> row{std::to_string(i)};
      for (double v : point.coords) row.push_back(format_double(v));
      rows.push_back(std::move(row));
    }
  } else {
    throw CLI::ValidationError("--law must be gauss|usimplex|pb");
  }

  Provenance prov;
  prov.seed = opt.seed;
  prov.config_hash = fnv1a_hash(opt.law + "," + std::to_string(opt.m) + "," +
                                std::to_string(opt.d) + "," + std::to_string(opt.count));
  write_csv(resolve_output_path(opt.out), prov, header, rows);
  return 0;
}

// --- comb ------------------------------------------------------------------

int cmd_comb_dn(int n, int d, bool as_json, const std::string& out) {
  const BigInt value = d_sequence(n, d);
  if (as_json) {
    emit_json(json{{"n", n}, {"d", d}, {"value", value.str()}}, out);
  } else {
    std::cout << "D(" << n << ") = " << value.str() << "\n";
  }
  return 0;
}

int cmd_comb_poly(int n, bool as_json, const std::string& out) {
  const IntPolynomial& p = picard_poly(n);
  if (as_json) {
    json coeffs = json::object();
    for (const auto& [deg, c] : p.coeffs()) coeffs[std::to_string(deg)] = c.str();
    emit_json(json{{"n", n}, {"degree", p.degree()}, {"coeffs", coeffs}}, out);
  } else {
    std::cout << "P_" << n << "(z) =";
    bool first = true;
    for (const auto& [deg, c] : p.coeffs()) {
      std::cout << (first ? " " : " + ");
      if (c != 1) std::cout << c.str() << " ";
      std::cout << "z^" << deg;
      first = false;
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_comb_coeff(int m, int n, bool as_json, const std::string& out) {
  const BigInt value = coeff_A(m, n);
  if (as_json)
    emit_json(json{{"m", m}, {"n", n}, {"value", value.str()}}, out);
  else
    std::cout << "A(" << m << "," << n << ") = " << value.str() << "\n";
  return 0;
}

// --- heat ------------------------------------------------------------------

int cmd_heat_solve(const std::string& config_path, const std::string& out,
                   const std::string& summary) {
  const RunConfig cfg = parse_config(config_path);
  const SpaceTimeGrid grid = cfg.make_grid();
  const TestField a = cfg.initial_fields()[0];
  std::optional<TestField> f;
  if (cfg.forcing) f = cfg.forcing_fields()->at(0);

  const RandomStream root(cfg.seed);
  std::vector<std::string> header;
  for (int c = 1; c <= cfg.dimension; ++c) header.push_back("x_" + std::to_string(c));
  header.insert(header.end(), {"t", "estimate", "stderr", "exact"});

  std::vector<std::vector<std::string>> rows;
  double norm_error = 0.0;
  bool have_exact = a.has_exact_heat() && !f;
  for (std::size_t ip = 0; ip < grid.points.size(); ++ip) {
    const SpaceTimePoint& pt = grid.points[ip];
    EstimateWithError est = semigroup_mc(a, pt.x, pt.t, cfg.budget,
                                         root.child(ip).child(0), cfg.threads);
    if (f) {
      const EstimateWithError forced =
          forced_mc(*f, pt.x, pt.t, cfg.budget, root.child(ip).child(1), cfg.threads);
      est.value += forced.value;
      est.stderr_ = std::sqrt(est.stderr_ * est.stderr_ + forced.stderr_ * forced.stderr_);
    }
    std::vector<std::string> row;
    for (double c : pt.x) row.push_back(format_double(c));
    row.push_back(format_double(pt.t));
    row.push_back(format_double(est.value));
    row.push_back(format_double(est.stderr_));
    if (have_exact) {
      const double exact = heat_exact(a, pt.x, pt.t);
      row.push_back(format_double(exact));
      norm_error = std::max(norm_error, std::fabs(est.value - exact));
    } else {
      row.push_back("");
    }
    rows.push_back(std::move(row));
  }

  Provenance prov;
  prov.seed = cfg.seed;
  prov.config_hash = cfg.config_hash();
  write_csv(resolve_output_path(out), prov, header, rows);

  if (!summary.empty()) {
    json s;
    s["provenance"] = {{"config_hash", prov.config_hash}, {"seed", prov.seed},
                       {"version", prov.version}};
    s["n_samples"] = cfg.budget;
    s["points"] = grid.points.size();
    if (have_exact) s["norm_error"] = norm_error;
    emit_json(s, summary);
  }
  return 0;
}

// --- term ------------------------------------------------------------------

struct TermOptions {
  int m1 = 0;
  int m2 = 0;
  std::string deriv;
  std::string order;
  std::string field = "constant";
  std::string params = "1";
  std::string x = "0";
  double t = 1.0;
  long long n = 10000;
  std::uint64_t seed = 0;
  bool oracle = false;
  std::string out;
};

int cmd_term_estimate(const TermOptions& opt) {
  const std::vector<double> x = parse_number_list(opt.x);
  const int d = static_cast<int>(x.size());
  TermKernelSpec spec;
  spec.m1 = opt.m1;
  spec.m2 = opt.m2;
  for (int idx : parse_index_list(opt.deriv)) spec.deriv_indices.push_back(idx - 1);
  for (char c : opt.order) {
    if (c == 'p') spec.order.push_back(StepKind::plain);
    else if (c == 'g') spec.order.push_back(StepKind::grad);
    else throw CLI::ValidationError("--order uses 'p' and 'g' only");
  }
  spec.validate(d);

  const TestField field(field_kind_from_name(opt.field), parse_number_list(opt.params), d);
  const PathIntegrand h = integrand_at_endpoint(field);
  const EstimateWithError est = estimate_K(h, spec, x, opt.t, opt.n, RandomStream(opt.seed), d);

  json j;
  j["provenance"] = {{"config_hash", fnv1a_hash(opt.field + "," + opt.params + "," + opt.x)},
                     {"seed", opt.seed}, {"version", kVersion}};
  j["value"] = est.value;
  j["stderr"] = est.stderr_;
  j["n"] = est.n_samples;
  if (const auto sup = field.sup_bound(opt.t)) {
    const VarianceBound bound = variance_bound(spec, opt.t, *sup, opt.n);
    j["bound_tight"] = bound.tight;
    j["bound_rough"] = bound.rough;
  }
  if (opt.oracle) {
    const OracleResult oracle = quadrature_oracle(h, spec, x, opt.t, d);
    j["oracle"] = oracle.value;
    j["oracle_error"] = oracle.error_estimate;
  }
  emit_json(j, opt.out);
  return 0;
}

// --- riesz -----------------------------------------------------------------

struct RieszOptions {
  int k = 1;
  std::string field = "gaussian_bump";
  std::string params = "1,1";
  std::string x = "0,0,0";
  double eps = 1e-3;
  double r = 0.0;  // 0 = derive from the field support
  long long n = 10000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_riesz_estimate(const RieszOptions& opt) {
  const std::vector<double> x = parse_number_list(opt.x);
  const int d = static_cast<int>(x.size());
  const TestField field(field_kind_from_name(opt.field), parse_number_list(opt.params), d);
  double R = opt.r;
  if (R <= 0.0) {
    const auto support = field.support_radius();
    if (!support)
      throw CLI::ValidationError("--r is required for fields without spatial decay");
    R = 10.0 * *support;
  }
  const PointFn f = [&field](std::span<const double> y) { return field.value(y, 0.0); };
  const EstimateWithError est =
      riesz_truncated_mc(f, opt.k - 1, x, opt.eps, R, opt.n, RandomStream(opt.seed), d);
  emit_json(json{{"provenance",
                  {{"config_hash", fnv1a_hash(opt.field + "," + opt.params + "," + opt.x)},
                   {"seed", opt.seed}, {"version", kVersion}}},
                 {"value", est.value}, {"stderr", est.stderr_}, {"n", est.n_samples},
                 {"eps", opt.eps}, {"r", R}},
            opt.out);
  return 0;
}

// --- allocate ---------------------------------------------------------------

Allocation allocation_by_method(const std::string& method, const ObjectiveParams& params) {
  if (method == "exact") return allocate_exact(params);
  if (method == "paper") return allocate_paper(params);
  if (method == "uniform") return allocate_uniform(params);
  throw CLI::ValidationError("--method must be exact|paper|uniform");
}

int cmd_allocate(long long budget, int n, int d, double b, double with_t,
                 const std::string& method, bool as_json, const std::string& out) {
  ObjectiveParams params;
  params.n = n;
  params.d = d;
  params.B = b;
  params.N_budget = budget;
  if (with_t > 0.0) {
    params.t = with_t;
    params.with_t_weights = true;
  }
  const Allocation alloc = allocation_by_method(method, params);
  const double z = objective_Z(alloc, params);
  const long long spend = budget_total(alloc, n, d);

  if (as_json) {
    json groups = json::array();
    for (std::size_t k = 1; k <= alloc.counts.size(); ++k) {
      groups.push_back(json{{"k", k},
                            {"A", coeff_A(static_cast<int>(k), n).str()},
                            {"N", alloc.counts[k - 1]},
                            {"spend", coeff_A(static_cast<int>(k), n).convert_to<long long>() *
                                          alloc.counts[k - 1] * d * (static_cast<long long>(k) + 1)}});
    }
    emit_json(json{{"method", method}, {"budget", budget}, {"spend", spend}, {"Z", z},
                   {"groups", groups}},
              out);
  } else {
    std::cout << "k\tA(k,n)\tN(k)\tspend\tZ_k\n";
    for (std::size_t k = 1; k <= alloc.counts.size(); ++k) {
      const double A = static_cast<double>(coeff_A(static_cast<int>(k), n));
      const double W = unit_ball_volume(static_cast<int>(k));
      const double zk = W * W * A * std::pow(b, 2.0 * static_cast<double>(k)) /
                        static_cast<double>(alloc.counts[k - 1]);
      std::cout << k << "\t" << coeff_A(static_cast<int>(k), n).str() << "\t"
                << alloc.counts[k - 1] << "\t"
                << coeff_A(static_cast<int>(k), n).convert_to<long long>() *
                       alloc.counts[k - 1] * d * (static_cast<long long>(k) + 1)
                << "\t" << format_double(zk) << "\n";
    }
    std::cout << "total spend " << spend << " of " << budget << ", Z = " << format_double(z)
              << "\n";
  }
  return 0;
}

// --- iterate -----------------------------------------------------------------

int cmd_iterate(const std::string& config_path, int n_override, const std::string& alloc_override,
                const std::string& out, const std::string& summary) {
  RunConfig cfg = parse_config(config_path);
  if (n_override > 0) cfg.depth = n_override;
  if (!alloc_override.empty()) cfg.allocation = alloc_override;
  if (cfg.depth < 1) throw CLI::ValidationError("iterate needs depth >= 1");

  const std::vector<TestField> a = cfg.initial_fields();
  const std::optional<std::vector<TestField>> f = cfg.forcing_fields();
  const SpaceTimeGrid grid = cfg.make_grid();
  const int d = cfg.dimension;

  // the allocation's B value: configured, or the weighted grid sup of the
  // closed-form linear part
  double B = 0.0;
  if (cfg.b_norm) {
    B = *cfg.b_norm;
  } else {
    const ExactU0 u0(a, f);
    const RandomStream dummy(0);
    std::vector<std::vector<double>> values(grid.points.size());
    std::vector<std::vector<std::vector<double>>> grads(grid.points.size());
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      values[p].resize(static_cast<std::size_t>(d));
      grads[p].assign(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(d)));
      for (int i = 0; i < d; ++i) {
        values[p][static_cast<std::size_t>(i)] = u0.value(grid.points[p].x, grid.points[p].t, i, dummy);
        for (int j = 0; j < d; ++j)
          grads[p][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              u0.gradient(grid.points[p].x, grid.points[p].t, i, j, dummy);
      }
    }
    B = triple_norm_estimate(grid, values, grads);
  }

  ObjectiveParams params;
  params.n = cfg.depth;
  params.d = d;
  params.B = B;
  params.N_budget = cfg.budget;

  Allocation alloc;
  if (cfg.allocation == "file") {
    const json aj = json::parse(read_text_file(*cfg.allocation_file));
    alloc.n = cfg.depth;
    alloc.counts = aj.at("counts").get<std::vector<long long>>();
  } else {
    alloc = allocation_by_method(cfg.allocation, params);
  }

  IterateOptions opts;
  opts.n = cfg.depth;
  opts.seed = cfg.seed;
  opts.exact_u0 = cfg.u0_mode == "exact";
  opts.mc_u0_samples = cfg.mc_u0_samples;
  opts.threads = cfg.threads;
  const SolutionEstimate sol = iterate_solution(a, f, grid, alloc, opts);

  std::vector<std::string> header;
  for (int c = 1; c <= d; ++c) header.push_back("x_" + std::to_string(c));
  header.insert(header.end(), {"t", "component", "value", "stderr"});
  std::vector<std::vector<std::string>> rows;
  for (std::size_t p = 0; p < grid.points.size(); ++p) {
    for (int i = 0; i < d; ++i) {
      std::vector<std::string> row;
      for (double c : grid.points[p].x) row.push_back(format_double(c));
      row.push_back(format_double(grid.points[p].t));
      row.push_back(std::to_string(i + 1));
      row.push_back(format_double(sol.values[p][static_cast<std::size_t>(i)].value));
      row.push_back(format_double(sol.values[p][static_cast<std::size_t>(i)].stderr_));
      rows.push_back(std::move(row));
    }
  }
  Provenance prov;
  prov.seed = cfg.seed;
  prov.config_hash = cfg.config_hash();
  write_csv(resolve_output_path(out), prov, header, rows);

  if (!summary.empty()) {
    double t_max = 0.0;
    for (const auto& pt : grid.points) t_max = std::max(t_max, pt.t);
    json counts = json::object();
    const ExpansionPlan plan = expand_terms(cfg.depth, d, opts.scalar_cap);
    for (const auto& [deg, cnt] : plan.counts) counts[std::to_string(deg)] = cnt.str();
    json s;
    s["provenance"] = {{"config_hash", prov.config_hash}, {"seed", prov.seed},
                       {"version", prov.version}};
    s["budget_used"] = sol.budget_used;
    s["variance_bound"] = variance_aggregate(alloc, t_max, B, cfg.depth, d);
    s["b_norm"] = B;
    s["term_counts"] = counts;
    s["scalar_summands"] = plan.scalar_summands.str();
    json alloc_json = json::array();
    for (long long c : alloc.counts) alloc_json.push_back(c);
    s["allocation"] = alloc_json;
    emit_json(s, summary);
  }
  return 0;
}

// --- report ------------------------------------------------------------------

int cmd_report_ci(const std::string& runs_dir, double delta, const std::string& out) {
  std::vector<double> norms;
  long long n_samples = -1;
  for (const auto& entry : std::filesystem::directory_iterator(runs_dir)) {
    if (entry.path().extension() != ".json") continue;
    const json j = json::parse(read_text_file(entry.path().string()));
    if (!j.contains("norm_error")) continue;
    const long long n = j.at("n_samples").get<long long>();
    if (n_samples < 0) n_samples = n;
    if (n != n_samples)
      throw std::invalid_argument("report ci: replicate runs disagree on n_samples");
    norms.push_back(std::sqrt(static_cast<double>(n)) * j.at("norm_error").get<double>());
  }
  if (norms.empty()) throw std::invalid_argument("report ci: no usable run files in " + runs_dir);
  const ConfidenceReport report = ci_for_run(norms, n_samples, delta);
  emit_json(json{{"delta", report.delta},
                 {"v_delta", report.v_delta},
                 {"radius", report.radius},
                 {"n_samples", report.n_samples},
                 {"replicates", norms.size()},
                 {"model", {{"C", report.model.C}, {"kappa", report.model.kappa},
                            {"sigma", report.model.sigma}}},
                 {"quantile_clamped", report.quantile_clamped}},
            out);
  return 0;
}

int cmd_report_optimal_n(double q, long long budget, double c, int d, int n_max,
                         const std::string& out) {
  const int n_star = optimal_n(q, budget, c, d, n_max);
  json deltas = json::array();
  for (int n = 1; n <= n_max; ++n) {
    json row;
    row["n"] = n;
    row["D"] = d_sequence(n, d).str();
    const BigInt dn = d_sequence(n, d);
    row["feasible"] = dn * dn <= budget;
    if (dn * dn <= budget) row["delta"] = combined_error(q, n, budget, c, d);
    deltas.push_back(row);
  }
  emit_json(json{{"n_star", n_star}, {"q", q}, {"budget", budget}, {"C", c}, {"d", d},
                 {"table", deltas}},
            out);
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Monte-Carlo engine for iterated heat-kernel convolutions"};
  app.require_subcommand(1);

  // dist
  auto* dist = app.add_subcommand("dist", "sampling laws");
  dist->require_subcommand(1);
  DistOptions dist_opt;
  auto* dist_sample = dist->add_subcommand("sample", "draw from a law into CSV");
  dist_sample->add_option("--law", dist_opt.law, "gauss|usimplex|pb");
  dist_sample->add_option("--m", dist_opt.m, "steps / simplex dimension");
  dist_sample->add_option("--d", dist_opt.d, "spatial dimension (gauss)");
  dist_sample->add_option("--count", dist_opt.count, "number of draws");
  dist_sample->add_option("--seed", dist_opt.seed, "root seed");
  dist_sample->add_option("--out", dist_opt.out, "output CSV")->required();

  // comb
  auto* comb = app.add_subcommand("comb", "exact integer bookkeeping");
  comb->require_subcommand(1);
  int comb_n = 1, comb_d = 3, comb_m = 1;
  bool comb_json = false;
  std::string comb_out;
  auto* comb_dn = comb->add_subcommand("dn", "summand-count sequence value");
  comb_dn->add_option("--n", comb_n)->required();
  comb_dn->add_option("--d", comb_d);
  comb_dn->add_flag("--json", comb_json);
  comb_dn->add_option("--out", comb_out);
  auto* comb_poly = comb->add_subcommand("poly", "iteration polynomial");
  comb_poly->add_option("--n", comb_n)->required();
  comb_poly->add_flag("--json", comb_json);
  comb_poly->add_option("--out", comb_out);
  auto* comb_coeff = comb->add_subcommand("coeff", "coefficient A(m,n)");
  comb_coeff->add_option("--m", comb_m)->required();
  comb_coeff->add_option("--n", comb_n)->required();
  comb_coeff->add_flag("--json", comb_json);
  comb_coeff->add_option("--out", comb_out);

  // heat
  auto* heat = app.add_subcommand("heat", "linear heat benchmarks");
  heat->require_subcommand(1);
  std::string heat_config, heat_out, heat_summary;
  auto* heat_solve = heat->add_subcommand("solve", "estimate the linear part on a grid");
  heat_solve->add_option("--config", heat_config)->required();
  heat_solve->add_option("--out", heat_out)->required();
  heat_solve->add_option("--summary", heat_summary);

  // term
  auto* term = app.add_subcommand("term", "iterated convolution estimators");
  term->require_subcommand(1);
  TermOptions term_opt;
  auto* term_est = term->add_subcommand("estimate", "estimate one kernel shape");
  term_est->add_option("--m1", term_opt.m1);
  term_est->add_option("--m2", term_opt.m2);
  term_est->add_option("--deriv", term_opt.deriv, "1-based gradient coordinates, comma separated");
  term_est->add_option("--order", term_opt.order, "step order string of p/g, outermost first");
  term_est->add_option("--field", term_opt.field);
  term_est->add_option("--params", term_opt.params);
  term_est->add_option("--x", term_opt.x)->required();
  term_est->add_option("--t", term_opt.t);
  term_est->add_option("--n", term_opt.n);
  term_est->add_option("--seed", term_opt.seed);
  term_est->add_flag("--oracle", term_opt.oracle, "attach the tensor quadrature value");
  term_est->add_option("--out", term_opt.out);

  // riesz
  auto* riesz = app.add_subcommand("riesz", "truncated singular transform");
  riesz->require_subcommand(1);
  RieszOptions riesz_opt;
  auto* riesz_est = riesz->add_subcommand("estimate", "estimate one component");
  riesz_est->add_option("--k", riesz_opt.k, "1-based component")->required();
  riesz_est->add_option("--field", riesz_opt.field);
  riesz_est->add_option("--params", riesz_opt.params);
  riesz_est->add_option("--x", riesz_opt.x)->required();
  riesz_est->add_option("--eps", riesz_opt.eps);
  riesz_est->add_option("--r", riesz_opt.r);
  riesz_est->add_option("--n", riesz_opt.n);
  riesz_est->add_option("--seed", riesz_opt.seed);
  riesz_est->add_option("--out", riesz_opt.out);

  // iterate
  std::string it_config, it_out, it_summary, it_alloc;
  int it_n = 0;
  auto* iterate = app.add_subcommand("iterate", "assemble the n-th iterate on a grid");
  iterate->add_option("--config", it_config)->required();
  iterate->add_option("--n", it_n, "override the configured depth");
  iterate->add_option("--alloc", it_alloc, "exact|paper|uniform|file");
  iterate->add_option("--out", it_out)->required();
  iterate->add_option("--summary", it_summary);

  // allocate
  long long al_budget = 0;
  int al_n = 1, al_d = 3;
  double al_b = 1.0, al_t = 0.0;
  std::string al_method = "exact", al_out;
  bool al_json = false;
  auto* allocate = app.add_subcommand("allocate", "distribute a variate budget");
  allocate->add_option("--budget", al_budget)->required();
  allocate->add_option("--n", al_n)->required();
  allocate->add_option("--d", al_d)->required();
  allocate->add_option("--b", al_b)->required();
  allocate->add_option("--with-t", al_t, "include time weights at this horizon");
  allocate->add_option("--method", al_method);
  allocate->add_flag("--json", al_json);
  allocate->add_option("--out", al_out);

  // report
  auto* report = app.add_subcommand("report", "confidence reporting");
  report->require_subcommand(1);
  std::string rep_runs, rep_out;
  double rep_delta = 0.05, rep_q = 0.5, rep_c = 1.0;
  long long rep_budget = 0;
  int rep_d = 3, rep_nmax = 8;
  auto* rep_ci = report->add_subcommand("ci", "confidence radius from replicate runs");
  rep_ci->add_option("--runs", rep_runs)->required();
  rep_ci->add_option("--delta", rep_delta);
  rep_ci->add_option("--out", rep_out);
  auto* rep_opt = report->add_subcommand("optimal-n", "depth minimizing the combined error");
  rep_opt->add_option("--q", rep_q)->required();
  rep_opt->add_option("--budget", rep_budget)->required();
  rep_opt->add_option("--c", rep_c);
  rep_opt->add_option("--d", rep_d);
  rep_opt->add_option("--n-max", rep_nmax);
  rep_opt->add_option("--out", rep_out);

  std::vector<const char*> argv;
  argv.push_back("nsmc");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (dist_sample->parsed()) return cmd_dist_sample(dist_opt);
    if (comb_dn->parsed()) return cmd_comb_dn(comb_n, comb_d, comb_json, comb_out);
    if (comb_poly->parsed()) return cmd_comb_poly(comb_n, comb_json, comb_out);
    if (comb_coeff->parsed()) return cmd_comb_coeff(comb_m, comb_n, comb_json, comb_out);
    if (heat_solve->parsed()) return cmd_heat_solve(heat_config, heat_out, heat_summary);
    if (term_est->parsed()) return cmd_term_estimate(term_opt);
    if (riesz_est->parsed()) return cmd_riesz_estimate(riesz_opt);
    if (iterate->parsed()) return cmd_iterate(it_config, it_n, it_alloc, it_out, it_summary);
    if (allocate->parsed())
      return cmd_allocate(al_budget, al_n, al_d, al_b, al_t, al_method, al_json, al_out);
    if (rep_ci->parsed()) return cmd_report_ci(rep_runs, rep_delta, rep_out);
    if (rep_opt->parsed())
      return cmd_report_optimal_n(rep_q, rep_budget, rep_c, rep_d, rep_nmax, rep_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nsmc
