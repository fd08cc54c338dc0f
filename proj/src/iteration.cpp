#include "nsmc/iteration.hpp"

#include <cmath>
#include <stdexcept>

#include "nsmc/heat.hpp"
#include "nsmc/parallel.hpp"
#include "nsmc/special.hpp"

namespace nsmc {

namespace {

TermPtr make_leaf_u0() {
  static const TermPtr leaf = std::make_shared<TermTree>(TermTree{TermTree::Kind::leaf_u0, nullptr, nullptr});
  return leaf;
}

TermPtr make_leaf_du0() {
  static const TermPtr leaf = std::make_shared<TermTree>(TermTree{TermTree::Kind::leaf_du0, nullptr, nullptr});
  return leaf;
}

TermPtr mirror_to_derivative(const TermPtr& value_term) {
  if (value_term->kind == TermTree::Kind::leaf_u0) return make_leaf_du0();
  if (value_term->kind == TermTree::Kind::conv_plain)
    return std::make_shared<TermTree>(TermTree{TermTree::Kind::conv_grad, value_term->left, nullptr});
  throw std::logic_error("mirror_to_derivative: unexpected term root");
}

int node_count(const TermTree& t) {
  switch (t.kind) {
    case TermTree::Kind::leaf_u0:
    case TermTree::Kind::leaf_du0:
      return 1;
    case TermTree::Kind::conv_plain:
    case TermTree::Kind::conv_grad:
      return 1 + node_count(*t.left);
    case TermTree::Kind::product:
      return 1 + node_count(*t.left) + node_count(*t.right);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

TermSignature term_signature(const TermTree& term) {
  TermSignature sig;
  switch (term.kind) {
    case TermTree::Kind::leaf_u0:
    case TermTree::Kind::leaf_du0:
      sig.degree = 1;
      return sig;
    case TermTree::Kind::conv_plain: {
      sig = term_signature(*term.left);
      sig.l1 += 1;
      return sig;
    }
    case TermTree::Kind::conv_grad: {
      sig = term_signature(*term.left);
      sig.l2 += 1;
      return sig;
    }
    case TermTree::Kind::product: {
      const TermSignature a = term_signature(*term.left);
      const TermSignature b = term_signature(*term.right);
      sig.l1 = a.l1 + b.l1;
      sig.l2 = a.l2 + b.l2;
      sig.degree = a.degree + b.degree;
      return sig;
    }
  }
  throw std::logic_error("unreachable");
}

std::string term_to_string(const TermTree& term) {
  switch (term.kind) {
    case TermTree::Kind::leaf_u0:
      return "u0";
    case TermTree::Kind::leaf_du0:
      return "du0";
    case TermTree::Kind::conv_plain:
      return "C(" + term_to_string(*term.left) + ")";
    case TermTree::Kind::conv_grad:
      return "G(" + term_to_string(*term.left) + ")";
    case TermTree::Kind::product:
      return "P(" + term_to_string(*term.left) + "," + term_to_string(*term.right) + ")";
  }
  throw std::logic_error("unreachable");
}

BigInt term_scalar_count(const TermTree& term, int d) {
  switch (term.kind) {
    case TermTree::Kind::leaf_u0:
    case TermTree::Kind::leaf_du0:
      return 1;
    case TermTree::Kind::conv_plain:
    case TermTree::Kind::conv_grad:
      return term_scalar_count(*term.left, d);
    case TermTree::Kind::product:
      return BigInt(d) * d * term_scalar_count(*term.left, d) * term_scalar_count(*term.right, d);
  }
  throw std::logic_error("unreachable");
}

std::vector<TermPtr> ExpansionPlan::group(int degree) const {
  std::vector<TermPtr> out;
  for (const auto& t : terms)
    if (term_signature(*t).degree == degree) out.push_back(t);
  return out;
}

ExpansionPlan expand_terms(int n, int d, const BigInt& scalar_cap) {
  if (n < 1) throw std::domain_error("expand_terms: n must be >= 1");
  if (d < 1) throw std::domain_error("expand_terms: d must be >= 1");

  const BigInt projected = d_sequence(n, d);
  if (projected > scalar_cap)
    throw std::runtime_error("expand_terms: projected scalar summand count " +
                             projected.str() + " exceeds the cap " + scalar_cap.str() +
                             "; raise the cap or lower n");

  std::vector<TermPtr> level{make_leaf_u0()};
  for (int step = 0; step < n; ++step) {
    std::vector<TermPtr> next{make_leaf_u0()};
    next.reserve(1 + level.size() * level.size());
    for (const TermPtr& a : level) {
      for (const TermPtr& b : level) {
        const TermPtr prod = std::make_shared<TermTree>(
            TermTree{TermTree::Kind::product, a, mirror_to_derivative(b)});
        next.push_back(std::make_shared<TermTree>(
            TermTree{TermTree::Kind::conv_plain, prod, nullptr}));
      }
    }
    level = std::move(next);
  }

  ExpansionPlan plan;
  plan.n = n;
  plan.d = d;
  plan.terms = std::move(level);
  for (const TermPtr& t : plan.terms) {
    plan.counts[term_signature(*t).degree] += 1;
    plan.scalar_summands += term_scalar_count(*t, d);
  }
  return plan;
}

// --- leaf sources ---------------------------------------------------------

namespace {

void check_fields(const std::vector<TestField>& a, const std::optional<std::vector<TestField>>& f) {
  if (a.empty()) throw std::invalid_argument("U0Source: no initial components");
  const int d = a[0].dimension();
  if (static_cast<int>(a.size()) != d)
    throw std::invalid_argument("U0Source: need one initial component per dimension");
  for (const auto& c : a)
    if (c.dimension() != d) throw std::invalid_argument("U0Source: mixed dimensions");
  if (f) {
    if (static_cast<int>(f->size()) != d)
      throw std::invalid_argument("U0Source: need one forcing component per dimension");
    for (const auto& c : *f)
      if (c.dimension() != d) throw std::invalid_argument("U0Source: mixed dimensions");
  }
}

// time integral of the heat evolution of the forcing, for kinds whose
// evolution is spatially invariant (constant / linear / product_time)
double forced_exact_value(const TestField& f, std::span<const double> x, double t) {
  switch (f.kind()) {
    case FieldKind::constant:
      return f.params()[0] * t;
    case FieldKind::linear:
      return f.value(x, 0.0) * t;
    case FieldKind::product_time: {
      const double k = f.params()[0];
      return f.value(x, 1.0) * std::pow(t, k + 1.0) / (k + 1.0);
    }
    default:
      throw std::invalid_argument("ExactU0: forcing kind " + field_kind_name(f.kind()) +
                                  " has no elementary time integral");
  }
}

double forced_exact_gradient(const TestField& f, std::span<const double> x, double t, int j) {
  switch (f.kind()) {
    case FieldKind::constant:
      return 0.0;
    case FieldKind::linear:
      return f.gradient(x, 0.0, j) * t;
    case FieldKind::product_time: {
      const double k = f.params()[0];
      return f.gradient(x, 1.0, j) * std::pow(t, k + 1.0) / (k + 1.0);
    }
    default:
      throw std::invalid_argument("ExactU0: forcing kind " + field_kind_name(f.kind()) +
                                  " has no elementary time integral");
  }
}

}  // namespace

ExactU0::ExactU0(std::vector<TestField> a, std::optional<std::vector<TestField>> f)
    : a_(std::move(a)), f_(std::move(f)), d_(static_cast<int>(a_.empty() ? 0 : a_[0].dimension())) {
  check_fields(a_, f_);
  for (const auto& c : a_)
    if (!c.has_exact_heat())
      throw std::invalid_argument("ExactU0: initial kind " + field_kind_name(c.kind()) +
                                  " has no closed-form evolution");
}

double ExactU0::value(std::span<const double> x, double t, int comp, const RandomStream&) const {
  double v = a_[static_cast<std::size_t>(comp)].exact_heat(x, t);
  if (f_) v += forced_exact_value((*f_)[static_cast<std::size_t>(comp)], x, t);
  return v;
}

double ExactU0::gradient(std::span<const double> x, double t, int comp, int j,
                         const RandomStream&) const {
  double v = a_[static_cast<std::size_t>(comp)].exact_heat_gradient(x, t, j);
  if (f_) v += forced_exact_gradient((*f_)[static_cast<std::size_t>(comp)], x, t, j);
  return v;
}

McU0::McU0(std::vector<TestField> a, std::optional<std::vector<TestField>> f, long long n0)
    : a_(std::move(a)), f_(std::move(f)), n0_(n0),
      d_(static_cast<int>(a_.empty() ? 0 : a_[0].dimension())) {
  check_fields(a_, f_);
  if (n0_ < 1) throw std::invalid_argument("McU0: sub-budget must be >= 1");
}

double McU0::value(std::span<const double> x, double t, int comp,
                   const RandomStream& leaf_stream) const {
  double total = 0.0;
  const double root_t = std::sqrt(t);
  for (long long i = 0; i < n0_; ++i) {
    RandomStream sub = leaf_stream.child(static_cast<std::uint64_t>(i));
    std::vector<double> y(x.begin(), x.end());
    for (int c = 0; c < d_; ++c) y[static_cast<std::size_t>(c)] += sub.normal() * root_t;
    total += a_[static_cast<std::size_t>(comp)].value(y, 0.0);
    if (f_) {
      const double tau = sub.u01();
      std::vector<double> yf(x.begin(), x.end());
      const double scale = root_t * std::sqrt(1.0 - tau);
      for (int c = 0; c < d_; ++c) yf[static_cast<std::size_t>(c)] += sub.normal() * scale;
      total += t * (*f_)[static_cast<std::size_t>(comp)].value(yf, t * tau);
    }
  }
  return total / static_cast<double>(n0_);
}

double McU0::gradient(std::span<const double> x, double t, int comp, int j,
                      const RandomStream& leaf_stream) const {
  double total = 0.0;
  const double root_t = std::sqrt(t);
  for (long long i = 0; i < n0_; ++i) {
    RandomStream sub = leaf_stream.child(static_cast<std::uint64_t>(i));
    std::vector<double> y(x.begin(), x.end());
    for (int c = 0; c < d_; ++c) y[static_cast<std::size_t>(c)] += sub.normal() * root_t;
    total += a_[static_cast<std::size_t>(comp)].gradient(y, 0.0, j);
    if (f_) {
      const double tau = sub.u01();
      std::vector<double> yf(x.begin(), x.end());
      const double scale = root_t * std::sqrt(1.0 - tau);
      for (int c = 0; c < d_; ++c) yf[static_cast<std::size_t>(c)] += sub.normal() * scale;
      total += t * (*f_)[static_cast<std::size_t>(comp)].gradient(yf, t * tau, j);
    }
  }
  return total / static_cast<double>(n0_);
}

// --- term evaluation -------------------------------------------------------

namespace {

struct EvalContext {
  const U0Source* u0 = nullptr;
  const RandomStream* sample = nullptr;
  int d = 0;
};

double eval_value(const TermTree& node, const EvalContext& ctx, std::span<const double> x,
                  double t, int comp, int base);

double eval_deriv(const TermTree& node, const EvalContext& ctx, std::span<const double> x,
                  double t, int comp, int deriv_j, int base) {
  switch (node.kind) {
    case TermTree::Kind::leaf_du0:
      return ctx.u0->gradient(x, t, comp, deriv_j, ctx.sample->child(static_cast<std::uint64_t>(base)));
    case TermTree::Kind::conv_grad: {
      RandomStream sub = ctx.sample->child(static_cast<std::uint64_t>(base));
      const double u = sub.u01();
      const double rho = 1.0 - (1.0 - u) * (1.0 - u);  // gap-singular single-step time
      const double s1 = t * rho;
      const double scale = std::sqrt(t - s1);
      std::vector<double> y(x.begin(), x.end());
      double z_deriv = 0.0;
      for (int c = 0; c < ctx.d; ++c) {
        const double z = sub.normal();
        if (c == deriv_j) z_deriv = z;
        y[static_cast<std::size_t>(c)] += z * scale;
      }
      return 2.0 * std::sqrt(t) * (-z_deriv) * eval_value(*node.left, ctx, y, s1, comp, base + 1);
    }
    default:
      throw std::logic_error("eval_deriv: value node in derivative position");
  }
}

double eval_value(const TermTree& node, const EvalContext& ctx, std::span<const double> x,
                  double t, int comp, int base) {
  switch (node.kind) {
    case TermTree::Kind::leaf_u0:
      return ctx.u0->value(x, t, comp, ctx.sample->child(static_cast<std::uint64_t>(base)));
    case TermTree::Kind::conv_plain: {
      RandomStream sub = ctx.sample->child(static_cast<std::uint64_t>(base));
      const double r = sub.u01();
      const double s1 = t * r;
      const double scale = std::sqrt(t - s1);
      std::vector<double> y(x.begin(), x.end());
      for (int c = 0; c < ctx.d; ++c) y[static_cast<std::size_t>(c)] += sub.normal() * scale;
      return t * eval_value(*node.left, ctx, y, s1, comp, base + 1);
    }
    case TermTree::Kind::product: {
      const int left_nodes = node_count(*node.left);
      double sum = 0.0;
      for (int j = 0; j < ctx.d; ++j)
        sum += eval_value(*node.left, ctx, x, t, j, base + 1) *
               eval_deriv(*node.right, ctx, x, t, comp, j, base + 1 + left_nodes);
      return sum;
    }
    default:
      throw std::logic_error("eval_value: derivative node in value position");
  }
}

}  // namespace

EstimateWithError evaluate_term_mc(const TermTree& term, const U0Source& u0,
                                   std::span<const double> x, double t, int component,
                                   long long n_samples, const RandomStream& stream) {
  if (n_samples < 1) throw std::domain_error("evaluate_term_mc: need at least one sample");
  if (!(t > 0.0)) throw std::domain_error("evaluate_term_mc: t must be positive");
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const RandomStream sample = stream.child(i);
    EvalContext ctx{&u0, &sample, u0.dimension()};
    values[i] = eval_value(term, ctx, x, t, component, 0);
    if (!std::isfinite(values[i]))
      throw std::runtime_error("evaluate_term_mc: non-finite sample " + std::to_string(i));
  }
  return finalize_samples(values);
}

TermValueAndGrads evaluate_term_with_grads(const TermTree& term, const U0Source& u0,
                                           std::span<const double> x, double t, int component,
                                           long long n_samples, const RandomStream& stream) {
  if (n_samples < 1) throw std::domain_error("evaluate_term_with_grads: need a sample");
  const int d = u0.dimension();
  std::vector<double> value_samples(static_cast<std::size_t>(n_samples));
  std::vector<std::vector<double>> grad_samples(
      static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(n_samples)));

  for (std::size_t i = 0; i < value_samples.size(); ++i) {
    const RandomStream sample = stream.child(i);
    EvalContext ctx{&u0, &sample, d};
    value_samples[i] = eval_value(term, ctx, x, t, component, 0);

    if (term.kind == TermTree::Kind::leaf_u0) {
      for (int j = 0; j < d; ++j)
        grad_samples[static_cast<std::size_t>(j)][i] =
            u0.gradient(x, t, component, j, sample.child(0));
    } else if (term.kind == TermTree::Kind::conv_plain) {
      // derivative mirror of the root step on the same variates: the
      // time uniform is remapped through the gap-singular law and the
      // shared increment supplies the kernel factor per coordinate
      RandomStream sub = sample.child(0);
      const double u = sub.u01();
      const double rho = 1.0 - (1.0 - u) * (1.0 - u);
      const double s1 = t * rho;
      const double scale = std::sqrt(t - s1);
      std::vector<double> y(x.begin(), x.end());
      std::vector<double> z(static_cast<std::size_t>(d));
      for (int c = 0; c < d; ++c) {
        z[static_cast<std::size_t>(c)] = sub.normal();
        y[static_cast<std::size_t>(c)] += z[static_cast<std::size_t>(c)] * scale;
      }
      const double inner = eval_value(*term.left, ctx, y, s1, component, 1);
      for (int j = 0; j < d; ++j)
        grad_samples[static_cast<std::size_t>(j)][i] =
            2.0 * std::sqrt(t) * (-z[static_cast<std::size_t>(j)]) * inner;
    } else {
      throw std::logic_error("evaluate_term_with_grads: unexpected term root");
    }
  }

  TermValueAndGrads out;
  out.value = finalize_samples(value_samples);
  out.grads.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j)
    out.grads.push_back(finalize_samples(grad_samples[static_cast<std::size_t>(j)]));
  return out;
}

// --- solution assembly -----------------------------------------------------

namespace {

EstimateWithError sum_estimates(const EstimateWithError& a, const EstimateWithError& b) {
  EstimateWithError out;
  out.value = a.value + b.value;
  out.n_samples = a.n_samples + b.n_samples;
  out.stderr_ = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
  return out;
}

}  // namespace

SolutionEstimate iterate_solution(const std::vector<TestField>& a,
                                  const std::optional<std::vector<TestField>>& f,
                                  const SpaceTimeGrid& grid, const Allocation& alloc,
                                  const IterateOptions& opts) {
  grid.validate();
  alloc.validate();
  if (alloc.n != opts.n) throw std::invalid_argument("iterate_solution: allocation depth mismatch");
  const int d = a.empty() ? 0 : a[0].dimension();
  const ExpansionPlan plan = expand_terms(opts.n, d, opts.scalar_cap);

  std::unique_ptr<U0Source> u0;
  if (opts.exact_u0)
    u0 = std::make_unique<ExactU0>(a, f);
  else
    u0 = std::make_unique<McU0>(a, f, opts.mc_u0_samples);

  const RandomStream root(opts.seed);
  const std::size_t n_points = grid.points.size();

  SolutionEstimate sol;
  sol.grid = grid;
  sol.values.assign(n_points, std::vector<EstimateWithError>(static_cast<std::size_t>(d)));
  sol.grads.assign(n_points,
                   std::vector<std::vector<EstimateWithError>>(
                       static_cast<std::size_t>(d),
                       std::vector<EstimateWithError>(static_cast<std::size_t>(d))));
  sol.budget_used = budget_total(alloc, opts.n, d);

  parallel_for(n_points, opts.threads, [&](std::size_t ip) {
    const SpaceTimePoint& pt = grid.points[ip];
    for (std::size_t ti = 0; ti < plan.terms.size(); ++ti) {
      const TermTree& term = *plan.terms[ti];
      const int degree = term_signature(term).degree;
      const long long n_k = alloc.at(degree);
      const RandomStream term_stream = root.child(ti).child(ip);

      for (int i = 0; i < d; ++i) {
        if (term.kind == TermTree::Kind::leaf_u0 && u0->is_exact()) {
          EstimateWithError v;
          v.value = u0->value(pt.x, pt.t, i, term_stream);
          v.n_samples = 1;
          v.stderr_ = 0.0;
          sol.values[ip][static_cast<std::size_t>(i)] =
              sum_estimates(sol.values[ip][static_cast<std::size_t>(i)], v);
          for (int j = 0; j < d; ++j) {
            EstimateWithError g;
            g.value = u0->gradient(pt.x, pt.t, i, j, term_stream);
            g.n_samples = 1;
            g.stderr_ = 0.0;
            auto& cell = sol.grads[ip][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            cell = sum_estimates(cell, g);
          }
          continue;
        }
        const TermValueAndGrads ev =
            evaluate_term_with_grads(term, *u0, pt.x, pt.t, i, n_k, term_stream);
        sol.values[ip][static_cast<std::size_t>(i)] =
            sum_estimates(sol.values[ip][static_cast<std::size_t>(i)], ev.value);
        for (int j = 0; j < d; ++j) {
          auto& cell = sol.grads[ip][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          cell = sum_estimates(cell, ev.grads[static_cast<std::size_t>(j)]);
        }
      }
    }
  });
  return sol;
}

// --- nested baseline ---------------------------------------------------------

namespace {

struct NestedLevel {
  std::vector<double> u;                // d components
  std::vector<std::vector<double>> du;  // du[i][j]
};

// Linear part by plain sample means; the a-part and f-part each use one
// substream per sample in the same layout as semigroup_mc / forced_mc, so
// the zero-level scheme reduces to those estimators exactly.
struct NestedU0Samples {
  // [comp][sample] and [comp][j][sample]
  std::vector<std::vector<double>> u;
  std::vector<std::vector<std::vector<double>>> du;
};

NestedU0Samples nested_u0_samples(const std::vector<TestField>& a,
                                  const std::optional<std::vector<TestField>>& f,
                                  std::span<const double> x, double t, long long n0,
                                  const RandomStream& stream) {
  const int d = static_cast<int>(a.size());
  NestedU0Samples out;
  out.u.assign(static_cast<std::size_t>(d),
               std::vector<double>(static_cast<std::size_t>(n0), 0.0));
  out.du.assign(static_cast<std::size_t>(d),
                std::vector<std::vector<double>>(
                    static_cast<std::size_t>(d),
                    std::vector<double>(static_cast<std::size_t>(n0), 0.0)));
  const double root_t = std::sqrt(t);
  const RandomStream a_stream = stream.child(0);
  const RandomStream f_stream = stream.child(1);
  for (long long s = 0; s < n0; ++s) {
    const auto si = static_cast<std::size_t>(s);
    {
      RandomStream sub = a_stream.child(static_cast<std::uint64_t>(s));
      std::vector<double> y(x.begin(), x.end());
      for (int c = 0; c < d; ++c) y[static_cast<std::size_t>(c)] += sub.normal() * root_t;
      for (int i = 0; i < d; ++i) {
        out.u[static_cast<std::size_t>(i)][si] = a[static_cast<std::size_t>(i)].value(y, 0.0);
        for (int j = 0; j < d; ++j)
          out.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][si] =
              a[static_cast<std::size_t>(i)].gradient(y, 0.0, j);
      }
    }
    if (f) {
      RandomStream sub = f_stream.child(static_cast<std::uint64_t>(s));
      const double tau = sub.u01();
      const double scale = root_t * std::sqrt(1.0 - tau);
      std::vector<double> y(x.begin(), x.end());
      for (int c = 0; c < d; ++c) y[static_cast<std::size_t>(c)] += sub.normal() * scale;
      for (int i = 0; i < d; ++i) {
        out.u[static_cast<std::size_t>(i)][si] +=
            t * (*f)[static_cast<std::size_t>(i)].value(y, t * tau);
        for (int j = 0; j < d; ++j)
          out.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][si] +=
              t * (*f)[static_cast<std::size_t>(i)].gradient(y, t * tau, j);
      }
    }
  }
  return out;
}

NestedLevel nested_level(const std::vector<TestField>& a,
                         const std::optional<std::vector<TestField>>& f,
                         std::span<const double> x, double t,
                         const std::vector<long long>& level_n, int level,
                         const RandomStream& stream);

// One correction sample of level `level`: the transported nonlinearity
// t F[w] at a uniform time, and its derivative mirror at the gap-singular
// time on the same increments.
struct CorrectionSample {
  std::vector<double> u;                // contribution per component
  std::vector<std::vector<double>> du;  // [i][j]
};

CorrectionSample nested_correction_sample(const std::vector<TestField>& a,
                                          const std::optional<std::vector<TestField>>& f,
                                          std::span<const double> x, double t,
                                          const std::vector<long long>& level_n, int level,
                                          const RandomStream& sub) {
  const int d = static_cast<int>(a.size());
  CorrectionSample out;
  out.u.assign(static_cast<std::size_t>(d), 0.0);
  out.du.assign(static_cast<std::size_t>(d),
                std::vector<double>(static_cast<std::size_t>(d), 0.0));
  RandomStream draw = sub;
  const double u_time = draw.u01();
  const double root_t = std::sqrt(t);
  std::vector<double> eta(static_cast<std::size_t>(d));
  for (double& z : eta) z = draw.normal();

  {
    const double s_time = t * u_time;
    const double scale = root_t * std::sqrt(1.0 - u_time);
    std::vector<double> y(x.begin(), x.end());
    for (int c = 0; c < d; ++c)
      y[static_cast<std::size_t>(c)] += eta[static_cast<std::size_t>(c)] * scale;
    const NestedLevel w = nested_level(a, f, y, s_time, level_n, level - 1, sub.child(7));
    for (int i = 0; i < d; ++i) {
      double F = 0.0;
      for (int j = 0; j < d; ++j)
        F += w.u[static_cast<std::size_t>(j)] *
             w.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      out.u[static_cast<std::size_t>(i)] = t * F;
    }
  }
  {
    const double rho = 1.0 - (1.0 - u_time) * (1.0 - u_time);
    const double s_time = t * rho;
    const double scale = root_t * std::sqrt(1.0 - rho);
    std::vector<double> y(x.begin(), x.end());
    for (int c = 0; c < d; ++c)
      y[static_cast<std::size_t>(c)] += eta[static_cast<std::size_t>(c)] * scale;
    const NestedLevel w = nested_level(a, f, y, s_time, level_n, level - 1, sub.child(8));
    for (int i = 0; i < d; ++i) {
      double F = 0.0;
      for (int j = 0; j < d; ++j)
        F += w.u[static_cast<std::size_t>(j)] *
             w.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      for (int j = 0; j < d; ++j)
        out.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            2.0 * root_t * (-eta[static_cast<std::size_t>(j)]) * F;
    }
  }
  return out;
}

NestedLevel nested_level(const std::vector<TestField>& a,
                         const std::optional<std::vector<TestField>>& f,
                         std::span<const double> x, double t,
                         const std::vector<long long>& level_n, int level,
                         const RandomStream& stream) {
  const int d = static_cast<int>(a.size());
  const NestedU0Samples base = nested_u0_samples(a, f, x, t, level_n[0], stream.child(0));
  NestedLevel out;
  out.u.assign(static_cast<std::size_t>(d), 0.0);
  out.du.assign(static_cast<std::size_t>(d),
                std::vector<double>(static_cast<std::size_t>(d), 0.0));
  for (int i = 0; i < d; ++i) {
    out.u[static_cast<std::size_t>(i)] =
        finalize_samples(base.u[static_cast<std::size_t>(i)]).value;
    for (int j = 0; j < d; ++j)
      out.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          finalize_samples(base.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]).value;
  }
  if (level == 0) return out;

  const long long n_l = level_n[static_cast<std::size_t>(level)];
  const RandomStream corr_stream = stream.child(1);
  for (long long s = 0; s < n_l; ++s) {
    const CorrectionSample cs = nested_correction_sample(
        a, f, x, t, level_n, level, corr_stream.child(static_cast<std::uint64_t>(s)));
    for (int i = 0; i < d; ++i) {
      out.u[static_cast<std::size_t>(i)] += cs.u[static_cast<std::size_t>(i)] / static_cast<double>(n_l);
      for (int j = 0; j < d; ++j)
        out.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            cs.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / static_cast<double>(n_l);
    }
  }
  return out;
}

}  // namespace

SolutionEstimate iterate_nested(const std::vector<TestField>& a,
                                const std::optional<std::vector<TestField>>& f,
                                const SpaceTimeGrid& grid, const std::vector<long long>& level_n,
                                std::uint64_t seed) {
  grid.validate();
  if (level_n.empty()) throw std::invalid_argument("iterate_nested: need N(0..L)");
  for (long long n : level_n)
    if (n < 1) throw std::invalid_argument("iterate_nested: every N must be >= 1");
  const int d = static_cast<int>(a.size());
  const int levels = static_cast<int>(level_n.size()) - 1;

  const RandomStream root(seed);
  SolutionEstimate sol;
  sol.grid = grid;
  sol.values.assign(grid.points.size(),
                    std::vector<EstimateWithError>(static_cast<std::size_t>(d)));
  sol.grads.assign(grid.points.size(),
                   std::vector<std::vector<EstimateWithError>>(
                       static_cast<std::size_t>(d),
                       std::vector<EstimateWithError>(static_cast<std::size_t>(d))));

  long long m_spent = 2 * level_n[0];
  for (int j = 1; j <= levels; ++j) m_spent += (j + 1) * level_n[static_cast<std::size_t>(j)];
  sol.budget_used = m_spent;

  for (std::size_t ip = 0; ip < grid.points.size(); ++ip) {
    const SpaceTimePoint& pt = grid.points[ip];
    const RandomStream pstream = root.child(ip);
    const NestedU0Samples base =
        nested_u0_samples(a, f, pt.x, pt.t, level_n[0], pstream.child(0));

    // top-level correction samples, kept individually for the stderr
    const long long n_top = levels >= 1 ? level_n[static_cast<std::size_t>(levels)] : 0;
    std::vector<CorrectionSample> corr;
    corr.reserve(static_cast<std::size_t>(n_top));
    const RandomStream corr_stream = pstream.child(1);
    for (long long s = 0; s < n_top; ++s)
      corr.push_back(nested_correction_sample(a, f, pt.x, pt.t, level_n, levels,
                                              corr_stream.child(static_cast<std::uint64_t>(s))));

    for (int i = 0; i < d; ++i) {
      const EstimateWithError u0_est = finalize_samples(base.u[static_cast<std::size_t>(i)]);
      EstimateWithError total = u0_est;
      if (n_top > 0) {
        std::vector<double> samples(static_cast<std::size_t>(n_top));
        for (long long s = 0; s < n_top; ++s)
          samples[static_cast<std::size_t>(s)] =
              corr[static_cast<std::size_t>(s)].u[static_cast<std::size_t>(i)];
        const EstimateWithError corr_est = finalize_samples(samples);
        total.value += corr_est.value;
        total.n_samples += corr_est.n_samples;
        total.stderr_ = std::sqrt(total.stderr_ * total.stderr_ + corr_est.stderr_ * corr_est.stderr_);
      }
      sol.values[ip][static_cast<std::size_t>(i)] = total;

      for (int j = 0; j < d; ++j) {
        const EstimateWithError du0_est =
            finalize_samples(base.du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        EstimateWithError gtotal = du0_est;
        if (n_top > 0) {
          std::vector<double> samples(static_cast<std::size_t>(n_top));
          for (long long s = 0; s < n_top; ++s)
            samples[static_cast<std::size_t>(s)] =
                corr[static_cast<std::size_t>(s)].du[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          const EstimateWithError corr_est = finalize_samples(samples);
          gtotal.value += corr_est.value;
          gtotal.n_samples += corr_est.n_samples;
          gtotal.stderr_ =
              std::sqrt(gtotal.stderr_ * gtotal.stderr_ + corr_est.stderr_ * corr_est.stderr_);
        }
        sol.grads[ip][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = gtotal;
      }
    }
  }
  return sol;
}

double variance_aggregate(const Allocation& alloc, double t, double B, int n, int d) {
  if (!(B >= 0.0)) throw std::domain_error("variance_aggregate: B must be >= 0");
  alloc.validate();
  if (alloc.n != n) throw std::domain_error("variance_aggregate: depth mismatch");
  double total = 0.0;
  for (std::size_t k = 1; k <= alloc.counts.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double W = unit_ball_volume(static_cast<int>(k));
    const double A = static_cast<double>(coeff_A(static_cast<int>(k), n));
    total += std::max(std::pow(t, kk), std::pow(t, 2.0 * kk)) * W * W * A *
             std::pow(B, 2.0 * kk) / static_cast<double>(alloc.counts[k - 1]);
  }
  (void)d;
  return total;
}

double triple_norm_estimate(const SpaceTimeGrid& grid,
                            const std::vector<std::vector<double>>& values,
                            const std::vector<std::vector<std::vector<double>>>& grads) {
  grid.validate();
  if (values.size() != grid.points.size() || grads.size() != grid.points.size())
    throw std::domain_error("triple_norm_estimate: shape mismatch");
  double best = 0.0;
  for (std::size_t p = 0; p < grid.points.size(); ++p) {
    double x_norm = 0.0;
    for (double c : grid.points[p].x) x_norm += c * c;
    const double weight = std::max(std::sqrt(x_norm), 1.0);
    double amplitude = 0.0;
    for (double v : values[p]) amplitude = std::max(amplitude, std::fabs(v));
    for (const auto& row : grads[p])
      for (double g : row) amplitude = std::max(amplitude, std::fabs(g));
    best = std::max(best, weight * amplitude);
  }
  return best;
}

}  // namespace nsmc
