#include "congestion/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "congestion/errors.hpp"
#include "congestion/kernels.hpp"
#include "congestion/numeric.hpp"

namespace congestion {

namespace {

std::vector<double> derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) {
    d[k - 1] = static_cast<double>(k) * c[k];
  }
  return d;
}

double horner(const std::vector<double>& c, double t) {
  double acc = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) acc = std::fma(acc, t, c[k]);
  return acc;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

[[noreturn]] void fail(const std::string& property, double witness, double value) {
  throw ValidationError("assumption 1 violated: " + property + " fails at t=" +
                        fmt(witness) + " (value " + fmt(value) + ")");
}

}  // namespace

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::Affine:
      return "affine";
    case CostKind::Polynomial:
      return "polynomial";
    case CostKind::TabulatedConvex:
      return "tabulated-convex";
  }
  return "unknown";
}

std::string to_string(AssumptionCase c) { return c == AssumptionCase::I ? "I" : "II"; }

ArcCost ArcCost::polynomial(std::vector<double> ascending, double domain_bound) {
  if (ascending.empty()) {
    throw ValidationError("polynomial cost needs at least one coefficient");
  }
  for (double v : ascending) {
    if (!std::isfinite(v)) throw ValidationError("non-finite cost coefficient");
  }
  if (!(domain_bound > 0.0) || !std::isfinite(domain_bound)) {
    throw ValidationError("domain bound must be a positive finite number");
  }
  while (ascending.size() > 1 && ascending.back() == 0.0) ascending.pop_back();
  ArcCost arc;
  arc.kind_ = ascending.size() <= 2 ? CostKind::Affine : CostKind::Polynomial;
  arc.domain_bound_ = domain_bound;
  arc.d1_ = derivative(ascending);
  arc.d2_ = derivative(arc.d1_);
  arc.coeffs_ = std::move(ascending);
  return arc;
}

ArcCost ArcCost::tabulated(std::vector<double> knots, std::vector<double> marginals,
                           double value_at_zero) {
  if (knots.size() < 2 || knots.size() != marginals.size()) {
    throw ValidationError(
        "tabulated cost needs >= 2 knots and one marginal per knot");
  }
  if (knots.front() != 0.0) throw ValidationError("first knot must be 0");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1]) || !std::isfinite(knots[i])) {
      throw ValidationError("knots must be finite and strictly increasing");
    }
  }
  for (double m : marginals) {
    if (!std::isfinite(m)) throw ValidationError("non-finite marginal sample");
  }
  if (!std::isfinite(value_at_zero)) throw ValidationError("non-finite c(0)");
  ArcCost arc;
  arc.kind_ = CostKind::TabulatedConvex;
  arc.domain_bound_ = knots.back();
  arc.cumulative_.resize(knots.size());
  arc.cumulative_[0] = value_at_zero;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double dt = knots[i] - knots[i - 1];
    arc.cumulative_[i] =
        arc.cumulative_[i - 1] + 0.5 * (marginals[i] + marginals[i - 1]) * dt;
  }
  arc.knots_ = std::move(knots);
  arc.marginals_ = std::move(marginals);
  return arc;
}

void ArcCost::check_domain(double t) const {
  if (!(t >= 0.0 && t <= domain_bound_)) {
    throw DomainError("cost evaluated at t=" + fmt(t) + " outside [0, " +
                      fmt(domain_bound_) + "]");
  }
}

std::size_t ArcCost::segment(double t) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - knots_.begin());
  if (i == 0) return 0;
  return std::min(i - 1, knots_.size() - 2);
}

double ArcCost::value(double t) const {
  check_domain(t);
  if (kind_ != CostKind::TabulatedConvex) return horner(coeffs_, t);
  const std::size_t i = segment(t);
  const double dt = t - knots_[i];
  const double slope =
      (marginals_[i + 1] - marginals_[i]) / (knots_[i + 1] - knots_[i]);
  return cumulative_[i] + marginals_[i] * dt + 0.5 * slope * dt * dt;
}

double ArcCost::marginal(double t) const {
  check_domain(t);
  if (kind_ != CostKind::TabulatedConvex) return horner(d1_, t);
  const std::size_t i = segment(t);
  const double slope =
      (marginals_[i + 1] - marginals_[i]) / (knots_[i + 1] - knots_[i]);
  return marginals_[i] + slope * (t - knots_[i]);
}

double ArcCost::curvature(double t) const {
  check_domain(t);
  if (kind_ != CostKind::TabulatedConvex) return horner(d2_, t);
  const std::size_t i = segment(t);
  return (marginals_[i + 1] - marginals_[i]) / (knots_[i + 1] - knots_[i]);
}

ArcCost ArcCost::shifted(double offset) const {
  if (!(offset >= 0.0 && offset < domain_bound_)) {
    throw DomainError("shift " + fmt(offset) + " outside [0, " +
                      fmt(domain_bound_) + ")");
  }
  if (offset == 0.0) return *this;
  if (kind_ != CostKind::TabulatedConvex) {
    // Taylor shift: b_j = sum_{k>=j} a_k C(k, j) offset^(k-j).
    const std::size_t n = coeffs_.size();
    std::vector<double> b(coeffs_);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = n - 1; k > i; --k) b[k - 1] += offset * b[k];
    }
    return polynomial(std::move(b), domain_bound_ - offset);
  }
  std::vector<double> knots{0.0};
  std::vector<double> margs{marginal(offset)};
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (knots_[i] > offset) {
      knots.push_back(knots_[i] - offset);
      margs.push_back(marginals_[i]);
    }
  }
  return tabulated(std::move(knots), std::move(margs), value(offset));
}

void ArcCost::sample(std::span<const double> ts, std::span<double> values,
                     std::span<double> marginals, std::span<double> curvatures) const {
  for (double t : ts) check_domain(t);
  if (kind_ != CostKind::TabulatedConvex) {
    kernels::horner(coeffs_, ts, values);
    kernels::horner(d1_, ts, marginals);
    kernels::horner(d2_, ts, curvatures);
    return;
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    values[i] = value(ts[i]);
    marginals[i] = marginal(ts[i]);
    curvatures[i] = curvature(ts[i]);
  }
}

double eval_cost(const ArcCost& arc, double t) { return arc.value(t); }
double eval_marginal(const ArcCost& arc, double t) { return arc.marginal(t); }

void validate_arc(const ArcCost& arc) {
  const double bound = arc.domain_bound();
  if (arc.kind() == CostKind::TabulatedConvex) {
    const auto& knots = arc.knots();
    const auto& m = arc.knot_marginals();
    if (arc.value(0.0) < 0.0) fail("non-negativity", 0.0, arc.value(0.0));
    if (!(m[0] > 0.0)) fail("strict monotonicity (c' > 0)", 0.0, m[0]);
    for (std::size_t i = 1; i < m.size(); ++i) {
      if (m[i] < m[i - 1]) fail("convexity (c' non-decreasing)", knots[i], m[i]);
    }
    return;
  }

  const auto& c = arc.coefficients();
  // Exact part. With c'' >= 0 on [0, M̄], c' is minimal at 0 and c is minimal
  // at 0, so the endpoint checks below decide monotonicity and sign.
  if (c.size() <= 5) {
    // c'' = p0 + p1 t + p2 t^2
    const double p0 = c.size() > 2 ? 2.0 * c[2] : 0.0;
    const double p1 = c.size() > 3 ? 6.0 * c[3] : 0.0;
    const double p2 = c.size() > 4 ? 12.0 * c[4] : 0.0;
    std::vector<double> candidates{0.0, bound};
    if (p2 > 0.0) {
      const double vertex = -p1 / (2.0 * p2);
      if (vertex > 0.0 && vertex < bound) candidates.push_back(vertex);
    }
    for (double t : candidates) {
      const double v = p0 + t * (p1 + t * p2);
      if (v < -1e-12 * (std::abs(p0) + std::abs(p1) + std::abs(p2) + 1.0)) {
        fail("convexity (c'' >= 0)", t, v);
      }
    }
  }

  std::vector<double> ts = numeric::uniform_grid(0.0, bound, kValidationSamples);
  std::vector<double> vals(ts.size()), margs(ts.size()), curv(ts.size());
  arc.sample(ts, vals, margs, curv);
  double scale = 0.0;
  for (double v : curv) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (curv[i] < -1e-12 * (scale + 1.0)) fail("convexity (c'' >= 0)", ts[i], curv[i]);
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(margs[i] > 0.0)) fail("strict monotonicity (c' > 0)", ts[i], margs[i]);
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (vals[i] < 0.0) fail("non-negativity", ts[i], vals[i]);
  }
}

namespace {

struct Orientation {
  bool valid = false;
  AssumptionCase which = AssumptionCase::I;
  std::optional<double> xi_hat;
};

Orientation orient(const ArcCost& c1, const ArcCost& c2, double m, double tol) {
  Orientation o;
  if (c1.value(m) < c2.value(0.0)) {
    o.valid = true;
    o.which = AssumptionCase::I;
    return o;
  }
  if (c2.value(m) < c1.value(0.0)) return o;  // mirror of case I
  auto gap = [&](double t) { return c2.value(m - t) - c1.value(t); };
  const double xi = numeric::root_of_decreasing(gap, 0.0, m, tol);
  o.xi_hat = xi;
  const double lhs = xi * c1.marginal(xi);
  const double rhs = (m - xi) * c2.marginal(m - xi);
  // Relative slack keeps exact ties (e.g. identical arcs) in the input order.
  const double slack = 1e-9 * std::max({std::abs(lhs), std::abs(rhs), 1.0});
  if (lhs >= rhs - slack) {
    o.valid = true;
    o.which = AssumptionCase::II;
  }
  return o;
}

}  // namespace

CanonicalNetwork validate_and_canonicalize(const ArcCost& arc_a, const ArcCost& arc_b,
                                           double total_mass, double tol) {
  validate_arc(arc_a);
  validate_arc(arc_b);
  if (!(total_mass > 0.0) || !std::isfinite(total_mass)) {
    throw ValidationError("total mass M must be positive");
  }
  if (!(total_mass < arc_a.domain_bound() && total_mass < arc_b.domain_bound())) {
    throw ValidationError("total mass M=" + fmt(total_mass) +
                          " must lie below both arcs' domain bound");
  }
  if (Orientation o = orient(arc_a, arc_b, total_mass, tol); o.valid) {
    return CanonicalNetwork(arc_a, arc_b, total_mass, false, o.which, o.xi_hat);
  }
  if (Orientation o = orient(arc_b, arc_a, total_mass, tol); o.valid) {
    return CanonicalNetwork(arc_b, arc_a, total_mass, true, o.which, o.xi_hat);
  }
  throw ValidationError(
      "assumption 2 violated: neither arc orientation satisfies the ordering condition");
}

double aux_h(const CanonicalNetwork& net, double t) {
  const double m = net.total_mass();
  if (t < 0.0) return aux_h(net, 0.0) - kExtensionSlope * t;
  if (t > m) return aux_h(net, m) - kExtensionSlope * (t - m);
  return (net.arc2().value(m - t) - net.arc1().value(t)) / net.arc1().marginal(t);
}

double aux_a(const CanonicalNetwork& net, double t) {
  const double m = net.total_mass();
  t = std::clamp(t, 0.0, m);
  return net.arc2().marginal(m - t) / net.arc1().marginal(t);
}

double aux_F(const CanonicalNetwork& net, int n, double t) {
  return (net.total_mass() - t) * (1.0 + aux_a(net, t)) + n * aux_h(net, t);
}

double inverse_h(const CanonicalNetwork& net, double v, double tol) {
  if (!std::isfinite(v)) throw BracketingError("inverse_h of a non-finite value");
  const double m = net.total_mass();
  const double top = aux_h(net, 0.0);
  const double bottom = aux_h(net, m);
  if (v > top) return (top - v) / kExtensionSlope;
  if (v < bottom) return m + (bottom - v) / kExtensionSlope;
  return numeric::root_of_decreasing([&](double t) { return aux_h(net, t) - v; },
                                     0.0, m, tol);
}

double inverse_F(const CanonicalNetwork& net, int n, double v, double tol) {
  if (!std::isfinite(v)) throw BracketingError("inverse_F of a non-finite value");
  const double m = net.total_mass();
  const double top = aux_F(net, n, 0.0);
  const double bottom = aux_F(net, n, m);
  if (v > top) {
    return -(v - top) / (1.0 + aux_a(net, 0.0) + n * kExtensionSlope);
  }
  if (v < bottom) {
    return m + (bottom - v) / (1.0 + aux_a(net, m) + n * kExtensionSlope);
  }
  return numeric::root_of_decreasing(
      [&](double t) { return aux_F(net, n, t) - v; }, 0.0, m, tol);
}

AuxiliaryBundle auxiliary_bundle(const CanonicalNetwork& net) {
  AuxiliaryBundle b{};
  b.H = aux_h(net, net.total_mass());
  b.xi_hat = net.xi_hat();
  if (b.xi_hat) b.A = aux_a(net, *b.xi_hat);
  return b;
}

}  // namespace congestion
