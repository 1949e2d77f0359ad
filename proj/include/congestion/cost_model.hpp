#pragma once

// Arc cost functions, model validation, canonical arc orientation and the
// auxiliary functions h, a, F_n (with their monotone inverses) that the
// closed-form equilibrium analysis is written in.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace congestion {

enum class CostKind { Affine, Polynomial, TabulatedConvex };

std::string to_string(CostKind kind);

/// Per-unit cost of one arc as a function of the total weight on it.
///
/// Polynomial costs are stored as ascending coefficients; degree <= 1 reports
/// as Affine. Tabulated costs are given by samples of the marginal cost c' at
/// knots 0 = t_0 < ... < t_K = M̄, linearly interpolated, plus c(0); the cost
/// itself is the exact integral, so c is C^1 and convex whenever the samples
/// are non-decreasing.
///
/// Every evaluation requires 0 <= t <= domain_bound() and throws DomainError
/// otherwise.
class ArcCost {
 public:
  static ArcCost polynomial(std::vector<double> ascending_coefficients,
                            double domain_bound);
  static ArcCost tabulated(std::vector<double> knots,
                           std::vector<double> marginals, double value_at_zero);

  CostKind kind() const { return kind_; }
  double domain_bound() const { return domain_bound_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& knot_marginals() const { return marginals_; }

  double value(double t) const;
  double marginal(double t) const;
  double curvature(double t) const;

  /// t ↦ c(offset + t) on [0, M̄ − offset]. Used to pre-load an arc with a
  /// fixed flow (e.g. a Stackelberg leader's commitment).
  ArcCost shifted(double offset) const;

  /// Dense sampling of c, c' and c'' at `ts`. Output spans must match `ts`.
  void sample(std::span<const double> ts, std::span<double> values,
              std::span<double> marginals, std::span<double> curvatures) const;

 private:
  ArcCost() = default;
  void check_domain(double t) const;
  std::size_t segment(double t) const;

  CostKind kind_ = CostKind::Affine;
  double domain_bound_ = 0.0;
  // polynomial
  std::vector<double> coeffs_, d1_, d2_;
  // tabulated
  std::vector<double> knots_, marginals_, cumulative_;
};

/// c_r(t); exact for polynomial costs.
double eval_cost(const ArcCost& arc, double t);
/// c'_r(t); exact derivative of the coefficient list for polynomials.
double eval_marginal(const ArcCost& arc, double t);

/// Checks non-negativity, strict monotonicity and convexity on [0, M̄].
/// Throws ValidationError naming the violated property and a witness point.
///
/// Polynomials are sampled at 1024 uniform points; for degree <= 4 the sign
/// of c'' is also settled exactly (it is at most quadratic). Above degree 4
/// the convexity check is sampling-only and therefore heuristic.
void validate_arc(const ArcCost& arc);

inline constexpr int kValidationSamples = 1024;

enum class AssumptionCase { I, II };

std::string to_string(AssumptionCase c);

/// Two arcs oriented so that arc 1 is the weakly cheaper arc at every
/// equilibrium with total weight M. Only validate_and_canonicalize builds one.
class CanonicalNetwork {
 public:
  const ArcCost& arc1() const { return arc1_; }
  const ArcCost& arc2() const { return arc2_; }
  double total_mass() const { return mass_; }
  /// True iff the user's arcs were exchanged.
  bool swapped() const { return swapped_; }
  AssumptionCase assumption_case() const { return case_; }
  /// The crossing point c1(ξ̂) = c2(M − ξ̂) when it exists in [0, M].
  std::optional<double> xi_hat() const { return xi_hat_; }

  friend CanonicalNetwork validate_and_canonicalize(const ArcCost&,
                                                    const ArcCost&, double,
                                                    double);

 private:
  CanonicalNetwork(ArcCost a1, ArcCost a2, double m, bool swapped,
                   AssumptionCase c, std::optional<double> xi_hat)
      : arc1_(std::move(a1)),
        arc2_(std::move(a2)),
        mass_(m),
        swapped_(swapped),
        case_(c),
        xi_hat_(xi_hat) {}

  ArcCost arc1_;
  ArcCost arc2_;
  double mass_;
  bool swapped_;
  AssumptionCase case_;
  std::optional<double> xi_hat_;
};

/// Validates both arcs and orders them so that case I (c1(M) < c2(0)) or
/// case II (crossing exists and ξ̂ c1'(ξ̂) >= (M − ξ̂) c2'(M − ξ̂)) holds.
/// At equality in the slope condition the input order is kept.
CanonicalNetwork validate_and_canonicalize(const ArcCost& arc_a,
                                           const ArcCost& arc_b, double total_mass,
                                           double tol = 1e-12);

// Slope of the linear extension of h outside [0, M].
inline constexpr double kExtensionSlope = 1.0;

struct AuxiliaryBundle {
  double H;                      // h(M) = (c2(0) − c1(M)) / c1'(M)
  std::optional<double> A;       // a(ξ̂)
  std::optional<double> xi_hat;
  double epsilon_ext = kExtensionSlope;
};

AuxiliaryBundle auxiliary_bundle(const CanonicalNetwork& net);

/// h(t) = (c2(M − t) − c1(t)) / c1'(t) on [0, M], linearly extended outside.
double aux_h(const CanonicalNetwork& net, double t);
/// a(t) = c2'(M − t) / c1'(t) on [0, M], constant outside.
double aux_a(const CanonicalNetwork& net, double t);
/// F_n(t) = (M − t)(1 + a(t)) + n h(t).
double aux_F(const CanonicalNetwork& net, int n, double t);

/// Inverses of the strictly decreasing h and F_n. Values inside the image of
/// [0, M] are found by bisection to `tol`; values outside it map through the
/// linear extension in closed form. Non-finite input throws BracketingError.
double inverse_h(const CanonicalNetwork& net, double v, double tol = 1e-12);
double inverse_F(const CanonicalNetwork& net, int n, double v, double tol = 1e-12);

}  // namespace congestion
