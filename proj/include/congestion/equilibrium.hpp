#pragma once

// Player profiles, composite equilibrium outcomes and the two equilibrium
// solvers: a monotone bisection on the arc-1 aggregate (the reference) and a
// closed-form enumeration of the four equilibrium modes (the cross-check).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "congestion/cost_model.hpp"

namespace congestion {

/// Which side of a unilateral decentralization an atomic player is on.
/// Plain games tag every atomic player as Deputy, so mode labels then count
/// all splitting players in k.
enum class Role { Deputy, Opponent };

struct AtomicPlayer {
  double weight = 0.0;
  Role role = Role::Deputy;
  /// Index in the caller's own numbering (user order for opponents, deputy
  /// order for deputies).
  std::size_t source = 0;
};

/// Nonatomic mass T⁰ plus atomic players sorted by non-increasing weight.
class PlayerProfile {
 public:
  PlayerProfile(double nonatomic_mass, std::vector<AtomicPlayer> atomic);

  /// Plain profile; atomic player i keeps `source == i`.
  static PlayerProfile from_weights(double nonatomic_mass,
                                    const std::vector<double>& weights);

  double nonatomic_mass() const { return nonatomic_; }
  const std::vector<AtomicPlayer>& atomic() const { return atomic_; }
  std::size_t size() const { return atomic_.size(); }
  double total_mass() const;
  double atomic_mass() const;

  /// Sorted position of the atomic player with the given role and source.
  std::size_t position_of(std::size_t source, Role role = Role::Deputy) const;

 private:
  double nonatomic_;
  std::vector<AtomicPlayer> atomic_;
};

struct Mode {
  enum class Kind { One, Two, Three, Four };
  Kind kind = Kind::One;
  int k = 0;  // splitting deputies (Mode 2)
  int l = 0;  // splitting opponents (Modes 2 and 3)

  friend bool operator==(const Mode&, const Mode&) = default;
};

std::string to_string(const Mode& mode);

struct ArcFlow {
  double arc1 = 0.0;
  double arc2 = 0.0;
};

/// A solved composite equilibrium. Flows are in the solver's arc order
/// (canonical order for canonical games) and atomic entries follow the
/// profile's sorted order.
struct EquilibriumOutcome {
  std::vector<ArcFlow> atomic_flows;
  ArcFlow nonatomic_flow;
  double xi1 = 0.0;
  double xi2 = 0.0;
  double cost1 = 0.0;  // c1(ξ1)
  double cost2 = 0.0;  // c2(ξ2)
  std::optional<Mode> mode;
  std::vector<double> atomic_costs;
  double nonatomic_cost = 0.0;  // u⁰ = min(c1(ξ1), c2(ξ2))
  double social_cost = 0.0;
};

/// A canonical network together with a profile of the same total weight.
struct Game {
  Game(CanonicalNetwork net, PlayerProfile profile);

  CanonicalNetwork network;
  PlayerProfile players;
};

struct Tolerances {
  double root = 1e-12;       // bisection width on aggregates and inverses
  double zero_flow = 1e-10;  // a flow below this counts as zero
  double cost_gap = 1e-10;   // arc costs this close count as equal
  double mode_slack = 1e-9;  // allowed violation of a mode's conditions
};

/// Fills in aggregates and costs from per-player arc-1 flows.
EquilibriumOutcome assemble_outcome(const ArcCost& arc1, const ArcCost& arc2,
                                    const PlayerProfile& players,
                                    const std::vector<double>& atomic_arc1,
                                    double nonatomic_arc1);

/// Equilibrium of the two-arc game with the given arcs, in whatever
/// orientation. No mode is attached. Used directly for follower games whose
/// arcs are pre-loaded and need not be canonical.
EquilibriumOutcome solve_two_arc_bisection(const ArcCost& arc1, const ArcCost& arc2,
                                           const PlayerProfile& players,
                                           double root_tol = 1e-12);

/// Reference solver: bisection on the strictly decreasing excess map
/// g(ξ1) = Σ responses(ξ1) − ξ1, with the nonatomic jump at ξ̂ handled
/// explicitly. The returned outcome carries its classified mode.
EquilibriumOutcome solve_ce_bisection(const Game& game, const Tolerances& tol = {});

/// Cross-check solver: enumerates modes 1–4 and the splitting prefix, checks
/// each candidate's validity conditions and returns the consistent one with
/// closed-form flows. Throws ConsistencyError if none validates.
EquilibriumOutcome solve_ce_modal(const Game& game, const Tolerances& tol = {});

/// Mode of an outcome in a canonical game, read from its sign pattern.
/// Throws ConsistencyError when the pattern matches no mode.
Mode classify_mode(const PlayerProfile& players, const EquilibriumOutcome& outcome,
                   const Tolerances& tol = {});

/// uⁱ of the atomic player at sorted position i.
double player_cost(const EquilibriumOutcome& outcome, std::size_t i);
double social_cost(const EquilibriumOutcome& outcome);

/// Residuals of the equilibrium conditions.
struct EquilibriumCheck {
  double feasibility = 0.0;       // worst |x1 + x2 − T|, negativity, |ξ − Σx|
  double atomic_residual = 0.0;   // worst clamped first-order condition violation
  double nonatomic_residual = 0.0;  // nonatomic mass on a costlier arc (cost gap)
};

EquilibriumCheck check_equilibrium(const ArcCost& arc1, const ArcCost& arc2,
                                   const PlayerProfile& players,
                                   const EquilibriumOutcome& outcome,
                                   double zero_flow = 1e-10);

}  // namespace congestion
