#pragma once

// Stackelberg game in which one atomic player commits to a flow first and the
// remaining players reach a composite equilibrium on the pre-loaded arcs.

#include <cstddef>
#include <optional>

#include "congestion/decentralization.hpp"
#include "congestion/equilibrium.hpp"

namespace congestion {

/// Leader flow on the canonical arcs.
struct LeaderFlow {
  double x1 = 0.0;
  double x2 = 0.0;
};

struct StackelbergSolution {
  LeaderFlow leader_flow;
  EquilibriumOutcome follower_outcome;  // arcs shifted by the leader flow
  double leader_cost = 0.0;             // Π^N
  OptimalStrategy decentralization;     // the strategy the flow was built from
  std::optional<double> oracle_cost;
};

/// Equilibrium of the followers on t ↦ c_r(x_r + t). The followers' profile
/// may be empty (zero mass), in which case the outcome has no flows.
EquilibriumOutcome follower_ce(const CanonicalNetwork& net, const LeaderFlow& x,
                               const PlayerProfile* followers,
                               const Tolerances& tol = {});

/// Followers of `leader` in `game`: T⁰ and every other atomic player.
std::optional<PlayerProfile> follower_profile(const Game& game, std::size_t leader);

/// Π^N(x, T^{−N}) = x1 c1(x1 + ξ1) + x2 c2(x2 + ξ2) at the followers' CE.
double leader_cost(const Game& game, std::size_t leader, const LeaderFlow& x,
                   const Tolerances& tol = {});

struct SpneOptions {
  OptimizerOptions optimizer;
  bool cross_check = true;
  double leader_grid_resolution = 1e-5;
  double mismatch_tol = 1e-6;
};

/// Builds the leader flow from the deputies' aggregate flow at the optimal
/// decentralization and cross-checks Π against a direct numeric minimization
/// over x1 (ConsistencyError beyond mismatch_tol).
StackelbergSolution solve_spne(const Game& game, std::size_t leader,
                               const SpneOptions& opts = {}, const Tolerances& tol = {});

}  // namespace congestion
