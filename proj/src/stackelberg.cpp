#include "congestion/stackelberg.hpp"

#include <cmath>
#include <sstream>

#include "congestion/errors.hpp"
#include "congestion/oracle.hpp"

namespace congestion {

EquilibriumOutcome follower_ce(const CanonicalNetwork& net, const LeaderFlow& x,
                               const PlayerProfile* followers, const Tolerances& tol) {
  if (!(x.x1 >= 0.0 && x.x2 >= 0.0) || !std::isfinite(x.x1 + x.x2)) {
    throw ValidationError("leader flow must be non-negative");
  }
  const double m = net.total_mass();
  const double rest = followers ? followers->total_mass() : 0.0;
  if (std::abs(x.x1 + x.x2 + rest - m) > 1e-9 * std::max(1.0, m)) {
    throw ValidationError("leader flow plus follower mass does not match M");
  }
  if (!followers) return EquilibriumOutcome{};
  return solve_two_arc_bisection(net.arc1().shifted(x.x1), net.arc2().shifted(x.x2),
                                 *followers, tol.root);
}

std::optional<PlayerProfile> follower_profile(const Game& game, std::size_t leader) {
  const auto opp = opponent_weights(game.players, leader);
  const double t0 = game.players.nonatomic_mass();
  if (opp.empty() && t0 == 0.0) return std::nullopt;
  std::vector<AtomicPlayer> atomic;
  const std::size_t pos = game.players.position_of(leader);
  for (std::size_t i = 0; i < game.players.size(); ++i) {
    if (i == pos) continue;
    const auto& p = game.players.atomic()[i];
    atomic.push_back({p.weight, Role::Opponent, p.source});
  }
  return PlayerProfile(t0, std::move(atomic));
}

double leader_cost(const Game& game, std::size_t leader, const LeaderFlow& x,
                   const Tolerances& tol) {
  const auto followers = follower_profile(game, leader);
  const double w = decentralizer_weight(game.players, leader);
  if (std::abs(x.x1 + x.x2 - w) > 1e-9 * std::max(1.0, w)) {
    throw ValidationError("leader flow must sum to the leader's weight");
  }
  const auto z = follower_ce(game.network, x, followers ? &*followers : nullptr, tol);
  const auto& net = game.network;
  return x.x1 * net.arc1().value(x.x1 + z.xi1) + x.x2 * net.arc2().value(x.x2 + z.xi2);
}

StackelbergSolution solve_spne(const Game& game, std::size_t leader,
                               const SpneOptions& opts, const Tolerances& tol) {
  StackelbergSolution sol;
  sol.decentralization = optimal_strategy(game, leader, opts.optimizer, tol);
  const double w = decentralizer_weight(game.players, leader);
  const auto ev = evaluate_strategy(
      game, leader,
      DecentralizationStrategy::single_atomic(sol.decentralization.strategy.s, w), tol);
  sol.leader_flow = {ev.deputy_flow.arc1, ev.deputy_flow.arc2};
  // deputy flows sum to w up to rounding; put any residue on arc 2
  sol.leader_flow.x2 = std::max(0.0, w - sol.leader_flow.x1);

  const auto followers = follower_profile(game, leader);
  sol.follower_outcome =
      follower_ce(game.network, sol.leader_flow, followers ? &*followers : nullptr, tol);
  const auto& net = game.network;
  sol.leader_cost =
      sol.leader_flow.x1 * net.arc1().value(sol.leader_flow.x1 + sol.follower_outcome.xi1) +
      sol.leader_flow.x2 * net.arc2().value(sol.leader_flow.x2 + sol.follower_outcome.xi2);

  auto mismatch = [&](const char* what, double other) {
    std::ostringstream os;
    os.precision(15);
    os << "leader cost " << sol.leader_cost << " disagrees with " << what << " " << other;
    throw ConsistencyError(os.str());
  };
  if (std::abs(sol.leader_cost - sol.decentralization.cost) > opts.mismatch_tol) {
    mismatch("the optimal decentralization cost", sol.decentralization.cost);
  }
  if (opts.cross_check) {
    OracleConfig cfg;
    cfg.grid_resolution = opts.leader_grid_resolution;
    const auto o = numeric_leader_argmin(game, leader, cfg);
    sol.oracle_cost = o.cost;
    if (std::abs(o.cost - sol.leader_cost) > opts.mismatch_tol) {
      mismatch("the numeric leader minimum", o.cost);
    }
  }
  return sol;
}

}  // namespace congestion
