#pragma once

// Brute-force verifiers. They assemble best responses straight from c and c'
// and never call the closed-form solvers, so agreement is meaningful.

#include <cstddef>

#include "congestion/cost_model.hpp"
#include "congestion/equilibrium.hpp"

namespace congestion {

struct OracleConfig {
  double grid_resolution = 1e-4;  // grid step as a fraction of T^N
  double br_damping = 0.5;        // initial λ
  int max_iterations = 10000;
  double tolerance = 1e-11;       // on |Φ(ξ₁) − ξ₁|, also the cost-tie band

  void validate() const;
};

/// Damped aggregate best-response iteration ξ₁ ← ξ₁ + λ(Φ(ξ₁) − ξ₁) from
/// `start`. λ halves whenever the residual changes sign and doubles back (up
/// to its initial value) after three same-sign steps; steps leaving the
/// bracket known from earlier residual signs are replaced by its midpoint.
/// Works for either arc orientation. Throws ConvergenceError after
/// max_iterations.
EquilibriumOutcome best_response_iteration_ce(const ArcCost& arc1, const ArcCost& arc2,
                                              const PlayerProfile& players, double start,
                                              const OracleConfig& cfg = {});

EquilibriumOutcome best_response_iteration_ce(const Game& game, double start,
                                              const OracleConfig& cfg = {});

struct OracleMinimum {
  double argmin = 0.0;
  double cost = 0.0;
};

/// Cost of the SA strategy s evaluated on a best-response CE.
double oracle_sa_cost(const Game& game, std::size_t player, double s,
                      const OracleConfig& cfg = {});

/// Leader cost Π^N for arc-1 flow x1 (canonical arcs), followers solved by
/// best-response iteration.
double oracle_leader_cost(const Game& game, std::size_t leader, double x1,
                          const OracleConfig& cfg = {});

/// Grid over s ∈ [0, T^N] at cfg.grid_resolution·T^N, then golden refinement
/// around the best grid point. Ties go to the smaller s.
OracleMinimum grid_argmin_sa(const Game& game, std::size_t player,
                             const OracleConfig& cfg = {});

/// Same scheme over the leader's arc-1 flow x1 ∈ [0, T^N].
OracleMinimum numeric_leader_argmin(const Game& game, std::size_t leader,
                                    const OracleConfig& cfg = {});

}  // namespace congestion
