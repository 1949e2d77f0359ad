#pragma once

// Decentralization strategies of one atomic player ("the decentralizer"):
// induced games, deputy costs, reduction to single-atomic (SA) strategies,
// regime classification and the optimal strategy.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "congestion/equilibrium.hpp"

namespace congestion {

/// α = (α⁰; α¹ ≥ … ≥ αⁿ > 0) with α⁰ + Σαⁱ equal to the decentralizer's weight.
struct DecentralizationStrategy {
  double nonatomic = 0.0;
  std::vector<double> atomic;

  static DecentralizationStrategy trivial(double weight);       // ᾱ
  static DecentralizationStrategy fully_nonatomic(double weight);  // α̲
  /// One atomic deputy of weight s, the rest nonatomic.
  static DecentralizationStrategy single_atomic(double s, double weight);

  double total() const;
};

struct SAStrategy {
  double s = 0.0;
};

/// Throws ValidationError unless α is non-negative, sorted after
/// normalization and conserves `weight` (relative slack 1e-12).
DecentralizationStrategy normalized(DecentralizationStrategy alpha, double weight);

/// The decentralizer is identified by `player`, the source index of an atomic
/// player of the plain profile `players`.
double decentralizer_weight(const PlayerProfile& players, std::size_t player);

/// Opponent weights T¹ ≥ … ≥ T^{N−1} (other atomic players, sorted).
std::vector<double> opponent_weights(const PlayerProfile& players, std::size_t player);

/// Profile (α⁰ + T⁰; α¹…αⁿ, opponents) with deputies tagged Role::Deputy
/// (source = deputy index) and opponents Role::Opponent (source kept).
PlayerProfile induced_game(const PlayerProfile& players, std::size_t player,
                           const DecentralizationStrategy& alpha);

struct StrategyEvaluation {
  EquilibriumOutcome outcome;  // CE of the induced game (canonical arcs)
  PlayerProfile profile;       // the induced profile
  ArcFlow deputy_flow;         // x = aggregate flow of all deputies
  double cost = 0.0;           // U^N(α, T^{−N})
};

/// Solves the induced game with the reference solver. The nonatomic deputies'
/// share of the merged nonatomic arc-1 flow is taken proportional to mass.
StrategyEvaluation evaluate_strategy(const Game& game, std::size_t player,
                                     const DecentralizationStrategy& alpha,
                                     const Tolerances& tol = {});

double strategy_cost(const Game& game, std::size_t player,
                     const DecentralizationStrategy& alpha, const Tolerances& tol = {});
double strategy_cost(const Game& game, std::size_t player, SAStrategy s,
                     const Tolerances& tol = {});

/// Equivalent SA strategy. Mode 2 (k deputies splitting) gives
/// s = α^{[k]} − (k−1) h(η₁); every other mode is represented by s = 0.
/// Verifies cost equality and throws ConsistencyError if it fails.
SAStrategy sa_reduce(const Game& game, std::size_t player,
                     const DecentralizationStrategy& alpha, const Tolerances& tol = {});

/// Number l₀ of splitting opponents at the CE of the fully nonatomic strategy
/// (given sorted opponent weights). Throws RegimeError if the premise fails
/// or no l validates.
int compute_l0(const CanonicalNetwork& net, const std::vector<double>& opponents,
               double tol = 1e-12);

enum class Regime { Nonatomic, Trivial, Nontrivial };

std::string to_string(Regime r);

struct CaseClassification {
  Regime regime = Regime::Nontrivial;
  double H = 0.0;
  std::optional<double> xi_hat;
  std::optional<int> l0;
  std::optional<double> C0;
  std::optional<double> C1;
  std::optional<double> C2;
  std::vector<double> breakpoints;  // B_0 … B_{l0−1}
};

CaseClassification classify_case(const Game& game, std::size_t player,
                                 const Tolerances& tol = {});

struct OptimizerOptions {
  double golden_tol = 1e-10;
  int scan_points = 24;      // coarse scan per smooth segment
  bool cross_check = true;   // compare with the grid oracle
  double mismatch_tol = 1e-6;
};

struct OptimalStrategy {
  SAStrategy strategy;
  double cost = 0.0;
  CaseClassification classification;
  std::optional<double> oracle_cost;  // set when cross-checked
};

/// Optimal SA strategy. Nonatomic regime → s = 0, Trivial → s = T^N,
/// Nontrivial → segmented golden-section search of s ↦ U^N(s).
OptimalStrategy optimal_strategy(const Game& game, std::size_t player,
                                 const OptimizerOptions& opts = {},
                                 const Tolerances& tol = {});

}  // namespace congestion
