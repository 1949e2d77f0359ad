#pragma once

// Comparative statics of a decentralization: impact on opponents and social
// cost relative to not decentralizing, and sweeps over SA strategies.

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "congestion/decentralization.hpp"

namespace congestion {

struct ImpactReport {
  EquilibriumOutcome baseline;  // trivial strategy
  EquilibriumOutcome treated;   // strategy α
  double baseline_cost = 0.0;   // decentralizer's U^N under each
  double treated_cost = 0.0;
  double delta_social = 0.0;
  std::vector<std::size_t> opponent_sources;  // ascending user index
  std::vector<double> delta_opponent_costs;   // same order
  CaseClassification regime;
};

ImpactReport impact_report(const Game& game, std::size_t player,
                           const DecentralizationStrategy& alpha,
                           const Tolerances& tol = {});

struct SweepRow {
  double s = 0.0;
  double xi1 = 0.0;
  double x1 = 0.0;  // deputies on arc 1
  double y1 = 0.0;  // everyone else on arc 1
  double U = 0.0;
  double CS = 0.0;
  double u0 = 0.0;
  std::vector<double> opponent_costs;
};

struct SweepTable {
  std::vector<std::size_t> opponent_sources;
  std::vector<SweepRow> rows;
};

/// Rows at `grid_size` uniform points of [0, T^N]; rows solve in parallel.
SweepTable sweep(const Game& game, std::size_t player, std::size_t grid_size,
                 const Tolerances& tol = {});

struct MonotonicityCheck {
  std::string property;
  bool passed = true;
  std::optional<std::size_t> first_violation;  // row index
};

struct MonotonicityReport {
  std::vector<MonotonicityCheck> checks;
  bool all_passed() const;
};

/// ξ1 and x1 non-increasing, y1 non-decreasing, and CS and every uʲ at least
/// their value in the last row (s = T^N), all up to `slack`.
MonotonicityReport verify_monotonicity(const SweepTable& table, double slack = 1e-9);

inline constexpr int kCsvSchemaVersion = 1;

/// CSV with a schema comment line and a fixed header. Arc 1 is the canonical
/// cheaper arc; `arc1_label` names it in the header.
void write_sweep_csv(std::ostream& os, const SweepTable& table,
                     const std::string& arc1_label = "arc1");

}  // namespace congestion
