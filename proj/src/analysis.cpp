#include "congestion/analysis.hpp"

#include <algorithm>
#include <iomanip>

#include "congestion/errors.hpp"
#include "congestion/numeric.hpp"

namespace congestion {

namespace {

std::vector<std::size_t> opponent_sources(const PlayerProfile& players, std::size_t player) {
  std::vector<std::size_t> out;
  for (const auto& p : players.atomic()) {
    if (p.source != player) out.push_back(p.source);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> opponent_costs(const StrategyEvaluation& ev,
                                   const std::vector<std::size_t>& sources) {
  std::vector<double> out;
  out.reserve(sources.size());
  for (std::size_t j : sources) {
    out.push_back(ev.outcome.atomic_costs[ev.profile.position_of(j, Role::Opponent)]);
  }
  return out;
}

}  // namespace

ImpactReport impact_report(const Game& game, std::size_t player,
                           const DecentralizationStrategy& alpha, const Tolerances& tol) {
  const double w = decentralizer_weight(game.players, player);
  const auto base = evaluate_strategy(game, player, DecentralizationStrategy::trivial(w), tol);
  const auto treated = evaluate_strategy(game, player, alpha, tol);

  ImpactReport r;
  r.baseline = base.outcome;
  r.treated = treated.outcome;
  r.baseline_cost = base.cost;
  r.treated_cost = treated.cost;
  r.delta_social = treated.outcome.social_cost - base.outcome.social_cost;
  r.opponent_sources = opponent_sources(game.players, player);
  const auto before = opponent_costs(base, r.opponent_sources);
  const auto after = opponent_costs(treated, r.opponent_sources);
  for (std::size_t i = 0; i < before.size(); ++i) {
    r.delta_opponent_costs.push_back(after[i] - before[i]);
  }
  r.regime = classify_case(game, player, tol);
  return r;
}

SweepTable sweep(const Game& game, std::size_t player, std::size_t grid_size,
                 const Tolerances& tol) {
  if (grid_size < 2) throw ValidationError("sweep grid needs at least 2 points");
  const double w = decentralizer_weight(game.players, player);
  const auto grid = numeric::uniform_grid(0.0, w, grid_size);
  SweepTable table;
  table.opponent_sources = opponent_sources(game.players, player);
  table.rows = numeric::parallel_map<SweepRow>(grid_size, [&](std::size_t i) {
    const auto ev = evaluate_strategy(
        game, player, DecentralizationStrategy::single_atomic(grid[i], w), tol);
    SweepRow row;
    row.s = grid[i];
    row.xi1 = ev.outcome.xi1;
    row.x1 = ev.deputy_flow.arc1;
    row.y1 = ev.outcome.xi1 - ev.deputy_flow.arc1;
    row.U = ev.cost;
    row.CS = ev.outcome.social_cost;
    row.u0 = ev.outcome.nonatomic_cost;
    row.opponent_costs = opponent_costs(ev, table.opponent_sources);
    return row;
  });
  return table;
}

bool MonotonicityReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const MonotonicityCheck& c) { return c.passed; });
}

MonotonicityReport verify_monotonicity(const SweepTable& table, double slack) {
  MonotonicityReport rep;
  const auto& rows = table.rows;
  auto pairwise = [&](const std::string& name, auto field, int direction) {
    MonotonicityCheck c{name, true, std::nullopt};
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double step = field(rows[i]) - field(rows[i - 1]);
      if (direction * step < -slack) {
        c.passed = false;
        c.first_violation = i;
        break;
      }
    }
    rep.checks.push_back(c);
  };
  pairwise("xi1 non-increasing", [](const SweepRow& r) { return r.xi1; }, -1);
  pairwise("x1 non-increasing", [](const SweepRow& r) { return r.x1; }, -1);
  pairwise("y1 non-decreasing", [](const SweepRow& r) { return r.y1; }, +1);

  auto floor_check = [&](const std::string& name, auto field) {
    MonotonicityCheck c{name, true, std::nullopt};
    if (!rows.empty()) {
      const double ref = field(rows.back());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (field(rows[i]) < ref - slack) {
          c.passed = false;
          c.first_violation = i;
          break;
        }
      }
    }
    rep.checks.push_back(c);
  };
  floor_check("CS >= CS(trivial)", [](const SweepRow& r) { return r.CS; });
  for (std::size_t j = 0; j < table.opponent_sources.size(); ++j) {
    floor_check("u" + std::to_string(table.opponent_sources[j] + 1) + " >= u(trivial)",
                [j](const SweepRow& r) { return r.opponent_costs[j]; });
  }
  return rep;
}

void write_sweep_csv(std::ostream& os, const SweepTable& table,
                     const std::string& arc1_label) {
  os << "# schema_version: " << kCsvSchemaVersion << "\n";
  os << "s,xi1[" << arc1_label << "],x1[" << arc1_label << "],y1[" << arc1_label
     << "],U,CS,u0";
  for (std::size_t j : table.opponent_sources) os << ",u" << (j + 1);
  os << "\n";
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(12);
  for (const auto& r : table.rows) {
    os << r.s << ',' << r.xi1 << ',' << r.x1 << ',' << r.y1 << ',' << r.U << ',' << r.CS
       << ',' << r.u0;
    for (double u : r.opponent_costs) os << ',' << u;
    os << "\n";
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace congestion
