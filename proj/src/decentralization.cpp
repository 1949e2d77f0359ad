#include "congestion/decentralization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "congestion/errors.hpp"
#include "congestion/numeric.hpp"
#include "congestion/oracle.hpp"

namespace congestion {

DecentralizationStrategy DecentralizationStrategy::trivial(double weight) {
  return {0.0, {weight}};
}

DecentralizationStrategy DecentralizationStrategy::fully_nonatomic(double weight) {
  return {weight, {}};
}

DecentralizationStrategy DecentralizationStrategy::single_atomic(double s, double weight) {
  if (!(s >= 0.0 && s <= weight)) {
    throw ValidationError("SA weight s must lie in [0, T^N]");
  }
  if (s == 0.0) return fully_nonatomic(weight);
  return {weight - s, {s}};
}

double DecentralizationStrategy::total() const {
  return std::accumulate(atomic.begin(), atomic.end(), nonatomic);
}

DecentralizationStrategy normalized(DecentralizationStrategy alpha, double weight) {
  if (!std::isfinite(alpha.nonatomic) || alpha.nonatomic < 0.0) {
    throw ValidationError("strategy nonatomic part must be finite and >= 0");
  }
  for (double a : alpha.atomic) {
    if (!std::isfinite(a) || !(a > 0.0)) {
      throw ValidationError("strategy atomic parts must be finite and > 0");
    }
  }
  std::sort(alpha.atomic.begin(), alpha.atomic.end(), std::greater<>());
  const double total = alpha.total();
  if (std::abs(total - weight) > 1e-12 * std::max(1.0, weight)) {
    std::ostringstream os;
    os.precision(15);
    os << "strategy parts sum to " << total << " but the player's weight is " << weight;
    throw ValidationError(os.str());
  }
  return alpha;
}

double decentralizer_weight(const PlayerProfile& players, std::size_t player) {
  return players.atomic()[players.position_of(player)].weight;
}

std::vector<double> opponent_weights(const PlayerProfile& players, std::size_t player) {
  const std::size_t pos = players.position_of(player);
  std::vector<double> out;
  for (std::size_t i = 0; i < players.size(); ++i) {
    if (i != pos) out.push_back(players.atomic()[i].weight);
  }
  return out;
}

PlayerProfile induced_game(const PlayerProfile& players, std::size_t player,
                           const DecentralizationStrategy& alpha) {
  const std::size_t pos = players.position_of(player);
  const auto a = normalized(alpha, players.atomic()[pos].weight);
  std::vector<AtomicPlayer> atomic;
  for (std::size_t i = 0; i < a.atomic.size(); ++i) {
    atomic.push_back({a.atomic[i], Role::Deputy, i});
  }
  for (std::size_t i = 0; i < players.size(); ++i) {
    if (i == pos) continue;
    atomic.push_back({players.atomic()[i].weight, Role::Opponent,
                      players.atomic()[i].source});
  }
  return PlayerProfile(players.nonatomic_mass() + a.nonatomic, std::move(atomic));
}

StrategyEvaluation evaluate_strategy(const Game& game, std::size_t player,
                                     const DecentralizationStrategy& alpha,
                                     const Tolerances& tol) {
  const auto a = normalized(alpha, decentralizer_weight(game.players, player));
  Game induced(game.network, induced_game(game.players, player, a));
  EquilibriumOutcome out = solve_ce_bisection(induced, tol);

  ArcFlow x;
  const auto& atomic = induced.players.atomic();
  for (std::size_t i = 0; i < atomic.size(); ++i) {
    if (atomic[i].role != Role::Deputy) continue;
    x.arc1 += out.atomic_flows[i].arc1;
    x.arc2 += out.atomic_flows[i].arc2;
  }
  const double pool = induced.players.nonatomic_mass();
  if (pool > 0.0 && a.nonatomic > 0.0) {
    const double share = a.nonatomic / pool;
    x.arc1 += share * out.nonatomic_flow.arc1;
    x.arc2 += share * out.nonatomic_flow.arc2;
  }
  const double cost = x.arc1 * out.cost1 + x.arc2 * out.cost2;
  return {std::move(out), induced.players, x, cost};
}

double strategy_cost(const Game& game, std::size_t player,
                     const DecentralizationStrategy& alpha, const Tolerances& tol) {
  return evaluate_strategy(game, player, alpha, tol).cost;
}

double strategy_cost(const Game& game, std::size_t player, SAStrategy s,
                     const Tolerances& tol) {
  const double w = decentralizer_weight(game.players, player);
  return strategy_cost(game, player, DecentralizationStrategy::single_atomic(s.s, w), tol);
}

SAStrategy sa_reduce(const Game& game, std::size_t player,
                     const DecentralizationStrategy& alpha, const Tolerances& tol) {
  const double w = decentralizer_weight(game.players, player);
  const auto a = normalized(alpha, w);
  const StrategyEvaluation ev = evaluate_strategy(game, player, a, tol);

  double s = 0.0;
  if (ev.outcome.mode && ev.outcome.mode->kind != Mode::Kind::Four) {
    const double h = aux_h(game.network, ev.outcome.xi1);
    if (h > 0.0) {
      // deputies heavier than h(η₁) are the ones splitting
      std::size_t k = 0;
      double top = 0.0;
      while (k < a.atomic.size() && a.atomic[k] > h) top += a.atomic[k++];
      if (k >= 1) s = top - static_cast<double>(k - 1) * h;
    }
  }
  s = std::clamp(s, 0.0, w);

  const double reduced = strategy_cost(game, player, SAStrategy{s}, tol);
  if (std::abs(reduced - ev.cost) > 1e-8 * std::max(1.0, std::abs(ev.cost))) {
    std::ostringstream os;
    os.precision(15);
    os << "SA reduction mismatch: U(alpha)=" << ev.cost << " but U(s=" << s
       << ")=" << reduced;
    throw ConsistencyError(os.str());
  }
  return {s};
}

int compute_l0(const CanonicalNetwork& net, const std::vector<double>& opponents,
               double tol) {
  const double m = net.total_mass();
  const double H = aux_h(net, m);
  const std::size_t n1 = opponents.size();
  double total = 0.0;
  for (double t : opponents) total += t;
  const auto xi_hat = net.xi_hat();
  const double f0 = xi_hat ? aux_F(net, 0, *xi_hat)
                           : std::numeric_limits<double>::quiet_NaN();

  const bool premise = n1 >= 1 && ((H > 0.0 && opponents[0] > H) ||
                                   (H <= 0.0 && xi_hat && total >= f0));
  if (!premise) {
    throw RegimeError("l0 is undefined: the fully nonatomic strategy's equilibrium "
                      "is not of mode 3 for these opponents");
  }

  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  double prefix = 0.0;
  for (std::size_t l = 1; l <= n1; ++l) {
    prefix += opponents[l - 1];
    const double eta = inverse_F(net, static_cast<int>(l), prefix, tol);
    const double h = aux_h(net, eta);
    // h(η) < T^l  ⇔  η > h⁻¹(T^l)
    double v = std::max(0.0, h - opponents[l - 1]);
    if (l < n1) v = std::max(v, opponents[l] - h);
    if (H <= 0.0) v = std::max(v, f0 - prefix);
    // strict inequalities: an exact tie does not validate
    if (h == opponents[l - 1] || (H <= 0.0 && prefix == f0)) v = std::max(v, tol);
    if (v < best_v) {
      best_v = v;
      best = static_cast<int>(l);
    }
  }
  if (best_v > 1e-9 * std::max(1.0, m)) {
    throw RegimeError("no l satisfies the mode-3 conditions (smallest violation " +
                      std::to_string(best_v) + ")");
  }
  return best;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Nonatomic:
      return "Nonatomic";
    case Regime::Trivial:
      return "Trivial";
    case Regime::Nontrivial:
      return "Nontrivial";
  }
  return "?";
}

CaseClassification classify_case(const Game& game, std::size_t player,
                                 const Tolerances& tol) {
  const auto& net = game.network;
  const double m = net.total_mass();
  const double tn = decentralizer_weight(game.players, player);
  const std::vector<double> opp = opponent_weights(game.players, player);
  const std::size_t n1 = opp.size();
  const double t1 = n1 ? opp[0] : 0.0;
  const double tsum = std::accumulate(opp.begin(), opp.end(), 0.0);

  CaseClassification c;
  c.H = aux_h(net, m);
  c.xi_hat = net.xi_hat();
  if (c.xi_hat) c.C1 = aux_F(net, 0, *c.xi_hat);

  const bool l0_premise = n1 >= 1 && ((c.H > 0.0 && t1 > c.H) ||
                                      (c.H <= 0.0 && c.C1 && tsum >= *c.C1));
  if (l0_premise) {
    try {
      const int l0 = compute_l0(net, opp, tol.root);
      c.l0 = l0;
      double prefix = 0.0;
      for (int l = 0; l < l0; ++l) {
        const double eta = inverse_h(net, opp[l], tol.root);
        c.breakpoints.push_back(aux_F(net, l + 1, eta) - prefix);
        prefix += opp[l];
      }
      // prefix is now T^{[l0]}
      c.C0 = aux_h(net, inverse_F(net, l0, prefix, tol.root));
      c.C2 = c.C0;
    } catch (const RegimeError&) {
      // boundary case; regime decided without l0
    }
  }

  const double H = c.H;
  const bool opp_small = n1 == 0 || t1 <= H;
  bool nonatomic = false;
  if (H > 0.0) {
    nonatomic = (tn <= H && opp_small) || (n1 >= 1 && t1 > H && c.C0 && tn <= *c.C0);
  } else if (c.C1) {
    nonatomic = (tn + tsum <= *c.C1) ||
                (n1 >= 1 && tsum > *c.C1 && c.C2 && tn <= *c.C2);
  }
  bool trivial = false;
  if (!nonatomic) {
    trivial = (H > 0.0 && tn > H && opp_small) ||
              (H <= 0.0 && n1 == 0 && c.C1 && tn > *c.C1);
  }
  c.regime = nonatomic ? Regime::Nonatomic
                       : (trivial ? Regime::Trivial : Regime::Nontrivial);
  return c;
}

namespace {

struct Best {
  double s = 0.0;
  double cost = std::numeric_limits<double>::infinity();

  // lower cost wins; near-equal costs go to the smaller s
  void offer(double s_new, double cost_new) {
    if (!std::isfinite(cost)) {
      s = s_new;
      cost = cost_new;
      return;
    }
    const double band = 1e-12 * std::max(1.0, std::abs(cost));
    if (cost_new < cost - band || (cost_new <= cost + band && s_new < s)) {
      s = s_new;
      cost = cost_new;
    }
  }
};

}  // namespace

OptimalStrategy optimal_strategy(const Game& game, std::size_t player,
                                 const OptimizerOptions& opts, const Tolerances& tol) {
  OptimalStrategy r;
  r.classification = classify_case(game, player, tol);
  const auto& c = r.classification;
  const double tn = decentralizer_weight(game.players, player);
  auto U = [&](double s) { return strategy_cost(game, player, SAStrategy{s}, tol); };

  if (c.regime == Regime::Nonatomic) {
    r.strategy = {0.0};
    r.cost = U(0.0);
  } else if (c.regime == Regime::Trivial) {
    r.strategy = {tn};
    r.cost = U(tn);
  } else {
    std::vector<double> cuts{0.0, tn};
    auto add = [&](double v) {
      if (v > 0.0 && v < tn) cuts.push_back(v);
    };
    if (c.C0) add(*c.C0);
    for (double b : c.breakpoints) add(b);
    if (c.H > 0.0) add(c.H);
    if (c.H <= 0.0 && c.C1) {
      const auto opp = opponent_weights(game.players, player);
      add(*c.C1 - std::accumulate(opp.begin(), opp.end(), 0.0));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return b - a <= 1e-12; }),
               cuts.end());

    Best best;
    const int n = std::max(3, opts.scan_points);
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
      const auto grid = numeric::uniform_grid(cuts[seg], cuts[seg + 1], n);
      std::vector<double> vals(grid.size());
      std::size_t j = 0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        vals[i] = U(grid[i]);
        best.offer(grid[i], vals[i]);
        if (vals[i] < vals[j]) j = i;
      }
      const double lo = grid[j == 0 ? 0 : j - 1];
      const double hi = grid[std::min(j + 1, grid.size() - 1)];
      const auto m = numeric::golden_section(U, lo, hi, opts.golden_tol);
      best.offer(m.argmin, m.value);
    }
    r.strategy = {best.s};
    r.cost = best.cost;
  }

  if (opts.cross_check) {
    const OracleMinimum o = grid_argmin_sa(game, player);
    r.oracle_cost = o.cost;
    if (std::abs(o.cost - r.cost) > opts.mismatch_tol) {
      std::ostringstream os;
      os.precision(15);
      os << "optimal strategy cost " << r.cost << " (s=" << r.strategy.s
         << ") disagrees with the grid oracle " << o.cost << " (s=" << o.argmin << ")";
      throw ConsistencyError(os.str());
    }
  }
  return r;
}

}  // namespace congestion
