#include "congestion/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "congestion/decentralization.hpp"
#include "congestion/errors.hpp"
#include "congestion/numeric.hpp"

namespace congestion {

void OracleConfig::validate() const {
  if (!(grid_resolution > 0.0 && grid_resolution <= 1.0)) {
    throw ValidationError("oracle grid_resolution must lie in (0, 1]");
  }
  if (!(br_damping > 0.0 && br_damping <= 1.0)) {
    throw ValidationError("oracle br_damping must lie in (0, 1]");
  }
  if (max_iterations <= 0) throw ValidationError("oracle max_iterations must be > 0");
  if (!(tolerance > 0.0 && tolerance <= 1e-7)) {
    throw ValidationError("oracle tolerance must lie in (0, 1e-7]");
  }
}

namespace {

struct Loads {
  double c1, c2, d1, d2;
};

Loads loads(const ArcCost& arc1, const ArcCost& arc2, double xi, double m) {
  const double xi2 = std::max(0.0, m - xi);
  return {arc1.value(xi), arc2.value(xi2), arc1.marginal(xi), arc2.marginal(xi2)};
}

// Player j's best arc-1 flow when the loads are held at L: equalize
// c1 + y c1' with c2 + (T − y) c2'.
double best_response(double w, const Loads& L) {
  const double y = (L.c2 - L.c1 + w * L.d2) / (L.d1 + L.d2);
  return std::min(std::max(y, 0.0), w);
}

struct Response {
  double atomic = 0.0;  // Σ atomic responses
  double lo = 0.0;      // nonatomic response interval
  double hi = 0.0;
};

Response respond(const ArcCost& arc1, const ArcCost& arc2, const PlayerProfile& p,
                 double xi, double m, double tie) {
  const Loads L = loads(arc1, arc2, xi, m);
  Response r;
  for (const auto& a : p.atomic()) r.atomic += best_response(a.weight, L);
  const double t0 = p.nonatomic_mass();
  const double gap = L.c1 - L.c2;
  if (gap < -tie) {
    r.lo = r.hi = t0;
  } else if (gap > tie) {
    r.lo = r.hi = 0.0;
  } else {
    r.lo = 0.0;
    r.hi = t0;
  }
  return r;
}

double residual(const Response& r, double xi) {
  const double lo = r.atomic + r.lo;
  const double hi = r.atomic + r.hi;
  if (xi < lo) return lo - xi;
  if (xi > hi) return hi - xi;
  return 0.0;
}

}  // namespace

EquilibriumOutcome best_response_iteration_ce(const ArcCost& arc1, const ArcCost& arc2,
                                              const PlayerProfile& players, double start,
                                              const OracleConfig& cfg) {
  cfg.validate();
  const double m = players.total_mass();
  if (!(start >= 0.0 && start <= m)) {
    throw ValidationError("oracle start point must lie in [0, M]");
  }
  const double tie = cfg.tolerance;
  double xi = start;
  double lambda = cfg.br_damping;
  double prev = 0.0;
  int same_sign = 0;
  bool converged = false;
  bool at_jump = false;
  // The residual is decreasing in xi, so every evaluation narrows a bracket
  // around the fixed point. Damped steps that leave it fall back to the
  // midpoint; without this the iteration can cycle at the nonatomic jump.
  double lo = 0.0, hi = m;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const double r = residual(respond(arc1, arc2, players, xi, m, tie), xi);
    if (std::abs(r) < cfg.tolerance) {
      converged = true;
      break;
    }
    if (r > 0.0) lo = std::max(lo, xi);
    else hi = std::min(hi, xi);
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, m)) {
      converged = at_jump = true;  // pinned between two doubles
      break;
    }
    if (prev != 0.0 && (r > 0.0) != (prev > 0.0)) {
      lambda *= 0.5;
      same_sign = 0;
    } else if (++same_sign >= 3) {
      lambda = std::min(cfg.br_damping, 2.0 * lambda);
      same_sign = 0;
    }
    prev = r;
    double next = xi + lambda * r;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    xi = next;
  }
  if (!converged) {
    std::ostringstream os;
    os << "best-response iteration did not converge in " << cfg.max_iterations
       << " iterations (xi1=" << xi << ")";
    throw ConvergenceError(os.str());
  }

  // flows at the fixed point
  const Loads L = loads(arc1, arc2, xi, m);
  const auto& atomic = players.atomic();
  EquilibriumOutcome out;
  out.atomic_flows.resize(atomic.size());
  double s1 = 0.0;
  for (std::size_t i = 0; i < atomic.size(); ++i) {
    const double y = best_response(atomic[i].weight, L);
    out.atomic_flows[i] = {y, atomic[i].weight - y};
    s1 += y;
  }
  const double t0 = players.nonatomic_mass();
  double n1 = 0.0;
  if (at_jump) {
    n1 = std::clamp(xi - s1, 0.0, t0);
  } else if (L.c1 - L.c2 < -tie) {
    n1 = t0;
  } else if (L.c1 - L.c2 <= tie) {
    n1 = std::clamp(xi - s1, 0.0, t0);
  }
  out.nonatomic_flow = {n1, t0 - n1};
  out.xi1 = s1 + n1;
  out.xi2 = out.nonatomic_flow.arc2;
  for (const auto& f : out.atomic_flows) out.xi2 += f.arc2;
  out.cost1 = arc1.value(out.xi1);
  out.cost2 = arc2.value(out.xi2);
  for (const auto& f : out.atomic_flows) {
    out.atomic_costs.push_back(f.arc1 * out.cost1 + f.arc2 * out.cost2);
  }
  out.nonatomic_cost = std::min(out.cost1, out.cost2);
  out.social_cost = out.xi1 * out.cost1 + out.xi2 * out.cost2;
  return out;
}

EquilibriumOutcome best_response_iteration_ce(const Game& game, double start,
                                              const OracleConfig& cfg) {
  return best_response_iteration_ce(game.network.arc1(), game.network.arc2(),
                                    game.players, start, cfg);
}

double oracle_sa_cost(const Game& game, std::size_t player, double s,
                      const OracleConfig& cfg) {
  const double w = decentralizer_weight(game.players, player);
  const auto alpha = DecentralizationStrategy::single_atomic(std::clamp(s, 0.0, w), w);
  const PlayerProfile p = induced_game(game.players, player, alpha);
  const auto& net = game.network;
  const auto z = best_response_iteration_ce(net.arc1(), net.arc2(), p,
                                            0.5 * net.total_mass(), cfg);
  double x1 = 0.0, x2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.atomic()[i].role != Role::Deputy) continue;
    x1 += z.atomic_flows[i].arc1;
    x2 += z.atomic_flows[i].arc2;
  }
  if (alpha.nonatomic > 0.0) {
    const double share = alpha.nonatomic / p.nonatomic_mass();
    x1 += share * z.nonatomic_flow.arc1;
    x2 += share * z.nonatomic_flow.arc2;
  }
  return x1 * z.cost1 + x2 * z.cost2;
}

double oracle_leader_cost(const Game& game, std::size_t leader, double x1,
                          const OracleConfig& cfg) {
  const auto& net = game.network;
  const double w = decentralizer_weight(game.players, leader);
  x1 = std::clamp(x1, 0.0, w);
  const double x2 = w - x1;
  std::vector<double> opp = opponent_weights(game.players, leader);
  const double t0 = game.players.nonatomic_mass();
  if (opp.empty() && t0 == 0.0) {
    return x1 * net.arc1().value(x1) + x2 * net.arc2().value(x2);
  }
  const PlayerProfile followers = PlayerProfile::from_weights(t0, opp);
  const auto z = best_response_iteration_ce(net.arc1().shifted(x1), net.arc2().shifted(x2),
                                            followers, 0.5 * followers.total_mass(), cfg);
  return x1 * net.arc1().value(x1 + z.xi1) + x2 * net.arc2().value(x2 + z.xi2);
}

namespace {

template <class F>
OracleMinimum scan_and_refine(F&& f, double hi, const OracleConfig& cfg) {
  cfg.validate();
  const std::size_t n =
      static_cast<std::size_t>(std::ceil(1.0 / cfg.grid_resolution)) + 1;
  const auto grid = numeric::uniform_grid(0.0, hi, n);
  const auto vals = numeric::parallel_map<double>(n, [&](std::size_t i) { return f(grid[i]); });

  OracleMinimum best{grid[0], vals[0]};
  auto offer = [&](double x, double v) {
    const double band = 1e-12 * std::max(1.0, std::abs(best.cost));
    if (v < best.cost - band || (v <= best.cost + band && x < best.argmin)) best = {x, v};
  };
  std::size_t j = 0;
  for (std::size_t i = 1; i < n; ++i) {
    offer(grid[i], vals[i]);
    if (vals[i] < vals[j]) j = i;
  }
  const double lo = grid[j == 0 ? 0 : j - 1];
  const double up = grid[std::min(j + 1, n - 1)];
  const auto m = numeric::golden_section(f, lo, up, 1e-3 * (up - lo) + 1e-14);
  offer(m.argmin, m.value);
  return best;
}

}  // namespace

OracleMinimum grid_argmin_sa(const Game& game, std::size_t player, const OracleConfig& cfg) {
  const double w = decentralizer_weight(game.players, player);
  return scan_and_refine([&](double s) { return oracle_sa_cost(game, player, s, cfg); }, w,
                         cfg);
}

OracleMinimum numeric_leader_argmin(const Game& game, std::size_t leader,
                                    const OracleConfig& cfg) {
  const double w = decentralizer_weight(game.players, leader);
  return scan_and_refine(
      [&](double x1) { return oracle_leader_cost(game, leader, x1, cfg); }, w, cfg);
}

}  // namespace congestion
