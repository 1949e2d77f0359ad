#include "congestion/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "congestion/errors.hpp"
#include "congestion/numeric.hpp"

namespace congestion {

namespace {

void check_mass(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw ValidationError(std::string(what) + " must be a finite non-negative number");
  }
}

}  // namespace

PlayerProfile::PlayerProfile(double nonatomic_mass, std::vector<AtomicPlayer> atomic)
    : nonatomic_(nonatomic_mass), atomic_(std::move(atomic)) {
  check_mass(nonatomic_, "nonatomic mass");
  for (const auto& p : atomic_) {
    if (!std::isfinite(p.weight) || !(p.weight > 0.0)) {
      throw ValidationError("atomic weights must be positive and finite");
    }
  }
  std::stable_sort(atomic_.begin(), atomic_.end(),
                   [](const AtomicPlayer& a, const AtomicPlayer& b) {
                     return a.weight > b.weight;
                   });
  if (!(total_mass() > 0.0)) throw ValidationError("total mass must be positive");
}

PlayerProfile PlayerProfile::from_weights(double nonatomic_mass,
                                          const std::vector<double>& weights) {
  std::vector<AtomicPlayer> atomic;
  atomic.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    atomic.push_back({weights[i], Role::Deputy, i});
  }
  return PlayerProfile(nonatomic_mass, std::move(atomic));
}

double PlayerProfile::atomic_mass() const {
  double s = 0.0;
  for (const auto& p : atomic_) s += p.weight;
  return s;
}

double PlayerProfile::total_mass() const { return nonatomic_ + atomic_mass(); }

std::size_t PlayerProfile::position_of(std::size_t source, Role role) const {
  for (std::size_t i = 0; i < atomic_.size(); ++i) {
    if (atomic_[i].source == source && atomic_[i].role == role) return i;
  }
  throw ValidationError("no atomic player with index " + std::to_string(source));
}

std::string to_string(const Mode& mode) {
  switch (mode.kind) {
    case Mode::Kind::One:
      return "1";
    case Mode::Kind::Two:
      return "2(k=" + std::to_string(mode.k) + ",l=" + std::to_string(mode.l) + ")";
    case Mode::Kind::Three:
      return "3(l=" + std::to_string(mode.l) + ")";
    case Mode::Kind::Four:
      return "4";
  }
  return "?";
}

Game::Game(CanonicalNetwork net, PlayerProfile profile)
    : network(std::move(net)), players(std::move(profile)) {
  const double m = network.total_mass();
  const double t = players.total_mass();
  if (std::abs(m - t) > 1e-12 * std::max(1.0, m)) {
    std::ostringstream os;
    os.precision(15);
    os << "player weights sum to " << t << " but the network carries M=" << m;
    throw ValidationError(os.str());
  }
}

EquilibriumOutcome assemble_outcome(const ArcCost& arc1, const ArcCost& arc2,
                                    const PlayerProfile& players,
                                    const std::vector<double>& atomic_arc1,
                                    double nonatomic_arc1) {
  const auto& atomic = players.atomic();
  EquilibriumOutcome out;
  out.atomic_flows.resize(atomic.size());
  double xi1 = 0.0, xi2 = 0.0;
  for (std::size_t i = 0; i < atomic.size(); ++i) {
    const double w = atomic[i].weight;
    const double x = std::clamp(atomic_arc1[i], 0.0, w);
    out.atomic_flows[i] = {x, w - x};
    xi1 += x;
    xi2 += w - x;
  }
  const double t0 = players.nonatomic_mass();
  const double n1 = std::clamp(nonatomic_arc1, 0.0, t0);
  out.nonatomic_flow = {n1, t0 - n1};
  xi1 += n1;
  xi2 += t0 - n1;
  out.xi1 = xi1;
  out.xi2 = xi2;
  out.cost1 = arc1.value(xi1);
  out.cost2 = arc2.value(xi2);
  out.atomic_costs.resize(atomic.size());
  for (std::size_t i = 0; i < atomic.size(); ++i) {
    out.atomic_costs[i] =
        out.atomic_flows[i].arc1 * out.cost1 + out.atomic_flows[i].arc2 * out.cost2;
  }
  out.nonatomic_cost = std::min(out.cost1, out.cost2);
  out.social_cost = xi1 * out.cost1 + xi2 * out.cost2;
  return out;
}

EquilibriumOutcome solve_two_arc_bisection(const ArcCost& arc1, const ArcCost& arc2,
                                           const PlayerProfile& players,
                                           double root_tol) {
  const double m = players.total_mass();
  const double t0 = players.nonatomic_mass();
  const auto& atomic = players.atomic();

  // Atomic best response to aggregate ξ1 = t, written through h and a local
  // to this arc pair: y = clamp((T a + h) / (1 + a), 0, T).
  auto response = [&](double w, double h, double a) {
    return std::clamp((w * a + h) / (1.0 + a), 0.0, w);
  };
  auto excess = [&](double t) {
    const double d1 = arc1.marginal(t);
    const double h = (arc2.value(m - t) - arc1.value(t)) / d1;
    const double a = arc2.marginal(m - t) / d1;
    double s = 0.0;
    for (const auto& p : atomic) s += response(p.weight, h, a);
    return s - t;
  };
  auto gap = [&](double t) { return arc2.value(m - t) - arc1.value(t); };
  // Corner solutions: the residual can land a few ulps on the wrong side of
  // zero at an endpoint when every player sits on one arc.
  auto root = [&](auto f, double lo, double hi) {
    if (f(hi) >= 0.0) return hi;
    if (f(lo) <= 0.0) return lo;
    return numeric::root_of_decreasing(f, lo, hi, root_tol);
  };

  double xi1 = 0.0;
  double nonatomic1 = 0.0;
  if (t0 == 0.0 || gap(0.0) < 0.0) {
    // arc 2 strictly cheaper for every split: the nonatomic mass stays off arc 1
    xi1 = root(excess, 0.0, m);
  } else if (gap(m) > 0.0) {
    nonatomic1 = t0;
    xi1 = root([&](double t) { return excess(t) + t0; }, 0.0, m);
  } else {
    const double xi_hat = numeric::root_of_decreasing(gap, 0.0, m, root_tol);
    const double v = excess(xi_hat);
    if (v + t0 < 0.0) {
      nonatomic1 = t0;
      xi1 = root([&](double t) { return excess(t) + t0; }, 0.0, xi_hat);
    } else if (v > 0.0) {
      xi1 = root(excess, xi_hat, m);
    } else {
      xi1 = xi_hat;
      nonatomic1 = -v;
    }
  }

  const double d1 = arc1.marginal(xi1);
  const double h = (arc2.value(m - xi1) - arc1.value(xi1)) / d1;
  const double a = arc2.marginal(m - xi1) / d1;
  std::vector<double> x(atomic.size());
  for (std::size_t i = 0; i < atomic.size(); ++i) x[i] = response(atomic[i].weight, h, a);
  return assemble_outcome(arc1, arc2, players, x, nonatomic1);
}

EquilibriumOutcome solve_ce_bisection(const Game& game, const Tolerances& tol) {
  const auto& net = game.network;
  EquilibriumOutcome out =
      solve_two_arc_bisection(net.arc1(), net.arc2(), game.players, tol.root);
  out.mode = classify_mode(game.players, out, tol);
  return out;
}

namespace {

struct Candidate {
  double violation = 0.0;
  Mode mode;
  std::vector<double> atomic_arc1;
  double nonatomic_arc1 = 0.0;
};

}  // namespace

EquilibriumOutcome solve_ce_modal(const Game& game, const Tolerances& tol) {
  const auto& net = game.network;
  const auto& atomic = game.players.atomic();
  const double m = net.total_mass();
  const double t0 = game.players.nonatomic_mass();
  const std::size_t n = atomic.size();
  const double slack = tol.mode_slack * std::max(1.0, m);

  std::vector<Candidate> candidates;

  // Mode 4: nobody can push the aggregate off the crossing point.
  if (auto xi_hat = net.xi_hat()) {
    const double a = aux_a(net, *xi_hat);
    const double f0 = aux_F(net, 0, *xi_hat);
    const double w_all = game.players.atomic_mass();
    Candidate c;
    c.mode = {Mode::Kind::Four, 0, 0};
    c.atomic_arc1.resize(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      c.atomic_arc1[i] = a * atomic[i].weight / (1.0 + a);
      s += c.atomic_arc1[i];
    }
    c.nonatomic_arc1 = *xi_hat - s;
    c.violation = std::max({0.0, w_all - f0, -c.nonatomic_arc1, c.nonatomic_arc1 - t0});
    candidates.push_back(std::move(c));
  }

  // Modes 1–3: the heaviest p atomic players split, everyone else is on arc 1.
  double w_prefix = 0.0;
  for (std::size_t p = 0; p <= n; ++p) {
    if (p > 0) w_prefix += atomic[p - 1].weight;
    if (p > 0 && p < n && atomic[p - 1].weight == atomic[p].weight) continue;

    Candidate c;
    const double xi1 = p == 0 ? m : inverse_F(net, static_cast<int>(p), w_prefix, tol.root);
    const double hx = aux_h(net, xi1);
    double v = std::max({0.0, -xi1, xi1 - m});
    v = std::max(v, -hx);
    if (p > 0) v = std::max(v, hx - atomic[p - 1].weight);
    if (p < n) v = std::max(v, atomic[p].weight - hx);
    // Mode 1 needs c1(M) < c2(0) strictly.
    if (p == 0 && !(hx > 0.0)) v = std::max(v, slack * 2.0 + std::abs(hx));
    c.violation = v;

    const double a = aux_a(net, xi1);
    c.atomic_arc1.resize(n);
    int k = 0, l = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < p) {
        c.atomic_arc1[i] = (atomic[i].weight * a + hx) / (1.0 + a);
        (atomic[i].role == Role::Deputy ? k : l) += 1;
      } else {
        c.atomic_arc1[i] = atomic[i].weight;
      }
    }
    c.nonatomic_arc1 = t0;
    if (p == 0) {
      c.mode = {Mode::Kind::One, 0, 0};
    } else if (k >= 1) {
      c.mode = {Mode::Kind::Two, k, l};
    } else {
      c.mode = {Mode::Kind::Three, 0, l};
    }
    candidates.push_back(std::move(c));
  }

  // Mode 4 first, otherwise the least-violating prefix.
  const Candidate* best = nullptr;
  for (const auto& c : candidates) {
    if (c.mode.kind == Mode::Kind::Four && c.violation <= slack) {
      best = &c;
      break;
    }
    if (!best || c.violation < best->violation) best = &c;
  }
  if (!best || best->violation > slack) {
    std::ostringstream os;
    os << "no equilibrium mode validates (smallest violation "
       << (best ? best->violation : 0.0) << ")";
    throw ConsistencyError(os.str());
  }
  EquilibriumOutcome out = assemble_outcome(net.arc1(), net.arc2(), game.players,
                                            best->atomic_arc1, best->nonatomic_arc1);
  out.mode = best->mode;
  return out;
}

Mode classify_mode(const PlayerProfile& players, const EquilibriumOutcome& outcome,
                   const Tolerances& tol) {
  const double gap = outcome.cost2 - outcome.cost1;
  const double scale = std::max(1.0, std::abs(outcome.cost1));
  if (std::abs(gap) <= tol.cost_gap * scale) return {Mode::Kind::Four, 0, 0};
  if (gap < 0.0) {
    throw ConsistencyError("equilibrium has arc 1 costlier than arc 2; "
                           "network is not canonical for this profile");
  }
  if (outcome.nonatomic_flow.arc2 > tol.zero_flow) {
    throw ConsistencyError("nonatomic flow on the costlier arc");
  }
  const auto& atomic = players.atomic();
  int k = 0, l = 0;
  for (std::size_t i = 0; i < atomic.size(); ++i) {
    const auto& f = outcome.atomic_flows[i];
    if (f.arc2 <= tol.zero_flow) continue;
    if (f.arc1 <= tol.zero_flow) {
      throw ConsistencyError("atomic player " + std::to_string(i) +
                             " uses only the costlier arc");
    }
    (atomic[i].role == Role::Deputy ? k : l) += 1;
  }
  if (k == 0 && l == 0) return {Mode::Kind::One, 0, 0};
  if (k >= 1) return {Mode::Kind::Two, k, l};
  return {Mode::Kind::Three, 0, l};
}

double player_cost(const EquilibriumOutcome& outcome, std::size_t i) {
  if (i >= outcome.atomic_costs.size()) {
    throw ValidationError("atomic player index out of range");
  }
  return outcome.atomic_costs[i];
}

double social_cost(const EquilibriumOutcome& outcome) { return outcome.social_cost; }

EquilibriumCheck check_equilibrium(const ArcCost& arc1, const ArcCost& arc2,
                                   const PlayerProfile& players,
                                   const EquilibriumOutcome& outcome,
                                   double zero_flow) {
  EquilibriumCheck chk;
  const auto& atomic = players.atomic();
  double s1 = outcome.nonatomic_flow.arc1, s2 = outcome.nonatomic_flow.arc2;
  auto feas = [&](double v) { chk.feasibility = std::max(chk.feasibility, v); };
  feas(std::abs(s1 + s2 - players.nonatomic_mass()));
  feas(std::max(-s1, -s2));
  for (std::size_t i = 0; i < atomic.size(); ++i) {
    const auto& f = outcome.atomic_flows[i];
    feas(std::abs(f.arc1 + f.arc2 - atomic[i].weight));
    feas(std::max(-f.arc1, -f.arc2));
    s1 += f.arc1;
    s2 += f.arc2;
  }
  feas(std::abs(s1 - outcome.xi1));
  feas(std::abs(s2 - outcome.xi2));

  const double c1 = arc1.value(outcome.xi1), c2 = arc2.value(outcome.xi2);
  const double d1 = arc1.marginal(outcome.xi1), d2 = arc2.marginal(outcome.xi2);
  for (std::size_t i = 0; i < atomic.size(); ++i) {
    const auto& f = outcome.atomic_flows[i];
    // marginal cost of moving one unit of this player's flow from arc 2 to arc 1
    const double g = (c1 + f.arc1 * d1) - (c2 + f.arc2 * d2);
    double r = 0.0;
    if (f.arc1 > zero_flow && f.arc2 > zero_flow) {
      r = std::abs(g);
    } else if (f.arc1 > zero_flow) {
      r = std::max(0.0, g);
    } else if (f.arc2 > zero_flow) {
      r = std::max(0.0, -g);
    }
    chk.atomic_residual = std::max(chk.atomic_residual, r);
  }
  if (outcome.nonatomic_flow.arc1 > zero_flow) {
    chk.nonatomic_residual = std::max(chk.nonatomic_residual, c1 - c2);
  }
  if (outcome.nonatomic_flow.arc2 > zero_flow) {
    chk.nonatomic_residual = std::max(chk.nonatomic_residual, c2 - c1);
  }
  return chk;
}

}  // namespace congestion
