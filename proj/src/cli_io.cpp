#include "congestion/cli_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "congestion/analysis.hpp"
#include "congestion/errors.hpp"
#include "congestion/stackelberg.hpp"

namespace congestion {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset → line:column
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    throw ValidationError("syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + what);
  }
}

[[noreturn]] void field_error(const std::string& pointer, const std::string& msg) {
  throw ValidationError("field " + (pointer.empty() ? std::string("/") : pointer) + ": " +
                        msg);
}

void only_keys(const json& obj, const std::string& pointer,
               std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) field_error(pointer, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) field_error(pointer + "/" + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& pointer, const char* key) {
  if (!obj.contains(key)) field_error(pointer + "/" + key, "missing");
  return obj.at(key);
}

double number(const json& v, const std::string& pointer) {
  if (!v.is_number()) field_error(pointer, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) field_error(pointer, "expected a finite number");
  return d;
}

std::vector<double> numbers(const json& v, const std::string& pointer) {
  if (!v.is_array()) field_error(pointer, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], pointer + "/" + std::to_string(i)));
  }
  return out;
}

// Parses one arc; polynomial arcs get their domain bound later.
struct ArcSpec {
  std::string label;
  std::optional<std::vector<double>> coefficients;
  std::optional<ArcCost> table;
};

ArcSpec parse_arc(const json& a, const std::string& ptr) {
  only_keys(a, ptr, {"label", "coefficients", "table"});
  ArcSpec spec;
  const json& label = require(a, ptr, "label");
  if (!label.is_string() || label.get<std::string>().empty()) {
    field_error(ptr + "/label", "expected a non-empty string");
  }
  spec.label = label.get<std::string>();
  const bool has_poly = a.contains("coefficients"), has_table = a.contains("table");
  if (has_poly == has_table) {
    field_error(ptr, "give exactly one of 'coefficients' or 'table'");
  }
  if (has_poly) {
    spec.coefficients = numbers(a.at("coefficients"), ptr + "/coefficients");
    if (spec.coefficients->empty()) field_error(ptr + "/coefficients", "empty");
  } else {
    const std::string tp = ptr + "/table";
    const json& t = a.at("table");
    only_keys(t, tp, {"knots", "marginals", "value_at_zero"});
    auto knots = numbers(require(t, tp, "knots"), tp + "/knots");
    auto margs = numbers(require(t, tp, "marginals"), tp + "/marginals");
    const double v0 = number(require(t, tp, "value_at_zero"), tp + "/value_at_zero");
    try {
      spec.table = ArcCost::tabulated(std::move(knots), std::move(margs), v0);
    } catch (const ValidationError& e) {
      field_error(tp, e.what());
    }
  }
  return spec;
}

int user_to_canonical(const GameInstance& g, int user_arc) {
  return g.network.swapped() ? 2 - user_arc : user_arc + 1;
}

// {label_user0: v, label_user1: v} from canonical values
Report by_label(const GameInstance& g, double canon1, double canon2) {
  Report r = Report::object();
  for (int u = 0; u < 2; ++u) {
    r[g.labels[u]] = round12(user_to_canonical(g, u) == 1 ? canon1 : canon2);
  }
  return r;
}

std::pair<double, double> from_label(const GameInstance& g, const Report& r,
                                     const std::string& ptr) {
  double canon[2] = {0.0, 0.0};
  for (int u = 0; u < 2; ++u) {
    if (!r.contains(g.labels[u])) field_error(ptr + "/" + g.labels[u], "missing");
    canon[user_to_canonical(g, u) - 1] = r.at(g.labels[u]).get<double>();
  }
  return {canon[0], canon[1]};
}

Report header(const std::string& command) {
  Report r;
  r["schema_version"] = kReportSchemaVersion;
  r["command"] = command;
  r["status"] = "ok";
  return r;
}

Report optional_number(const std::optional<double>& v) {
  return v ? Report(round12(*v)) : Report(nullptr);
}

Report players_block(const GameInstance& g, const PlayerProfile& p,
                     const EquilibriumOutcome& z, Role role) {
  Report arr = Report::array();
  for (std::size_t i = 0; i < g.players.size(); ++i) {
    std::size_t pos;
    try {
      pos = p.position_of(i, role);
    } catch (const ValidationError&) {
      continue;
    }
    Report e;
    e["player"] = i + 1;
    e["weight"] = round12(p.atomic()[pos].weight);
    e["flow"] = by_label(g, z.atomic_flows[pos].arc1, z.atomic_flows[pos].arc2);
    e["cost"] = round12(z.atomic_costs[pos]);
    arr.push_back(std::move(e));
  }
  return arr;
}

std::size_t player_source(const GameInstance& g, const CommandRequest& req) {
  if (!req.player) throw ValidationError("--player is required for " + req.command);
  const std::size_t n = g.players.size();
  if (*req.player < 1 || *req.player > n) {
    throw ValidationError("--player must be between 1 and " + std::to_string(n));
  }
  return *req.player - 1;
}

Report classification_block(const CaseClassification& c) {
  Report r;
  r["regime"] = to_string(c.regime);
  r["H"] = round12(c.H);
  r["xi_hat"] = optional_number(c.xi_hat);
  r["l0"] = c.l0 ? Report(*c.l0) : Report(nullptr);
  r["C0"] = optional_number(c.C0);
  r["C1"] = optional_number(c.C1);
  r["C2"] = optional_number(c.C2);
  Report b = Report::array();
  for (double v : c.breakpoints) b.push_back(round12(v));
  r["breakpoints"] = b;
  return r;
}

}  // namespace

double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

const std::string& GameInstance::canonical_label(int arc) const {
  const int user = network.swapped() ? 2 - arc : arc - 1;
  return labels[user];
}

GameInstance parse_game(const std::string& text) {
  const json doc = parse_json(text);
  only_keys(doc, "", {"schema_version", "arcs", "players", "options"});
  if (doc.contains("schema_version")) {
    const json& v = doc.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != 1) {
      field_error("/schema_version", "unsupported version (expected 1)");
    }
  }
  const json& arcs = require(doc, "", "arcs");
  if (!arcs.is_array() || arcs.size() != 2) field_error("/arcs", "expected exactly two arcs");
  ArcSpec a = parse_arc(arcs[0], "/arcs/0");
  ArcSpec b = parse_arc(arcs[1], "/arcs/1");
  if (a.label == b.label) field_error("/arcs/1/label", "arc labels must differ");

  const json& pl = require(doc, "", "players");
  only_keys(pl, "/players", {"nonatomic", "atomic"});
  const double t0 = pl.contains("nonatomic") ? number(pl.at("nonatomic"), "/players/nonatomic")
                                             : 0.0;
  if (t0 < 0.0) field_error("/players/nonatomic", "must be >= 0");
  const std::vector<double> weights =
      pl.contains("atomic") ? numbers(pl.at("atomic"), "/players/atomic")
                            : std::vector<double>{};
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) {
      field_error("/players/atomic/" + std::to_string(i), "atomic weights must be > 0");
    }
  }
  double m = t0;
  for (double w : weights) m += w;
  if (!(m > 0.0)) field_error("/players", "total mass must be positive");

  std::optional<double> tolerance, bound;
  std::optional<std::size_t> grid;
  if (doc.contains("options")) {
    const json& o = doc.at("options");
    only_keys(o, "/options", {"tolerance", "sweep_grid", "domain_bound"});
    if (o.contains("tolerance")) {
      tolerance = number(o.at("tolerance"), "/options/tolerance");
      if (!(*tolerance > 0.0 && *tolerance <= 1e-6)) {
        field_error("/options/tolerance", "must lie in (0, 1e-6]");
      }
    }
    if (o.contains("sweep_grid")) {
      const json& v = o.at("sweep_grid");
      if (!v.is_number_integer() || v.get<long long>() < 2) {
        field_error("/options/sweep_grid", "expected an integer >= 2");
      }
      grid = v.get<std::size_t>();
    }
    if (o.contains("domain_bound")) {
      bound = number(o.at("domain_bound"), "/options/domain_bound");
      if (!(*bound > m)) field_error("/options/domain_bound", "must exceed the total mass");
    }
  }
  const double mbar = bound.value_or(2.0 * m);
  auto make = [&](ArcSpec& s) {
    return s.coefficients ? ArcCost::polynomial(*s.coefficients, mbar) : *s.table;
  };
  const ArcCost ca = make(a);
  const ArcCost cb = make(b);
  for (int i = 0; i < 2; ++i) {
    try {
      validate_arc(i == 0 ? ca : cb);
    } catch (const ValidationError& e) {
      throw ValidationError("arc '" + (i == 0 ? a : b).label + "' (/arcs/" +
                            std::to_string(i) + "): " + e.what());
    }
  }
  CanonicalNetwork net = validate_and_canonicalize(ca, cb, m);
  return GameInstance{{a.label, b.label},
                      std::move(net),
                      PlayerProfile::from_weights(t0, weights),
                      mbar,
                      tolerance,
                      grid};
}

GameInstance parse_game_file(const std::string& path) {
  return parse_game(read_file(path));
}

DecentralizationStrategy parse_strategy(const std::string& text) {
  const json doc = parse_json(text);
  only_keys(doc, "", {"nonatomic", "atomic"});
  DecentralizationStrategy s;
  if (doc.contains("nonatomic")) s.nonatomic = number(doc.at("nonatomic"), "/nonatomic");
  if (doc.contains("atomic")) s.atomic = numbers(doc.at("atomic"), "/atomic");
  if (s.nonatomic < 0.0) field_error("/nonatomic", "must be >= 0");
  for (std::size_t i = 0; i < s.atomic.size(); ++i) {
    if (!(s.atomic[i] > 0.0)) field_error("/atomic/" + std::to_string(i), "must be > 0");
  }
  return s;
}

DecentralizationStrategy parse_strategy_file(const std::string& path) {
  return parse_strategy(read_file(path));
}

Report check_report(const GameInstance& g) {
  Report r = header("check");
  Report arcs = Report::array();
  for (int u = 0; u < 2; ++u) {
    const int c = user_to_canonical(g, u);
    const ArcCost& arc = c == 1 ? g.network.arc1() : g.network.arc2();
    Report e;
    e["label"] = g.labels[u];
    e["kind"] = to_string(arc.kind());
    e["canonical_arc"] = c;
    arcs.push_back(std::move(e));
  }
  r["arcs"] = arcs;
  r["swapped"] = g.network.swapped();
  r["assumption_case"] = to_string(g.network.assumption_case());
  r["total_mass"] = round12(g.network.total_mass());
  r["domain_bound"] = round12(g.domain_bound);
  const auto aux = auxiliary_bundle(g.network);
  r["cheaper_arc"] = g.canonical_label(1);
  r["H"] = round12(aux.H);
  r["xi_hat"] = optional_number(aux.xi_hat);
  r["A"] = optional_number(aux.A);
  return r;
}

Report solve_report(const GameInstance& g, const Tolerances& tol) {
  const Game game = g.game();
  const EquilibriumOutcome z = solve_ce_bisection(game, tol);
  const EquilibriumOutcome alt = solve_ce_modal(game, tol);
  Report r = header("solve");
  r["swapped"] = g.network.swapped();
  r["mode"] = z.mode ? to_string(*z.mode) : "";
  r["aggregate_flow"] = by_label(g, z.xi1, z.xi2);
  r["arc_costs"] = by_label(g, z.cost1, z.cost2);
  Report na;
  na["mass"] = round12(g.players.nonatomic_mass());
  na["flow"] = by_label(g, z.nonatomic_flow.arc1, z.nonatomic_flow.arc2);
  na["unit_cost"] = round12(z.nonatomic_cost);
  r["nonatomic"] = na;
  r["players"] = players_block(g, game.players, z, Role::Deputy);
  r["social_cost"] = round12(z.social_cost);
  r["modal_solver_gap"] = round12(std::abs(alt.xi1 - z.xi1));
  return r;
}

EquilibriumOutcome read_solve_report(const Report& report, const GameInstance& g) {
  if (report.value("schema_version", 0) != kReportSchemaVersion) {
    throw ValidationError("report schema_version must be 1");
  }
  EquilibriumOutcome z;
  const auto [xi1, xi2] = from_label(g, report.at("aggregate_flow"), "/aggregate_flow");
  const auto [c1, c2] = from_label(g, report.at("arc_costs"), "/arc_costs");
  z.xi1 = xi1;
  z.xi2 = xi2;
  z.cost1 = c1;
  z.cost2 = c2;
  const auto [n1, n2] = from_label(g, report.at("nonatomic").at("flow"), "/nonatomic/flow");
  z.nonatomic_flow = {n1, n2};
  z.nonatomic_cost = report.at("nonatomic").at("unit_cost").get<double>();
  z.social_cost = report.at("social_cost").get<double>();
  z.atomic_flows.resize(g.players.size());
  z.atomic_costs.resize(g.players.size());
  const Report& players = report.at("players");
  if (players.size() != g.players.size()) {
    throw ValidationError("report lists " + std::to_string(players.size()) +
                          " players, game has " + std::to_string(g.players.size()));
  }
  for (std::size_t k = 0; k < players.size(); ++k) {
    const Report& e = players[k];
    const std::size_t idx = e.at("player").get<std::size_t>();
    const std::size_t pos = g.players.position_of(idx - 1);
    const auto [f1, f2] =
        from_label(g, e.at("flow"), "/players/" + std::to_string(k) + "/flow");
    z.atomic_flows[pos] = {f1, f2};
    z.atomic_costs[pos] = e.at("cost").get<double>();
  }
  return z;
}

std::optional<double> tolerance_from_env() {
  const char* v = std::getenv("CONGEST_TOL");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const double d = std::strtod(v, &end);
  if (end == v || *end != '\0' || !(d > 0.0 && d <= 1e-6)) {
    throw ValidationError(std::string("CONGEST_TOL='") + v +
                          "' is not a number in (0, 1e-6]");
  }
  return d;
}

namespace {

Report decentralize_report(const GameInstance& g, std::size_t player, const Tolerances& tol) {
  const Game game = g.game();
  const OptimalStrategy opt = optimal_strategy(game, player, {}, tol);
  const double w = decentralizer_weight(game.players, player);
  const auto ev = evaluate_strategy(
      game, player, DecentralizationStrategy::single_atomic(opt.strategy.s, w), tol);
  Report r = header("decentralize");
  r["player"] = player + 1;
  r["weight"] = round12(w);
  r["cheaper_arc"] = g.canonical_label(1);
  r["classification"] = classification_block(opt.classification);
  Report o;
  o["s"] = round12(opt.strategy.s);
  o["cost"] = round12(opt.cost);
  o["oracle_cost"] = optional_number(opt.oracle_cost);
  o["deputy_flow"] = by_label(g, ev.deputy_flow.arc1, ev.deputy_flow.arc2);
  r["optimal"] = o;
  Report ref;
  ref["trivial_cost"] =
      round12(strategy_cost(game, player, DecentralizationStrategy::trivial(w), tol));
  ref["nonatomic_cost"] =
      round12(strategy_cost(game, player, DecentralizationStrategy::fully_nonatomic(w), tol));
  r["reference"] = ref;
  return r;
}

Report stackelberg_report(const GameInstance& g, std::size_t leader, const Tolerances& tol) {
  const Game game = g.game();
  const StackelbergSolution sol = solve_spne(game, leader, {}, tol);
  Report r = header("stackelberg");
  r["leader"] = leader + 1;
  r["leader_flow"] = by_label(g, sol.leader_flow.x1, sol.leader_flow.x2);
  r["leader_cost"] = round12(sol.leader_cost);
  r["decentralization_cost"] = round12(sol.decentralization.cost);
  r["oracle_cost"] = optional_number(sol.oracle_cost);
  Report f;
  const auto& z = sol.follower_outcome;
  f["aggregate_flow"] = by_label(g, z.xi1, z.xi2);
  f["nonatomic_flow"] = by_label(g, z.nonatomic_flow.arc1, z.nonatomic_flow.arc2);
  if (auto followers = follower_profile(game, leader)) {
    f["players"] = players_block(g, *followers, z, Role::Opponent);
  } else {
    f["players"] = Report::array();
  }
  r["followers"] = f;
  return r;
}

Report impact_block(const GameInstance& g, const EquilibriumOutcome& z, double cost) {
  Report r;
  r["aggregate_flow"] = by_label(g, z.xi1, z.xi2);
  r["social_cost"] = round12(z.social_cost);
  r["decentralizer_cost"] = round12(cost);
  return r;
}

Report impact_json(const GameInstance& g, std::size_t player,
                   const DecentralizationStrategy& alpha, const Tolerances& tol) {
  const ImpactReport rep = impact_report(g.game(), player, alpha, tol);
  Report r = header("impact");
  r["player"] = player + 1;
  r["baseline"] = impact_block(g, rep.baseline, rep.baseline_cost);
  r["treated"] = impact_block(g, rep.treated, rep.treated_cost);
  r["delta_social"] = round12(rep.delta_social);
  Report opp = Report::array();
  for (std::size_t j = 0; j < rep.opponent_sources.size(); ++j) {
    Report e;
    e["player"] = rep.opponent_sources[j] + 1;
    e["delta_cost"] = round12(rep.delta_opponent_costs[j]);
    opp.push_back(std::move(e));
  }
  r["opponents"] = opp;
  r["classification"] = classification_block(rep.regime);
  return r;
}

int fail(const CommandRequest& req, std::ostream& out, std::ostream& err, int code,
         const char* kind, const std::string& msg) {
  Report r;
  r["schema_version"] = kReportSchemaVersion;
  r["command"] = req.command;
  r["status"] = "error";
  r["error"] = {{"kind", kind}, {"message", msg}};
  out << r.dump(2) << "\n";
  err << "congest: " << kind << " error: " << msg << "\n";
  return code;
}

}  // namespace

int run_command(const CommandRequest& req, std::ostream& out, std::ostream& err) {
  try {
    const GameInstance g = parse_game_file(req.game_path);
    Tolerances tol;
    if (req.tolerance) {
      tol.root = *req.tolerance;
    } else if (g.tolerance) {
      tol.root = *g.tolerance;
    } else if (req.env_tolerance) {
      tol.root = *req.env_tolerance;
    }

    Report r;
    if (req.command == "check") {
      r = check_report(g);
    } else if (req.command == "solve") {
      r = solve_report(g, tol);
    } else if (req.command == "decentralize") {
      r = decentralize_report(g, player_source(g, req), tol);
    } else if (req.command == "stackelberg") {
      r = stackelberg_report(g, player_source(g, req), tol);
    } else if (req.command == "impact") {
      const std::size_t p = player_source(g, req);
      if (!req.strategy_path) throw ValidationError("--strategy is required for impact");
      r = impact_json(g, p, parse_strategy_file(*req.strategy_path), tol);
    } else if (req.command == "sweep") {
      const std::size_t p = player_source(g, req);
      const std::size_t n = req.grid.value_or(g.sweep_grid.value_or(256));
      const SweepTable t = sweep(g.game(), p, n, tol);
      if (req.out_path) {
        std::ofstream f(*req.out_path);
        if (!f) throw IoError("cannot write '" + *req.out_path + "'");
        write_sweep_csv(f, t, g.canonical_label(1));
        if (!f) throw IoError("error writing '" + *req.out_path + "'");
      } else {
        write_sweep_csv(out, t, g.canonical_label(1));
      }
      return kExitOk;
    } else {
      throw ValidationError("unknown command '" + req.command + "'");
    }
    r["tolerance"] = tol.root;
    out << r.dump(2) << "\n";
    return kExitOk;
  } catch (const IoError& e) {
    return fail(req, out, err, kExitIo, "io", e.what());
  } catch (const ValidationError& e) {
    return fail(req, out, err, kExitValidation, "validation", e.what());
  } catch (const ConsistencyError& e) {
    return fail(req, out, err, kExitConsistency, "consistency", e.what());
  } catch (const ConvergenceError& e) {
    return fail(req, out, err, kExitConsistency, "convergence", e.what());
  } catch (const BracketingError& e) {
    return fail(req, out, err, kExitConsistency, "bracketing", e.what());
  } catch (const RegimeError& e) {
    return fail(req, out, err, kExitConsistency, "regime", e.what());
  } catch (const std::exception& e) {
    return fail(req, out, err, kExitConsistency, "internal", e.what());
  }
}

}  // namespace congestion
