// congest: command-line front end for two-arc composite congestion games.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "congestion/cli_io.hpp"
#include "congestion/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Composite congestion games on two parallel arcs"};
  app.require_subcommand(1);

  congestion::CommandRequest req;
  std::size_t player = 0;
  std::size_t grid = 0;
  std::string strategy, out;
  double tol = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("game", req.game_path, "game file (JSON)")->required();
    sub->add_option("--tol", tol, "root-finding tolerance (overrides file and CONGEST_TOL)");
  };
  auto add_player = [&](CLI::App* sub) {
    sub->add_option("--player", player, "atomic player, 1-based, in file order")->required();
  };

  auto* check = app.add_subcommand("check", "validate and canonicalize the arcs");
  add_common(check);
  auto* solve = app.add_subcommand("solve", "composite equilibrium");
  add_common(solve);
  auto* dec = app.add_subcommand("decentralize", "regime and optimal SA strategy");
  add_common(dec);
  add_player(dec);
  auto* stack = app.add_subcommand("stackelberg", "leader solution of the Stackelberg game");
  add_common(stack);
  add_player(stack);
  auto* impact = app.add_subcommand("impact", "effect of a decentralization strategy");
  add_common(impact);
  add_player(impact);
  impact->add_option("--strategy", strategy, "strategy file {nonatomic, atomic}")->required();
  auto* sw = app.add_subcommand("sweep", "CSV table over SA strategies");
  add_common(sw);
  add_player(sw);
  sw->add_option("--grid", grid, "number of grid points (>= 2)");
  sw->add_option("--out", out, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : congestion::kExitValidation;
  }

  for (auto* sub : app.get_subcommands()) req.command = sub->get_name();
  if (player) req.player = player;
  if (grid) req.grid = grid;
  if (!strategy.empty()) req.strategy_path = strategy;
  if (!out.empty()) req.out_path = out;
  if (tol > 0.0) req.tolerance = tol;
  try {
    req.env_tolerance = congestion::tolerance_from_env();
  } catch (const congestion::ValidationError& e) {
    std::cerr << "congest: " << e.what() << "\n";
    return congestion::kExitValidation;
  }
  return congestion::run_command(req, std::cout, std::cerr);
}
