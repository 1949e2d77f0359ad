#pragma once

// Game files, command dispatch and structured reports for the `congest` tool.
//
// Game file (JSON):
//   {
//     "schema_version": 1,
//     "arcs": [ {"label": "A", "coefficients": [10, 1]},
//               {"label": "B", "table": {"knots": [...], "marginals": [...],
//                                        "value_at_zero": 1.0}} ],
//     "players": {"nonatomic": 0.0, "atomic": [0.5, 0.5]},
//     "options": {"tolerance": 1e-12, "sweep_grid": 256, "domain_bound": 2.0}
//   }
// Coefficients are ascending (c(t) = 10 + t above). Unknown keys are errors.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "congestion/decentralization.hpp"
#include "congestion/equilibrium.hpp"

namespace congestion {

inline constexpr int kReportSchemaVersion = 1;

struct GameInstance {
  std::array<std::string, 2> labels;  // user order
  CanonicalNetwork network;
  PlayerProfile players;  // plain profile, source = user index (0-based)
  double domain_bound = 0.0;
  std::optional<double> tolerance;
  std::optional<std::size_t> sweep_grid;

  Game game() const { return Game(network, players); }
  /// Label of the canonical arc 1 or 2.
  const std::string& canonical_label(int arc) const;
};

/// Parses and validates a game document. Syntax errors report the line and
/// column; schema errors report the JSON pointer of the offending field.
GameInstance parse_game(const std::string& text);
GameInstance parse_game_file(const std::string& path);  // IoError if unreadable

/// {"nonatomic": x, "atomic": [...]}
DecentralizationStrategy parse_strategy(const std::string& text);
DecentralizationStrategy parse_strategy_file(const std::string& path);

using Report = nlohmann::ordered_json;

/// Rounds to 12 significant digits for output.
double round12(double v);

Report check_report(const GameInstance& g);
Report solve_report(const GameInstance& g, const Tolerances& tol);

/// Reads the flows of a solve report back into canonical order.
EquilibriumOutcome read_solve_report(const Report& report, const GameInstance& g);

struct CommandRequest {
  std::string command;  // check | solve | decentralize | stackelberg | impact | sweep
  std::string game_path;
  std::optional<std::size_t> player;  // 1-based
  std::optional<std::string> strategy_path;
  std::optional<std::size_t> grid;
  std::optional<std::string> out_path;
  std::optional<double> tolerance;  // command line, wins over file and env
  std::optional<double> env_tolerance;
};

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitConsistency = 3, kExitIo = 4 };

/// Runs one command, writing the report (or CSV) to `out` and diagnostics to
/// `err`. Errors also produce a report with status "error".
int run_command(const CommandRequest& req, std::ostream& out, std::ostream& err);

/// Value of CONGEST_TOL, if set. Throws ValidationError if unparsable.
std::optional<double> tolerance_from_env();

}  // namespace congestion
