#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "congestion/cli_io.hpp"
#include "congestion/errors.hpp"

using namespace congestion;
namespace fs = std::filesystem;

namespace {

const std::string kGames = GAMES_DIR;

std::string game_path(const std::string& name) { return kGames + "/" + name + ".json"; }

std::string parse_error(const std::string& text) {
  try {
    parse_game(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

struct Run {
  int code;
  std::string out, err;
  Report json() const { return Report::parse(out); }
};

Run run(CommandRequest req) {
  std::ostringstream out, err;
  const int code = run_command(req, out, err);
  return {code, out.str(), err.str()};
}

CommandRequest request(const std::string& cmd, const std::string& game,
                       std::optional<std::size_t> player = std::nullopt) {
  CommandRequest r;
  r.command = cmd;
  r.game_path = game_path(game);
  r.player = player;
  return r;
}

const char* kTwoArcs = R"({"schema_version": 1,
  "arcs": [{"label": "a", "coefficients": [0, 1]}, {"label": "b", "coefficients": [1, 1]}],
  "players": {"nonatomic": 0.5, "atomic": [0.5]}})";

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("congest_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& text = "") const {
    const auto p = (path_ / name).string();
    if (!text.empty()) std::ofstream(p) << text;
    return p;
  }

 private:
  fs::path path_;
};

}  // namespace

TEST(Parse, IntroGame) {
  const auto g = parse_game_file(game_path("intro"));
  EXPECT_EQ(g.labels[0], "top");
  EXPECT_TRUE(g.network.swapped());
  EXPECT_EQ(g.canonical_label(1), "bottom");
  EXPECT_EQ(g.canonical_label(2), "top");
  EXPECT_DOUBLE_EQ(g.domain_bound, 2.0);
  EXPECT_FALSE(g.tolerance);
  EXPECT_EQ(g.players.size(), 2u);
}

TEST(Parse, TabulatedArcAndOptions) {
  const auto g = parse_game_file(game_path("tabulated_mixed"));
  EXPECT_EQ(*g.sweep_grid, 64u);
  EXPECT_DOUBLE_EQ(g.domain_bound, 4.0);
  const auto& road = g.network.swapped() ? g.network.arc2() : g.network.arc1();
  EXPECT_EQ(road.kind(), CostKind::TabulatedConvex);
  EXPECT_NEAR(g.players.nonatomic_mass(), 0.6, 1e-15);
}

TEST(Parse, SyntaxErrorsGiveLineAndColumn) {
  const auto msg = parse_error("{\n  \"arcs\": [,\n}");
  EXPECT_NE(msg.find("syntax error at line 2, column"), std::string::npos) << msg;
}

TEST(Parse, SchemaErrorsGiveFieldPointer) {
  std::string bad = kTwoArcs;
  bad.replace(bad.find("[0.5]"), 5, "[0.5, \"x\"]");
  EXPECT_NE(parse_error(bad).find("/players/atomic/1"), std::string::npos) << parse_error(bad);

  bad = kTwoArcs;
  bad.replace(bad.find("[0.5]"), 5, "[0.5, -0.2]");
  EXPECT_NE(parse_error(bad).find("field /players/atomic/1"), std::string::npos);

  bad = kTwoArcs;
  bad.replace(bad.find("\"schema_version\""), 0, "\"colour\": 3, ");
  const auto msg = parse_error(bad);
  EXPECT_NE(msg.find("colour"), std::string::npos) << msg;

  bad = kTwoArcs;
  bad.replace(bad.find("\"label\": \"b\""), 12, "\"label\": \"a\"");
  EXPECT_NE(parse_error(bad).find("/arcs/1/label"), std::string::npos);

  EXPECT_NE(parse_error(R"({"arcs": [], "players": {}})").find("/arcs"), std::string::npos);
  EXPECT_NE(parse_error(R"({"schema_version": 2, "arcs": [], "players": {}})")
                .find("/schema_version"),
            std::string::npos);
}

TEST(Parse, CostAssumptionsNameTheArc) {
  std::string bad = kTwoArcs;
  bad.replace(bad.find("[1, 1]"), 6, "[3, -1]");
  const auto msg = parse_error(bad);
  EXPECT_NE(msg.find("arc 'b'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("monotonicity"), std::string::npos) << msg;
}

TEST(Parse, Strategies) {
  const auto s = parse_strategy(R"({"nonatomic": 0.1, "atomic": [0.2, 0.3]})");
  EXPECT_DOUBLE_EQ(s.nonatomic, 0.1);
  EXPECT_EQ(s.atomic.size(), 2u);
  EXPECT_THROW(parse_strategy(R"({"atomic": [-0.2]})"), ValidationError);
  EXPECT_THROW(parse_strategy(R"({"atomic": [0.2], "extra": 1})"), ValidationError);
  EXPECT_THROW(parse_strategy_file("/nonexistent/s.json"), IoError);
}

TEST(Round12, KeepsTwelveDigits) {
  EXPECT_EQ(round12(2.0 / 11.0), 0.181818181818);
  EXPECT_EQ(round12(0.0), 0.0);
  EXPECT_EQ(round12(-1234567.891234567), -1234567.89123);
}

TEST(Commands, SolveIntroReport) {
  const auto r = run(request("solve", "intro"));
  ASSERT_EQ(r.code, kExitOk) << r.out;
  const auto j = r.json();
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["mode"], "2(k=2,l=0)");
  EXPECT_DOUBLE_EQ(j["aggregate_flow"]["top"].get<double>(), round12(4.0 / 11.0));
  EXPECT_DOUBLE_EQ(j["players"][0]["flow"]["bottom"].get<double>(), round12(7.0 / 22.0));
  EXPECT_DOUBLE_EQ(j["players"][1]["cost"].get<double>(), round12(1023.0 / 242.0));
  EXPECT_DOUBLE_EQ(j["social_cost"].get<double>(), round12(1023.0 / 121.0));
  EXPECT_LT(j["modal_solver_gap"].get<double>(), 1e-9);
}

TEST(Commands, CheckDecentralizeStackelbergImpact) {
  auto j = run(request("check", "intro")).json();
  EXPECT_EQ(j["assumption_case"], "II");
  EXPECT_EQ(j["cheaper_arc"], "bottom");
  EXPECT_DOUBLE_EQ(j["H"].get<double>(), -0.1);

  j = run(request("decentralize", "intro", 2)).json();
  EXPECT_EQ(j["classification"]["regime"], "Nontrivial");
  EXPECT_EQ(j["classification"]["l0"], 1);
  EXPECT_NEAR(j["optimal"]["s"].get<double>(), 0.275, 1e-5);
  EXPECT_NEAR(j["optimal"]["cost"].get<double>(), 4.125, 1e-9);

  j = run(request("stackelberg", "intro", 2)).json();
  EXPECT_NEAR(j["leader_cost"].get<double>(), 4.125, 1e-9);
  EXPECT_NEAR(j["leader_flow"]["top"].get<double>(), 1.0 / 22.0, 1e-5);

  auto req = request("impact", "intro", 2);
  req.strategy_path = game_path("quarter_split");
  j = run(req).json();
  EXPECT_NEAR(j["delta_social"].get<double>(), 495.0 / 1936.0, 1e-11);
  EXPECT_EQ(j["opponents"][0]["player"], 1);
}

// Solve reports read back into a flow that passes the equilibrium check,
// whichever order the arcs appear in the file.
TEST(Commands, ReportsRoundTripInEitherArcOrder) {
  TempDir tmp;
  for (const std::string name : {"intro", "single_player", "corner", "tabulated_mixed"}) {
    std::ifstream in(game_path(name));
    Report doc = Report::parse(in);
    std::swap(doc["arcs"][0], doc["arcs"][1]);
    const auto reversed = tmp.file(name + "_rev.json", doc.dump());

    const auto a = run(request("solve", name));
    CommandRequest rq = request("solve", name);
    rq.game_path = reversed;
    const auto b = run(rq);
    ASSERT_EQ(a.code, kExitOk) << a.out;
    ASSERT_EQ(b.code, kExitOk) << b.out;
    const auto ja = a.json(), jb = b.json();
    // same values; key order follows the file's arc order
    auto plain = [](const Report& r) { return nlohmann::json::parse(r.dump()); };
    EXPECT_EQ(plain(ja["aggregate_flow"]), plain(jb["aggregate_flow"])) << name;
    EXPECT_EQ(plain(ja["players"]), plain(jb["players"])) << name;
    EXPECT_NE(ja["swapped"], jb["swapped"]) << name;

    for (const auto& [report, path] : {std::pair{ja, game_path(name)}, std::pair{jb, reversed}}) {
      const auto g = parse_game_file(path);
      const auto z = read_solve_report(report, g);
      const auto& n = g.network;
      const auto chk = check_equilibrium(n.arc1(), n.arc2(), g.players, z, 1e-9);
      EXPECT_LT(chk.feasibility, 1e-10) << name;
      EXPECT_LT(chk.atomic_residual, 1e-8) << name;
      EXPECT_LT(chk.nonatomic_residual, 1e-8) << name;
    }
  }
}

TEST(Commands, ExitCodes) {
  auto r = run(request("solve", "missing_file"));
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_EQ(r.json()["status"], "error");
  EXPECT_EQ(r.json()["error"]["kind"], "io");
  EXPECT_EQ(r.err.rfind("congest: io error: ", 0), 0u) << r.err;

  EXPECT_EQ(run(request("decentralize", "intro")).code, kExitValidation);
  EXPECT_EQ(run(request("decentralize", "intro", 3)).code, kExitValidation);
  EXPECT_EQ(run(request("impact", "intro", 1)).code, kExitValidation);
  EXPECT_EQ(run(request("frobnicate", "intro")).code, kExitValidation);

  TempDir tmp;
  CommandRequest bad = request("solve", "intro");
  bad.game_path = tmp.file("bad.json", "{\"arcs\": ");
  r = run(bad);
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.json()["error"]["message"].get<std::string>().find("syntax error"),
            std::string::npos);

  auto sw = request("sweep", "intro", 1);
  sw.out_path = "/nonexistent/dir/out.csv";
  EXPECT_EQ(run(sw).code, kExitIo);
}

TEST(Commands, TolerancePrecedence) {
  TempDir tmp;
  std::ifstream in(game_path("intro"));
  Report doc = Report::parse(in);
  doc["options"] = {{"tolerance", 1e-9}};
  const auto with_tol = tmp.file("tol.json", doc.dump());

  auto req = request("solve", "intro");
  EXPECT_EQ(run(req).json()["tolerance"].get<double>(), Tolerances{}.root);
  req.env_tolerance = 1e-8;
  EXPECT_EQ(run(req).json()["tolerance"].get<double>(), 1e-8);
  req.game_path = with_tol;
  EXPECT_EQ(run(req).json()["tolerance"].get<double>(), 1e-9);
  req.tolerance = 1e-10;
  EXPECT_EQ(run(req).json()["tolerance"].get<double>(), 1e-10);
}

TEST(Commands, ToleranceFromEnvironment) {
  ::unsetenv("CONGEST_TOL");
  EXPECT_FALSE(tolerance_from_env());
  ::setenv("CONGEST_TOL", "1e-9", 1);
  EXPECT_EQ(*tolerance_from_env(), 1e-9);
  ::setenv("CONGEST_TOL", "abc", 1);
  EXPECT_THROW(tolerance_from_env(), ValidationError);
  ::setenv("CONGEST_TOL", "0.5", 1);
  EXPECT_THROW(tolerance_from_env(), ValidationError);
  ::unsetenv("CONGEST_TOL");
}

TEST(Commands, SweepCsv) {
  TempDir tmp;
  auto req = request("sweep", "tabulated_mixed", 2);
  req.out_path = tmp.file("sweep.csv");
  ASSERT_EQ(run(req).code, kExitOk);
  std::ifstream in(*req.out_path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# schema_version: 1");
  std::getline(in, line);
  const auto g = parse_game_file(game_path("tabulated_mixed"));
  const std::string a1 = g.canonical_label(1);
  EXPECT_EQ(line, "s,xi1[" + a1 + "],x1[" + a1 + "],y1[" + a1 + "],U,CS,u0,u1,u3");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 64);

  req.out_path.reset();
  req.grid = 5;
  const auto r = run(req);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}
