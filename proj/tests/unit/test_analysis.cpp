#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "congestion/analysis.hpp"
#include "congestion/errors.hpp"
#include "support/games.hpp"

using namespace congestion;

namespace {

// ξ1(s) of the intro example on [0.2, 0.5]
double intro_xi1(double s) {
  const double u = s <= 0.2 ? 0.0 : (2 * s - 0.4) / 3.3;
  return 8.0 / 11.0 - 0.5 * u;
}

// v(ξ) = (T − M + ξ)c1(ξ) + (M − ξ)c2(M − ξ) for the decentralizer weight T.
double v_of(const CanonicalNetwork& n, double T, double xi) {
  const double m = n.total_mass();
  return (T - m + xi) * n.arc1().value(xi) + (m - xi) * n.arc2().value(m - xi);
}

}  // namespace

TEST(Impact, IntroExampleQuarterSplit) {
  const auto r = impact_report(testkit::g1(), 1, {0.0, {0.25, 0.25}});
  EXPECT_NEAR(r.delta_social, 495.0 / 1936.0, 1e-11);
  ASSERT_EQ(r.opponent_sources.size(), 1u);
  EXPECT_EQ(r.opponent_sources[0], 0u);
  EXPECT_NEAR(r.delta_opponent_costs[0], 807.0 / 176.0 - 1023.0 / 242.0, 1e-11);
  EXPECT_NEAR(r.baseline_cost, 1023.0 / 242.0, 1e-11);
  EXPECT_NEAR(r.treated_cost, 4.125, 1e-11);
  EXPECT_EQ(r.regime.regime, Regime::Nontrivial);
}

TEST(Impact, NoChangeCases) {
  const auto a = impact_report(testkit::g1(), 0, DecentralizationStrategy::trivial(0.5));
  EXPECT_EQ(a.delta_social, 0.0);
  EXPECT_EQ(a.delta_opponent_costs[0], 0.0);
  const auto b = impact_report(testkit::g3(), 0, {0.1, {0.2, 0.2}});
  EXPECT_NEAR(b.delta_social, 0.0, 1e-12);
  EXPECT_NEAR(b.delta_opponent_costs[0], 0.0, 1e-12);
}

TEST(Sweep, IntroExampleRows) {
  const auto t = sweep(testkit::g1(), 1, 21);
  ASSERT_EQ(t.rows.size(), 21u);
  for (const auto& r : t.rows) {
    EXPECT_NEAR(r.xi1, intro_xi1(r.s), 1e-11) << r.s;
    EXPECT_NEAR(r.x1 + r.y1, r.xi1, 1e-14);
  }
  EXPECT_NEAR(t.rows.front().U, 91.0 / 22.0, 1e-11);
  EXPECT_NEAR(t.rows.back().U, 1023.0 / 242.0, 1e-11);
  EXPECT_NEAR(t.rows.back().CS, 1023.0 / 121.0, 1e-11);
  EXPECT_TRUE(verify_monotonicity(t).all_passed());
  EXPECT_THROW(sweep(testkit::g1(), 1, 1), ValidationError);
}

TEST(Monotonicity, DetectsCorruptedRows) {
  auto t = sweep(testkit::g1(), 1, 8);
  auto bad = t;
  bad.rows[3].xi1 += 1e-2;  // above the plateau value of row 2
  const auto rep = verify_monotonicity(bad);
  EXPECT_FALSE(rep.all_passed());
  EXPECT_FALSE(rep.checks[0].passed);
  EXPECT_EQ(*rep.checks[0].first_violation, 3u);

  bad = t;
  bad.rows[2].opponent_costs[0] = bad.rows.back().opponent_costs[0] - 1e-6;
  const auto rep2 = verify_monotonicity(bad);
  EXPECT_FALSE(rep2.checks.back().passed);
  EXPECT_EQ(rep2.checks.back().property, "u1 >= u(trivial)");

  SweepTable one{t.opponent_sources, {t.rows[0]}};
  EXPECT_TRUE(verify_monotonicity(one).all_passed());
}

TEST(Monotonicity, HoldsOnRandomGames) {
  testkit::GameSampler gen(60606);
  for (int i = 0; i < 60; ++i) {
    const auto g = gen.next();
    const std::size_t player = gen.index(g.players.size());
    const auto rep = verify_monotonicity(sweep(g, player, 24));
    for (const auto& c : rep.checks) {
      EXPECT_TRUE(c.passed) << "game " << i << ": " << c.property << " row "
                            << c.first_violation.value_or(0);
    }
  }
}

TEST(Csv, SchemaLineHeaderAndRows) {
  const auto t = sweep(testkit::g1(), 1, 3);
  std::ostringstream os;
  write_sweep_csv(os, t, "bottom");
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# schema_version: 1");
  std::getline(in, line);
  EXPECT_EQ(line, "s,xi1[bottom],x1[bottom],y1[bottom],U,CS,u0,u1");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_NE(os.str().find("\n0.5,0.636363636364,"), std::string::npos) << os.str();
}

// v'(ξ) = c1'(ξ)(T − F1(ξ)) by finite differences, on trivial-regime games.
TEST(TrivialRegime, GradientOfV) {
  auto check = [](const Game& g, std::size_t player) {
    const auto& n = g.network;
    const double T = decentralizer_weight(g.players, player);
    const double m = n.total_mass();
    for (int j = 1; j < 40; ++j) {
      const double xi = m * j / 40;
      const double d = 1e-6 * std::max(1.0, m);
      const double fd = (v_of(n, T, xi + d) - v_of(n, T, xi - d)) / (2 * d);
      const double rhs = n.arc1().marginal(xi) * (T - aux_F(n, 1, xi));
      EXPECT_NEAR(fd, rhs, 1e-5 * std::max(std::abs(rhs), 1e-3)) << "xi " << xi;
    }
  };
  check(testkit::g2(), 0);

  testkit::GameSampler gen(4242, {4, 0.4, 0.0});
  int trivial = 0;
  for (int i = 0; i < 200 && trivial < 25; ++i) {
    const auto g = gen.next();
    const std::size_t player = gen.index(g.players.size());
    if (classify_case(g, player).regime != Regime::Trivial) continue;
    ++trivial;
    check(g, player);
  }
  EXPECT_GE(trivial, 10);
}
