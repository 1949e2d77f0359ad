#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "congestion/cost_model.hpp"
#include "congestion/kernels.hpp"

using namespace congestion;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST(Kernels, ScalarAndAvx2AreBitwiseEqual) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t deg = trial % 8;
    const std::size_t n = trial % 41;  // covers empty input and every tail length
    auto coeffs = random_vector(rng, deg + 1, -3.0, 3.0);
    auto ts = random_vector(rng, n, -2.0, 2.0);
    std::vector<double> a(n), b(n);
    kernels::horner_scalar(coeffs, ts, a);
    kernels::horner_avx2(coeffs, ts, b);
    ASSERT_EQ(0, std::memcmp(a.data(), b.data(), n * sizeof(double)))
        << "degree " << deg << " n " << n;
  }
}

TEST(Kernels, MatchesNaiveEvaluation) {
  std::mt19937_64 rng(7);
  auto coeffs = random_vector(rng, 5, -1.0, 1.0);
  auto ts = random_vector(rng, 33, 0.0, 1.5);
  std::vector<double> out(ts.size());
  kernels::horner(coeffs, ts, out);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double ref = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) ref += coeffs[k] * std::pow(ts[i], k);
    EXPECT_NEAR(out[i], ref, 1e-13);
  }
}

TEST(Kernels, DispatchReportsAnIsa) {
  const auto isa = kernels::detected_isa();
  EXPECT_TRUE(kernels::isa_name(isa) == "avx2" || kernels::isa_name(isa) == "scalar");
  // explicit scalar request works everywhere
  std::vector<double> c{1.0, 2.0}, t{0.5}, o(1);
  kernels::horner(c, t, o, kernels::Isa::Scalar);
  EXPECT_DOUBLE_EQ(o[0], 2.0);
}

TEST(Kernels, ArcSampleAgreesWithPointwiseEvaluation) {
  const auto arc = ArcCost::polynomial({0.3, 1.2, 0.7, 0.05}, 3.0);
  std::vector<double> ts;
  for (int i = 0; i <= 50; ++i) ts.push_back(3.0 * i / 50);
  std::vector<double> v(ts.size()), m(ts.size()), c(ts.size());
  arc.sample(ts, v, m, c);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_EQ(v[i], arc.value(ts[i]));
    EXPECT_EQ(m[i], arc.marginal(ts[i]));
    EXPECT_EQ(c[i], arc.curvature(ts[i]));
  }
}
