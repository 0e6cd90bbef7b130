#include <random>

#include <gtest/gtest.h>

#include "projscope/distance.hpp"
#include "projscope/error.hpp"
#include "projscope/metrics.hpp"
#include "projscope/scaleopt.hpp"

using namespace projscope;

namespace {

struct Instance {
  Eigen::MatrixXd high;
  Projection proj;
  std::vector<int> labels;
};

Instance random_instance(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> spread(0.05, 20.0);
  Instance in;
  in.high.resize(n, 4);
  in.proj.coords.resize(n, 2);
  const double s = spread(gen);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 4; ++c) in.high(i, c) = g(gen);
    in.proj.coords(i, 0) = s * (in.high(i, 0) + 0.3 * g(gen));
    in.proj.coords(i, 1) = s * (in.high(i, 1) + 0.3 * g(gen));
    in.labels.push_back(i % 3);
  }
  in.proj.id = "random";
  return in;
}

/// Brute-force pair sums straight from the definition.
double naive_closed_form(const DistanceMatrix& h, const DistanceMatrix& l) {
  double hl = 0.0, ll = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = i + 1; j < h.size(); ++j) {
      hl += h(i, j) * l(i, j);
      ll += l(i, j) * l(i, j);
    }
  return hl / ll;
}

}  // namespace

TEST(ClosedForm, IdentityIsOne) {
  std::mt19937_64 gen(1);
  const Instance in = random_instance(gen, 12);
  const DistanceMatrix d = pairwise_distances(in.high);
  EXPECT_NEAR(closed_form_stress_scale(d, d), 1.0, 1e-14);
}

TEST(ClosedForm, SinglePair) {
  DistanceMatrix h(2), l(2);
  h.set(0, 1, 2.0);
  h.set(1, 0, 2.0);
  l.set(0, 1, 1.0);
  l.set(1, 0, 1.0);
  const double s = closed_form_stress_scale(h, l);
  EXPECT_DOUBLE_EQ(s, 2.0);
  EXPECT_NEAR(StressProfile::from(h, l).stress_at(s), 0.0, 1e-12);
}

TEST(ClosedForm, InverseOfUniformScaling) {
  std::mt19937_64 gen(2);
  const Instance in = random_instance(gen, 10);
  const DistanceMatrix h = pairwise_distances(in.high);
  const DistanceMatrix l = pairwise_distances(in.high * 4.0);
  EXPECT_NEAR(closed_form_stress_scale(h, l), 0.25, 1e-14);
}

TEST(ClosedForm, AllZeroLowThrows) {
  std::mt19937_64 gen(3);
  const Instance in = random_instance(gen, 5);
  EXPECT_THROW(closed_form_stress_scale(pairwise_distances(in.high), DistanceMatrix(5)), ArgumentError);
}

TEST(StressProfile, MatchesDirectStressOfScaledCoords) {
  std::mt19937_64 gen(4);
  const Instance in = random_instance(gen, 15);
  const DistanceMatrix h = pairwise_distances(in.high);
  const StressProfile prof = StressProfile::from(h, pairwise_distances(in.proj.coords));
  for (double s : {0.01, 0.5, 1.0, 3.0, 70.0})
    EXPECT_NEAR(prof.stress_at(s), stress(h, pairwise_distances(in.proj.coords * s)), 1e-12);
}

TEST(OptimalScale, NegativeStressWeightFindsClosedForm) {
  std::mt19937_64 gen(5);
  const WeightVector u2{2.230, 2.433, -0.089, 0.812};
  for (int t = 0; t < 50; ++t) {
    const Instance in = random_instance(gen, 20);
    const DistanceMatrix h = pairwise_distances(in.high);
    const ScaledProjection r = optimal_scale(h, in.proj, in.labels, u2);
    const double oracle_s = naive_closed_form(h, pairwise_distances(in.proj.coords));
    EXPECT_NEAR(r.search.result_s / oracle_s, 1.0, 1e-4);
    EXPECT_FALSE(r.search.at_boundary);
    EXPECT_NEAR(r.after.sc, r.before.sc, 1e-12);
    EXPECT_NEAR(r.after.np, r.before.np, 1e-12);
    EXPECT_GE(composite(r.after, u2), composite(r.before, u2) - 1e-12);
    EXPECT_EQ(r.projection.scale, r.search.result_s);
  }
}

TEST(OptimalScale, ZeroStressWeightKeepsUnitScale) {
  std::mt19937_64 gen(6);
  const Instance in = random_instance(gen, 12);
  const DistanceMatrix h = pairwise_distances(in.high);
  const StressProfile prof = StressProfile::from(h, pairwise_distances(in.proj.coords));
  ScaleSearch s = default_search(prof);
  s.s_min = 0.5;
  s.s_max = 2.0;
  const ScaleSearch r = optimize_scale(prof, {0.3, 0.4, 0.5, 7}, {1.0, 1.0, 0.0, 1.0}, s);
  EXPECT_EQ(r.result_s, 1.0);
}

TEST(OptimalScale, PositiveStressWeightHitsUpperBound) {
  std::mt19937_64 gen(7);
  const WeightVector u1{1.820, 2.993, 0.314, 0.086};
  const Instance in = random_instance(gen, 12);
  const DistanceMatrix h = pairwise_distances(in.high);
  const ScaledProjection r = optimal_scale(h, in.proj, in.labels, u1);
  EXPECT_EQ(r.search.result_s, r.search.s_max);
  EXPECT_TRUE(r.search.at_boundary);

  // Grid check: Q rises monotonically from s* to s_max.
  const StressProfile prof = StressProfile::from(h, pairwise_distances(in.proj.coords));
  const double s_star = prof.hl / prof.ll;
  double prev = -1e300;
  for (int i = 0; i <= 100; ++i) {
    const double s = s_star + (r.search.s_max - s_star) * i / 100.0;
    const double q = u1.w3 * prof.stress_at(s);
    EXPECT_GE(q, prev);
    prev = q;
  }
}

TEST(OptimalScale, DefaultBoundsAroundClosedForm) {
  const StressProfile prof{9.0, 6.0, 4.0};
  const ScaleSearch s = default_search(prof);
  EXPECT_DOUBLE_EQ(s.s_min, 0.15);
  EXPECT_DOUBLE_EQ(s.s_max, 15.0);
  EXPECT_EQ(s.tolerance, 1e-6);
}
