#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "setonet/errors.hpp"
#include "setonet/sensors.hpp"
#include "test_util.hpp"

using namespace setonet;

namespace {

// Brute-force nearest retained index, lowest index on ties.
int nearest_kept(const Mat& loc, int i, const std::vector<int>& dropped) {
  int best = -1;
  double best_d = 0.0;
  for (int j = 0; j < loc.rows(); ++j) {
    if (std::find(dropped.begin(), dropped.end(), j) != dropped.end()) continue;
    const double d = (loc.row(i) - loc.row(j)).squaredNorm();
    if (best < 0 || d < best_d) {
      best = j;
      best_d = d;
    }
  }
  return best;
}

SensorSet line_set(std::vector<double> xs) {
  SensorSet s;
  const int m = static_cast<int>(xs.size());
  s.locations.resize(m, 1);
  s.values.resize(m, 1);
  for (int i = 0; i < m; ++i) {
    s.locations(i, 0) = xs[i];
    s.values(i, 0) = 10.0 + i;
  }
  s.weights = Vec::Ones(m);
  return s;
}

}  // namespace

TEST(SensorWeights, SingleSensorOwnsInterval) {
  Vec x(1);
  x << 0.1;
  EXPECT_NEAR(trapezoid_weights(x, -1.0, 1.0)(0), 2.0, 1e-11);
}

TEST(SensorWeights, CellsSplitAtMidpoints) {
  Vec x(3);
  x << 0.5, -0.5, 0.0;
  Vec w = trapezoid_weights(x, -1.0, 1.0);
  EXPECT_NEAR(w(0), 0.75, 1e-11);
  EXPECT_NEAR(w(1), 0.75, 1e-11);
  EXPECT_NEAR(w(2), 0.5, 1e-11);
  EXPECT_NEAR(w.sum(), 2.0, 1e-10);
}

TEST(SensorWeights, CoincidentLocationsKeepPositiveSum) {
  Vec x = Vec::Constant(4, 0.3);
  Vec w = trapezoid_weights(x, 0.3, 0.3);
  EXPECT_GT(w.sum(), 0.0);
  EXPECT_TRUE((w.array() >= 0.0).all());
}

TEST(SensorWeights, UniformInTwoDimensions) {
  Rng rng(1);
  Vec w = sensor_weights(test::uniform(5, 2, rng, 0.0, 1.0), Domain::box(0.0, 1.0, 2));
  EXPECT_EQ(w, Vec::Ones(5));
}

TEST(Layouts, FixedLayoutIsSeededAndSorted) {
  Domain d = Domain::interval(-1.0, 1.0);
  Mat a = sample_fixed_layout(d, 100, 42);
  Mat b = sample_fixed_layout(d, 100, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, sample_fixed_layout(d, 100, 43));
  for (int i = 1; i < 100; ++i) EXPECT_LE(a(i - 1, 0), a(i, 0));
  EXPECT_GE(a.minCoeff(), -1.0);
  EXPECT_LE(a.maxCoeff(), 1.0);
}

TEST(Layouts, LinearlySpacedIndices) {
  auto idx = linspace_indices(501, 300);
  ASSERT_EQ(idx.size(), 300u);
  EXPECT_EQ(idx.front(), 0);
  EXPECT_EQ(idx.back(), 500);
  for (int i = 0; i < 300; ++i) EXPECT_EQ(idx[i], static_cast<int>(std::floor(i * 500.0 / 299.0 + 0.5)));
  EXPECT_EQ(linspace_indices(501, 1), std::vector<int>{250});
  EXPECT_THROW(linspace_indices(501, 502), ValidationError);
}

TEST(Layouts, VariableLayoutsChangeAndAreUnbiased) {
  Domain d = Domain::interval(-1.0, 1.0);
  Rng rng(5);
  Mat a = resample_variable_layout(d, 100, rng);
  Mat b = resample_variable_layout(d, 100, rng);
  EXPECT_EQ(a.rows(), 100);
  EXPECT_EQ(b.rows(), 100);
  EXPECT_NE(a, b);
  double sum = 0.0;
  for (int r = 0; r < 1000; ++r) sum += resample_variable_layout(d, 100, rng).sum();
  EXPECT_NEAR(sum / 1e5, 0.0, 0.01);
}

TEST(Dropoff, ZeroRateIsIdentity) {
  Rng rng(1);
  SensorSet s = test::random_set(30, 1, 2, rng);
  DropoffResult r = apply_dropoff(s, 0.0, rng);
  EXPECT_EQ(r.set.locations, s.locations);
  EXPECT_EQ(r.set.values, s.values);
  EXPECT_EQ(r.set.weights, s.weights);
  EXPECT_TRUE(r.dropped.empty());
}

TEST(Dropoff, KeepsCardinalityAndDuplicatesRetainedPairs) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    SensorSet s = test::random_set(100, trial % 2 + 1, 1, rng);
    DropoffResult r = apply_dropoff(s, 0.2, rng);
    ASSERT_EQ(r.set.size(), 100);
    ASSERT_EQ(r.dropped.size(), 20u);
    std::set<int> dropped(r.dropped.begin(), r.dropped.end());
    EXPECT_EQ(dropped.size(), 20u);
    for (int i = 0; i < 100; ++i) {
      const int src = r.source[i];
      EXPECT_EQ(dropped.count(src), 0u);
      EXPECT_EQ(r.set.locations.row(i), s.locations.row(src));
      EXPECT_EQ(r.set.values.row(i), s.values.row(src));
      if (dropped.count(i)) EXPECT_EQ(src, nearest_kept(s.locations, i, r.dropped));
      else EXPECT_EQ(src, i);
    }
  }
}

TEST(Dropoff, NearestNeighbourAndTieBreak) {
  SensorSet s = line_set({0.0, 1.0, 2.0, 2.5, 4.0});
  DropoffResult r = fill_from_nearest(s, {2});
  EXPECT_EQ(r.source[2], 3);
  EXPECT_EQ(r.set.values(2, 0), 13.0);

  SensorSet t = line_set({0.0, 1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(fill_from_nearest(t, {2}).source[2], 1);
}

TEST(Dropoff, SelectionIsUniform) {
  SensorSet s = line_set({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  Rng rng(9);
  const int trials = 10000;
  std::vector<int> count(10, 0);
  for (int t = 0; t < trials; ++t)
    for (int d : apply_dropoff(s, 0.2, rng).dropped) ++count[d];
  const double sigma = std::sqrt(0.2 * 0.8 / trials);
  for (int c : count) EXPECT_NEAR(c / static_cast<double>(trials), 0.2, 3.0 * sigma);
}

TEST(Dropoff, FloorRuleAndLimits) {
  EXPECT_EQ(drop_count(100, 0.2), 20);
  EXPECT_EQ(drop_count(7, 0.2), 1);
  EXPECT_EQ(drop_count(4, 0.2), 0);
  EXPECT_THROW(drop_count(10, 1.0), ValidationError);
  SensorSet s = line_set({0.0, 1.0});
  EXPECT_THROW(fill_from_nearest(s, {0, 1}), ValidationError);
}

TEST(Protocol, NamesRoundTrip) {
  for (auto m : {ProtocolMode::fixed, ProtocolMode::variable, ProtocolMode::dropoff})
    EXPECT_EQ(protocol_from_string(to_string(m)), m);
  EXPECT_THROW(protocol_from_string("sometimes"), ValidationError);
}
