#include <gtest/gtest.h>

#include "setonet/errors.hpp"
#include "setonet/trunk.hpp"
#include "test_util.hpp"

using namespace setonet;

TEST(Trunk, DefaultShape) {
  Rng rng(1);
  Trunk t(TrunkConfig{}, rng);
  Mat b = t.basis(test::uniform(7, 1, rng));
  EXPECT_EQ(b.rows(), 7);
  EXPECT_EQ(b.cols(), 32);
  EXPECT_EQ(t.net().widths(), (std::vector<int>{1, 256, 256, 256, 32}));
}

TEST(Trunk, RepeatedQueryGivesRepeatedRow) {
  Rng rng(2);
  Trunk t(TrunkConfig{2, 4, 2, {16, 16}}, rng);
  Mat y(2, 2);
  y << 0.25, -0.5, 0.25, -0.5;
  Mat b = t.basis(y);
  EXPECT_EQ(b.row(0), b.row(1));
}

TEST(Trunk, MatchesScalarLoop) {
  Rng rng(3);
  Trunk t(TrunkConfig{2, 3, 2, {5, 4}}, rng);
  Mat y(1, 2);
  y << 0.3, 0.8;
  Mat b = t.basis(y);

  std::vector<double> h{0.3, 0.8};
  auto& layers = t.net().layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Mat& w = layers[l].weight().value;
    const Mat& bias = layers[l].bias().value;
    std::vector<double> next(w.cols());
    for (Eigen::Index o = 0; o < w.cols(); ++o) {
      double s = bias(0, o);
      for (Eigen::Index i = 0; i < w.rows(); ++i) s += h[i] * w(i, o);
      next[o] = (l + 1 < layers.size() && s < 0.0) ? 0.0 : s;
    }
    h = next;
  }
  ASSERT_EQ(b.cols(), 6);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(b(0, j), h[j], 1e-14);
}

TEST(Trunk, RejectsNonfiniteQueries) {
  Rng rng(4);
  Trunk t(TrunkConfig{1, 2, 1, {4}}, rng);
  Mat y(1, 1);
  y << std::numeric_limits<double>::infinity();
  EXPECT_THROW(t.basis(y), ValidationError);
}

TEST(Synthesize, SingleUnitCoefficientReturnsBasis) {
  Rng rng(5);
  Mat basis = test::uniform(9, 1, rng);
  Mat coef = Mat::Ones(1, 1);
  Mat pred = synthesize(coef, basis, RowVec::Zero(1));
  EXPECT_EQ(pred, basis);
}

TEST(Synthesize, ZeroCoefficientsGiveBias) {
  Rng rng(6);
  Mat basis = test::uniform(9, 6, rng);
  RowVec b0(2);
  b0 << 1.5, -2.0;
  Mat pred = synthesize(Mat::Zero(3, 2), basis, b0);
  for (int q = 0; q < 9; ++q) EXPECT_EQ(pred.row(q), b0);
}

TEST(Synthesize, MatchesDoubleLoop) {
  Rng rng(7);
  const int p = 3, dout = 2, n = 5;
  Mat coef = test::uniform(p, dout, rng);
  Mat basis = test::uniform(n, p * dout, rng);
  RowVec b0 = test::uniform(1, dout, rng);
  Mat tau0 = test::uniform(n, dout, rng);
  Mat pred = synthesize(coef, basis, b0, tau0);
  for (int q = 0; q < n; ++q)
    for (int c = 0; c < dout; ++c) {
      double s = b0(c) + tau0(q, c);
      for (int k = 0; k < p; ++k) s += coef(k, c) * basis(q, k * dout + c);
      EXPECT_NEAR(pred(q, c), s, 1e-15);
    }
}

TEST(Synthesize, LinearInCoefficients) {
  Rng rng(8);
  Mat b1 = test::uniform(4, 2, rng), b2 = test::uniform(4, 2, rng);
  Mat basis = test::uniform(6, 8, rng);
  RowVec zero = RowVec::Zero(2);
  const double a = 0.7, c = -1.3;
  Mat lhs = synthesize(a * b1 + c * b2, basis, zero);
  Mat rhs = a * synthesize(b1, basis, zero) + c * synthesize(b2, basis, zero);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Synthesize, PermutingQueriesPermutesPredictions) {
  Rng rng(9);
  Mat coef = test::uniform(4, 1, rng);
  Mat basis = test::uniform(5, 4, rng);
  RowVec b0 = RowVec::Constant(1, 0.1);
  Mat pred = synthesize(coef, basis, b0);
  auto perm = test::random_permutation(5, rng);
  Mat pb(5, 4);
  for (int i = 0; i < 5; ++i) pb.row(i) = basis.row(perm[i]);
  Mat pp = synthesize(coef, pb, b0);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(pp.row(i), pred.row(perm[i]));
}

TEST(Synthesize, RejectsShapeMismatch) {
  EXPECT_THROW(synthesize(Mat::Zero(3, 1), Mat::Zero(4, 4), RowVec::Zero(1)), ValidationError);
}
