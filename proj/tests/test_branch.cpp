#include <gtest/gtest.h>

#include <cmath>

#include "setonet/branch.hpp"
#include "setonet/errors.hpp"
#include "setonet/model.hpp"
#include "test_util.hpp"

using namespace setonet;

namespace {

BranchConfig small_config(BranchVariant v, int dx = 1, int du = 1) {
  BranchConfig c;
  c.variant = v;
  c.dx = dx;
  c.du = du;
  c.dout = 2;
  c.p = 5;
  c.pe = {8, 0.1, dx};
  c.d_k = 8;
  c.d_v = 8;
  c.n_pool = 6;
  c.key_hidden = {16};
  c.value_hidden = {16};
  c.rho_tok_hidden = {16};
  c.phi_hidden = {16, 16};
  c.rho_hidden = {16};
  c.vidon_enc = 8;
  c.vidon_enc_hidden = {8};
  c.vidon_head_hidden = {8};
  c.vidon_head_out = 4;
  c.vidon_out_hidden = {16};
  c.deeponet_hidden = {16};
  return c;
}

SensorSet concat(const SensorSet& a, const SensorSet& b) {
  SensorSet s;
  s.locations.resize(a.size() + b.size(), a.locations.cols());
  s.locations << a.locations, b.locations;
  s.values.resize(a.size() + b.size(), a.values.cols());
  s.values << a.values, b.values;
  s.weights.resize(a.size() + b.size());
  s.weights << a.weights, b.weights;
  return s;
}

Mat pooled(PooledBranch& b, const SensorSet& s) {
  Tape tape(false);
  return tape.value(b.pooled(tape, stack_sensor_sets({s})));
}

}  // namespace

TEST(BranchVariant, RoundTripsNames) {
  for (auto v : {BranchVariant::key, BranchVariant::attention, BranchVariant::mean, BranchVariant::sum,
                 BranchVariant::deeponet, BranchVariant::vidon})
    EXPECT_EQ(branch_variant_from_string(to_string(v)), v);
  EXPECT_THROW(branch_variant_from_string("setformer"), ValidationError);
}

TEST(KeyBranch, UniformWeightsGiveMeanOfMixing) {
  BranchConfig cfg = small_config(BranchVariant::key);
  Rng rng(7);
  KeyBranch b(cfg, rng);
  const int m = 9;
  Mat loc = test::uniform(m, 1, rng);
  Mat a = b.mixing_matrix(loc, Vec::Ones(m));

  Mat pe = encode_positions(loc, cfg.pe);
  Mat kin(m, pe.cols() + 1);
  kin << pe, loc;
  Mat keys = b.key_net().eval(kin);
  Mat s = b.tokens().value * keys.transpose() / std::sqrt(8.0);
  for (int k = 0; k < cfg.n_pool; ++k)
    for (int i = 0; i < m; ++i) EXPECT_NEAR(a(k, i), std::log1p(std::exp(s(k, i))) / m, 1e-15);
}

TEST(KeyBranch, SingleSensorKeepsRawMixing) {
  BranchConfig cfg = small_config(BranchVariant::key);
  cfg.mix = Activation::tanh;
  Rng rng(8);
  KeyBranch b(cfg, rng);
  Mat loc(1, 1);
  loc << 0.3;
  Vec w(1);
  w << 0.37;
  Mat a = b.mixing_matrix(loc, w);
  Mat pe = encode_positions(loc, cfg.pe);
  Mat kin(1, pe.cols() + 1);
  kin << pe, loc;
  Mat s = b.tokens().value * b.key_net().eval(kin).transpose() / std::sqrt(8.0);
  for (int k = 0; k < cfg.n_pool; ++k) EXPECT_DOUBLE_EQ(a(k, 0), std::tanh(s(k, 0)));
}

TEST(KeyBranch, ZeroScoresMakeCoefficientsConstant) {
  BranchConfig cfg = small_config(BranchVariant::key);
  cfg.mix = Activation::tanh;
  Rng rng(9);
  KeyBranch b(cfg, rng);
  b.tokens().value.setZero();
  Mat c1 = test::coefficients(b, test::random_set(7, 1, 1, rng));
  Mat c2 = test::coefficients(b, test::random_set(4, 1, 1, rng));
  EXPECT_EQ(c1, c2);
  Mat expect = b.projection().value * b.rho_tok().eval(Mat::Zero(cfg.n_pool, cfg.d_v));
  EXPECT_LT((c1 - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Branch, SetVariantsArePermutationInvariant) {
  for (auto v : {BranchVariant::key, BranchVariant::attention, BranchVariant::mean, BranchVariant::sum,
                 BranchVariant::vidon}) {
    for (int dx : {1, 2}) {
      Rng rng(11 + dx);
      auto b = make_branch(small_config(v, dx, 2), rng);
      for (int m : {1, 7, 40}) {
        SensorSet s = test::random_set(m, dx, 2, rng);
        s.weights = test::uniform(m, 1, rng, 0.1, 1.0);
        Mat ref = test::coefficients(*b, s);
        for (int t = 0; t < 5; ++t) {
          Mat c = test::coefficients(*b, test::permuted(s, test::random_permutation(m, rng)));
          EXPECT_LT(test::max_rel_diff(ref, c), 1e-12) << to_string(v) << " M=" << m;
        }
      }
    }
  }
}

TEST(Branch, SetVariantsAcceptAnyCardinality) {
  for (auto v : {BranchVariant::key, BranchVariant::attention, BranchVariant::mean, BranchVariant::sum,
                 BranchVariant::vidon}) {
    Rng rng(3);
    auto b = make_branch(small_config(v), rng);
    for (int m : {1, 2, 13, 301}) {
      Mat c = test::coefficients(*b, test::random_set(m, 1, 1, rng));
      EXPECT_EQ(c.rows(), 5);
      EXPECT_EQ(c.cols(), 2);
      EXPECT_TRUE(c.allFinite());
    }
  }
}

TEST(PooledBranch, SumDoublesUnderDuplication) {
  Rng rng(21);
  PooledBranch b(small_config(BranchVariant::sum), rng);
  SensorSet s = test::random_set(12, 1, 1, rng);
  Mat once = pooled(b, s);
  Mat twice = pooled(b, concat(s, s));
  EXPECT_LE((twice - 2.0 * once).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, once.cwiseAbs().maxCoeff()));
}

TEST(PooledBranch, SumIsAdditiveUnderConcatenation) {
  Rng rng(22);
  PooledBranch b(small_config(BranchVariant::sum), rng);
  SensorSet s = test::random_set(5, 1, 1, rng);
  SensorSet t = test::random_set(8, 1, 1, rng);
  Mat lhs = pooled(b, concat(s, t));
  Mat rhs = pooled(b, s) + pooled(b, t);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PooledBranch, MeanInvariantUnderDuplication) {
  Rng rng(23);
  PooledBranch b(small_config(BranchVariant::mean), rng);
  SensorSet s = test::random_set(12, 1, 1, rng);
  Mat once = pooled(b, s);
  SensorSet k = concat(concat(s, s), s);
  EXPECT_LE((pooled(b, k) - once).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PooledBranch, AttentionOfConstantValuesIsConstant) {
  Rng rng(24);
  PooledBranch b(small_config(BranchVariant::attention), rng);
  Linear& last = b.phi().layers().back();
  last.weight().value.setZero();
  last.bias().value = test::uniform(1, 8, rng);
  Mat p1 = pooled(b, test::random_set(1, 1, 1, rng));
  Mat p2 = pooled(b, test::random_set(17, 1, 1, rng));
  EXPECT_LE((p1 - p2).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DeepONetBranch, ZeroFinalLayerGivesZeroCoefficients) {
  BranchConfig cfg = small_config(BranchVariant::deeponet);
  cfg.m_fixed = 6;
  Rng rng(31);
  DeepONetBranch b(cfg, rng);
  b.net().layers().back().weight().value.setZero();
  b.net().layers().back().bias().value.setZero();
  SensorSet s = test::random_set(6, 1, 1, rng);
  s.values.setZero();
  EXPECT_EQ(test::coefficients(b, s).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DeepONetBranch, PermutationChangesOutput) {
  BranchConfig cfg = small_config(BranchVariant::deeponet);
  cfg.m_fixed = 6;
  Rng rng(32);
  DeepONetBranch b(cfg, rng);
  SensorSet s = test::random_set(6, 1, 1, rng);
  Mat ref = test::coefficients(b, s);
  Mat c = test::coefficients(b, test::permuted(s, {1, 0, 2, 3, 4, 5}));
  EXPECT_GT((ref - c).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(DeepONetBranch, RejectsOtherSensorCounts) {
  BranchConfig cfg = small_config(BranchVariant::deeponet);
  cfg.m_fixed = 6;
  Rng rng(33);
  DeepONetBranch b(cfg, rng);
  EXPECT_THROW(test::coefficients(b, test::random_set(7, 1, 1, rng)), ValidationError);
}

TEST(VidonBranch, RepeatedSensorMatchesSingleSensor) {
  Rng rng(41);
  VidonBranch b(small_config(BranchVariant::vidon), rng);
  SensorSet one = test::random_set(1, 1, 1, rng);
  SensorSet five = one;
  for (int r = 0; r < 4; ++r) five = concat(five, one);
  Tape t1(false), t2(false);
  Mat h1 = t1.value(b.heads(t1, stack_sensor_sets({one})));
  Mat h5 = t2.value(b.heads(t2, stack_sensor_sets({five})));
  EXPECT_LE((h1 - h5).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Branch, RejectsEmptyAndNonfiniteSets) {
  Rng rng(42);
  auto b = make_branch(small_config(BranchVariant::key), rng);
  SensorSet s = test::random_set(3, 1, 1, rng);
  s.values(1, 0) = std::nan("");
  EXPECT_THROW(test::coefficients(*b, s), ValidationError);
}

TEST(ParameterCounts, DarcyDefaults) {
  const BenchmarkCard card = benchmark_card("darcy1d");
  const std::pair<BranchVariant, long long> expected[] = {
      {BranchVariant::key, 207842},      {BranchVariant::attention, 255021}, {BranchVariant::mean, 250765},
      {BranchVariant::sum, 250765},      {BranchVariant::deeponet, 281792},  {BranchVariant::vidon, 695893}};
  for (const auto& [v, n] : expected) {
    Model model(default_model_config(card, v), 0);
    EXPECT_EQ(model.param_count(), n) << to_string(v);
  }
}

TEST(ParameterCounts, DiffractionPooledAndVidon) {
  const BenchmarkCard card = benchmark_card("diffraction");
  const std::pair<BranchVariant, long long> expected[] = {{BranchVariant::attention, 367810},
                                                          {BranchVariant::mean, 363554},
                                                          {BranchVariant::sum, 363554},
                                                          {BranchVariant::vidon, 811622}};
  for (const auto& [v, n] : expected) {
    Model model(default_model_config(card, v), 0);
    EXPECT_EQ(model.param_count(), n) << to_string(v);
  }
}

TEST(BranchConfig, AttentionHeadsMustDivideDv) {
  BranchConfig cfg = small_config(BranchVariant::attention);
  cfg.heads = 3;
  EXPECT_THROW(cfg.validate(), ValidationError);
}
