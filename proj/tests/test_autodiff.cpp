#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "setonet/errors.hpp"
#include "setonet/autodiff.hpp"
#include "setonet/model.hpp"
#include "test_util.hpp"

using namespace setonet;

namespace {

using LossFn = std::function<NodeId(Tape&)>;

double loss_value(const LossFn& f) {
  Tape tape(false);
  return tape.value(f(tape))(0, 0);
}

// Central differences on every entry of p against the tape gradient.
void check_gradient(Param& p, const LossFn& f, double tol = 1e-6, double h = 1e-5) {
  p.zero_grad();
  Tape tape;
  tape.backward(f(tape));
  const Mat analytic = p.grad;
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    const double x = p.value.data()[i];
    p.value.data()[i] = x + h;
    const double up = loss_value(f);
    p.value.data()[i] = x - h;
    const double dn = loss_value(f);
    p.value.data()[i] = x;
    const double fd = (up - dn) / (2.0 * h);
    const double a = analytic.data()[i];
    EXPECT_NEAR(a, fd, tol * std::max(1.0, std::abs(fd))) << p.name << "[" << i << "]";
  }
}

}  // namespace

TEST(Tape, ElementwiseAndMatrixOps) {
  Rng rng(1);
  Param a("a", test::uniform(4, 3, rng));
  Param b("b", test::uniform(3, 5, rng));
  Param bias("bias", test::uniform(1, 5, rng));
  Param row("row", test::uniform(1, 5, rng));
  Mat target = test::uniform(4, 5, rng);
  for (Activation act : {Activation::relu, Activation::tanh, Activation::softplus, Activation::gelu}) {
    LossFn f = [&](Tape& t) {
      NodeId h = t.affine(t.param(a), t.param(b), t.param(bias));
      h = t.activate(t.mul_row(h, t.param(row)), act);
      h = t.add(t.scale(h, 0.5), t.hadamard(h, h));
      return t.mse(h, target);
    };
    for (Param* p : {&a, &b, &bias, &row}) check_gradient(*p, f);
  }
}

TEST(Tape, GroupedOps) {
  Rng rng(2);
  const int groups = 3, m = 4, n = 2, d = 3;
  Param q("q", test::uniform(n, d, rng));
  Param k("k", test::uniform(groups * m, d, rng));
  Param a("a", test::uniform(groups * n, m, rng));
  Param as("as", test::uniform(n, m, rng));
  Param x("x", test::uniform(groups * m, d, rng));
  Mat w = test::uniform(groups, m, rng, 0.1, 1.0);
  LossFn f = [&](Tape& t) {
    NodeId s = t.group_matmul_nt(t.param(q), t.param(k), groups);        // groups*n x m
    NodeId sc = t.scale_cols(t.activate(s, Activation::tanh), w, n);
    NodeId y1 = t.group_matmul(t.add(sc, t.param(a)), t.param(x), groups, false);
    NodeId y2 = t.group_matmul(t.param(as), t.param(x), groups, true);
    NodeId sm = t.segment_softmax(t.slice_cols(t.param(x), 0, 1), m);   // groups*m x 1
    NodeId pooled = t.segment_sum(t.hadamard(t.matmul(sm, t.constant(Mat::Ones(1, d))), t.param(x)), m);
    NodeId cat = t.concat_rows({t.add(y1, y2), pooled});
    NodeId r = t.reshape(t.concat_cols({cat, cat}), groups * n + groups, 2 * d);
    return t.mse(r, Mat::Constant(groups * n + groups, 2 * d, 0.3));
  };
  for (Param* p : {&q, &k, &a, &as, &x}) check_gradient(*p, f);
}

TEST(Tape, SynthesizeMatchesReferenceAndGradients) {
  Rng rng(3);
  const int groups = 2, p = 3, dout = 2, nq = 4;
  Param coef("coef", test::uniform(groups * p, dout, rng));
  Param basis("basis", test::uniform(groups * nq, p * dout, rng));
  Param tau0("tau0", test::uniform(groups * nq, dout, rng));
  Param b0("b0", test::uniform(1, dout, rng));
  Mat target = test::uniform(groups * nq, dout, rng);

  Tape tape(false);
  Mat pred = tape.value(tape.synthesize(tape.param(coef), tape.param(basis), tape.param(tau0), tape.param(b0), groups, p,
                                        dout, false));
  for (int g = 0; g < groups; ++g) {
    Mat ref = synthesize(coef.value.middleRows(g * p, p), basis.value.middleRows(g * nq, nq), b0.value.row(0),
                         tau0.value.middleRows(g * nq, nq));
    EXPECT_LT((pred.middleRows(g * nq, nq) - ref).cwiseAbs().maxCoeff(), 1e-15);
  }

  LossFn f = [&](Tape& t) {
    return t.mse(t.synthesize(t.param(coef), t.param(basis), t.param(tau0), t.param(b0), groups, p, dout, false),
                 target);
  };
  for (Param* q : {&coef, &basis, &tau0, &b0}) check_gradient(*q, f);
}

TEST(Tape, SharedBasisSynthesize) {
  Rng rng(4);
  const int groups = 3, p = 2, nq = 5;
  Param coef("coef", test::uniform(groups * p, 1, rng));
  Param basis("basis", test::uniform(nq, p, rng));
  Mat target = test::uniform(groups * nq, 1, rng);
  LossFn f = [&](Tape& t) {
    return t.mse(t.synthesize(t.param(coef), t.param(basis), kNoNode, kNoNode, groups, p, 1, true), target);
  };
  check_gradient(coef, f);
  check_gradient(basis, f);
}

TEST(Tape, BackwardNeedsScalar) {
  Tape t;
  NodeId x = t.constant(Mat::Zero(2, 2));
  EXPECT_THROW(t.backward(x), ValidationError);
}

TEST(Model, TrunkGradientMatchesFiniteDifference) {
  BenchmarkCard card = benchmark_card("derivative");
  ModelConfig cfg = default_model_config(card, BranchVariant::key);
  cfg.branch.key_hidden = {8};
  cfg.branch.value_hidden = {8};
  cfg.branch.rho_tok_hidden = {8};
  cfg.branch.n_pool = 5;
  cfg.branch.p = cfg.trunk.p = 4;
  cfg.trunk.hidden = {8, 8};
  Model model(cfg, 7);
  Rng rng(5);
  std::vector<SensorSet> sets;
  for (int i = 0; i < 3; ++i) {
    SensorSet s = test::random_set(6, 1, 1, rng);
    sets.push_back(s);
  }
  Batch batch;
  batch.sensors = stack_sensor_sets(sets);
  batch.queries.size = 3;
  batch.queries.nq = 4;
  batch.queries.points = test::uniform(4, 1, rng);
  batch.queries.targets = test::uniform(12, 1, rng);

  LossFn f = [&](Tape& t) { return t.mse(model.forward(t, batch), batch.queries.targets); };
  // Relative agreement at step 1e-5 on a random trunk weight, then every
  // trunk and branch parameter at a looser absolute tolerance.
  Param& w = model.trunk().net().layers()[1].weight();
  model.visit([](Param& p) { p.zero_grad(); });
  Tape tape;
  tape.backward(f(tape));
  const double analytic = w.grad(2, 3);
  const double x = w.value(2, 3);
  w.value(2, 3) = x + 1e-5;
  const double up = loss_value(f);
  w.value(2, 3) = x - 1e-5;
  const double dn = loss_value(f);
  w.value(2, 3) = x;
  const double fd = (up - dn) / 2e-5;
  EXPECT_LT(std::abs(analytic - fd), 1e-4 * std::max(std::abs(fd), 1e-8));

  model.visit([&](Param& p) { check_gradient(p, f, 1e-5); });
}
