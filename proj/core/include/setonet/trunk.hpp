#pragma once

#include <vector>

#include "setonet/autodiff.hpp"
#include "setonet/nn.hpp"

namespace setonet {

struct TrunkConfig {
  int dy = 1;
  int p = 32;
  int dout = 1;
  std::vector<int> hidden{256, 256, 256};
  Activation act = Activation::relu;
  bool tau0 = false;  // one extra d_out block added to every prediction

  void validate() const;
};

struct TrunkOutput {
  NodeId basis = kNoNode;  // N x p*d_out, block k holds t_k(y)
  NodeId tau0 = kNoNode;   // N x d_out
};

class Trunk {
public:
  Trunk() = default;
  Trunk(const TrunkConfig& cfg, Rng& rng);

  TrunkOutput forward(Tape& tape, const Mat& points);
  // Basis as a plain matrix (N x p*d_out), no tau0 block.
  Mat basis(const Mat& points);
  void visit(const ParamVisitor& f) { net_.visit(f); }

  const TrunkConfig& config() const { return cfg_; }
  Mlp& net() { return net_; }

private:
  TrunkConfig cfg_;
  Mlp net_;
};

// prediction_q = sum_k b_k * t_k(y_q) + b_0 (+ tau0_q), one sample.
// coef: p x d_out, basis: N x p*d_out, bias: d_out or empty, tau0: N x d_out or empty.
Mat synthesize(const Mat& coef, const Mat& basis, const RowVec& bias, const Mat& tau0 = Mat());

}  // namespace setonet
