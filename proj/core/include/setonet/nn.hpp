#pragma once

#include <string>
#include <vector>

#include "setonet/autodiff.hpp"
#include "setonet/random.hpp"

namespace setonet {

// Fan-in uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)), for weight and bias.
class Linear {
public:
  Linear() = default;
  Linear(const std::string& name, int in, int out, Rng& rng, bool bias = true);

  NodeId forward(Tape& tape, NodeId x);
  Mat eval(const Mat& x) const;
  void visit(const ParamVisitor& f);

  int in() const { return static_cast<int>(weight_.value.rows()); }
  int out() const { return static_cast<int>(weight_.value.cols()); }
  bool has_bias() const { return has_bias_; }
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

private:
  Param weight_;
  Param bias_;
  bool has_bias_ = true;
};

// Feedforward map: widths {in, hidden..., out}, activation between layers,
// none after the last one.
class Mlp {
public:
  Mlp() = default;
  Mlp(const std::string& name, const std::vector<int>& widths, Activation act, Rng& rng);

  NodeId forward(Tape& tape, NodeId x);
  Mat eval(const Mat& x) const;
  void visit(const ParamVisitor& f);

  const std::vector<int>& widths() const { return widths_; }
  Activation activation() const { return act_; }
  std::vector<Linear>& layers() { return layers_; }
  int in() const { return widths_.front(); }
  int out() const { return widths_.back(); }

private:
  std::vector<int> widths_;
  Activation act_ = Activation::relu;
  std::vector<Linear> layers_;
};

// Sum of (in + 1) * out over consecutive widths.
long long mlp_param_count(const std::vector<int>& widths);

long long count_params(const std::function<void(const ParamVisitor&)>& visit);

}  // namespace setonet
