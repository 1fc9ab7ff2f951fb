#include "setonet/nn.hpp"

#include <cmath>

#include "setonet/errors.hpp"

namespace setonet {

namespace {

Mat uniform_mat(Eigen::Index r, Eigen::Index c, double bound, Rng& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

Linear::Linear(const std::string& name, int in, int out, Rng& rng, bool bias) : has_bias_(bias) {
  SETONET_REQUIRE(in > 0 && out > 0, "linear layer '" + name + "' needs positive widths");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = Param(name + ".weight", uniform_mat(in, out, bound, rng));
  if (has_bias_) bias_ = Param(name + ".bias", uniform_mat(1, out, bound, rng));
}

NodeId Linear::forward(Tape& tape, NodeId x) {
  return tape.affine(x, tape.param(weight_), has_bias_ ? tape.param(bias_) : kNoNode);
}

Mat Linear::eval(const Mat& x) const {
  Mat y;
  y.noalias() = x * weight_.value;
  if (has_bias_) y.rowwise() += bias_.value.row(0);
  return y;
}

void Linear::visit(const ParamVisitor& f) {
  f(weight_);
  if (has_bias_) f(bias_);
}

Mlp::Mlp(const std::string& name, const std::vector<int>& widths, Activation act, Rng& rng)
    : widths_(widths), act_(act) {
  SETONET_REQUIRE(widths.size() >= 2, "mlp '" + name + "' needs at least input and output widths");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    layers_.emplace_back(name + "." + std::to_string(i), widths[i], widths[i + 1], rng);
}

NodeId Mlp::forward(Tape& tape, NodeId x) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].forward(tape, x);
    if (i + 1 < layers_.size()) x = tape.activate(x, act_);
  }
  return x;
}

Mat Mlp::eval(const Mat& x) const {
  Mat h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].eval(h);
    if (i + 1 < layers_.size()) h = h.unaryExpr([this](double v) { return apply_activation(act_, v); });
  }
  return h;
}

void Mlp::visit(const ParamVisitor& f) {
  for (auto& l : layers_) l.visit(f);
}

long long mlp_param_count(const std::vector<int>& widths) {
  long long n = 0;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    n += static_cast<long long>(widths[i] + 1) * widths[i + 1];
  return n;
}

long long count_params(const std::function<void(const ParamVisitor&)>& visit) {
  long long n = 0;
  visit([&n](Param& p) { n += p.size(); });
  return n;
}

}  // namespace setonet
