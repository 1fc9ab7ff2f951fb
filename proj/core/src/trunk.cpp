#include "setonet/trunk.hpp"

#include "setonet/errors.hpp"

namespace setonet {

void TrunkConfig::validate() const {
  SETONET_REQUIRE(dy >= 1 && p >= 1 && dout >= 1, "trunk: d_y, p and d_out must be >= 1");
  for (int w : hidden) SETONET_REQUIRE(w > 0, "trunk: hidden widths must be positive");
}

Trunk::Trunk(const TrunkConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg.validate();
  std::vector<int> w{cfg.dy};
  w.insert(w.end(), cfg.hidden.begin(), cfg.hidden.end());
  w.push_back((cfg.p + (cfg.tau0 ? 1 : 0)) * cfg.dout);
  net_ = Mlp("trunk", w, cfg.act, rng);
}

TrunkOutput Trunk::forward(Tape& tape, const Mat& points) {
  if (points.cols() != cfg_.dy)
    throw ValidationError("trunk: query points have " + std::to_string(points.cols()) + " columns, expected d_y=" +
                          std::to_string(cfg_.dy));
  if (!points.allFinite()) throw ValidationError("trunk: nonfinite query points");
  NodeId out = net_.forward(tape, tape.constant(points));
  if (!cfg_.tau0) return {out, kNoNode};
  const int pd = cfg_.p * cfg_.dout;
  return {tape.slice_cols(out, 0, pd), tape.slice_cols(out, pd, cfg_.dout)};
}

Mat Trunk::basis(const Mat& points) {
  Tape tape(false);
  return tape.value(forward(tape, points).basis);
}

Mat synthesize(const Mat& coef, const Mat& basis, const RowVec& bias, const Mat& tau0) {
  const Eigen::Index p = coef.rows();
  const Eigen::Index dout = coef.cols();
  if (basis.cols() != p * dout) throw ValidationError("synthesize: basis width differs from p*d_out");
  if (bias.size() != 0 && bias.size() != dout) throw ValidationError("synthesize: bias size differs from d_out");
  if (tau0.size() != 0 && (tau0.rows() != basis.rows() || tau0.cols() != dout))
    throw ValidationError("synthesize: tau0 shape mismatch");
  Mat out = Mat::Zero(basis.rows(), dout);
  for (Eigen::Index q = 0; q < basis.rows(); ++q)
    for (Eigen::Index c = 0; c < dout; ++c) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < p; ++k) acc += coef(k, c) * basis(q, k * dout + c);
      out(q, c) = acc;
    }
  if (bias.size() != 0) out.rowwise() += bias;
  if (tau0.size() != 0) out += tau0;
  return out;
}

}  // namespace setonet
