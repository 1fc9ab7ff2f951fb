#include "setonet/encoding.hpp"

#include <cmath>

#include "setonet/errors.hpp"

namespace setonet {

void PositionalEncodingConfig::validate() const {
  SETONET_REQUIRE(coordinate_dim >= 1, "positional encoding: coordinate_dim must be >= 1");
  SETONET_REQUIRE(embed_dim > 0 && embed_dim % (2 * coordinate_dim) == 0,
                  "positional encoding: embed_dim must be a positive multiple of 2*coordinate_dim");
  SETONET_REQUIRE(max_scale > 0.0 && std::isfinite(max_scale), "positional encoding: max_scale must be positive");
}

std::vector<double> pe_frequencies(const PositionalEncodingConfig& cfg) {
  cfg.validate();
  const int f = cfg.frequencies_per_coordinate();
  std::vector<double> w(f, 1.0);
  if (f == 1) return w;
  const double top = 1.0 / cfg.max_scale;
  for (int i = 0; i < f; ++i) w[i] = std::pow(top, static_cast<double>(i) / (f - 1));
  return w;
}

Mat encode_positions(const Mat& locations, const PositionalEncodingConfig& cfg) {
  cfg.validate();
  if (locations.cols() != cfg.coordinate_dim)
    throw ValidationError("positional encoding: locations have " + std::to_string(locations.cols()) +
                          " columns, expected " + std::to_string(cfg.coordinate_dim));
  const auto w = pe_frequencies(cfg);
  const int f = static_cast<int>(w.size());
  Mat out(locations.rows(), cfg.embed_dim);
  for (Eigen::Index i = 0; i < locations.rows(); ++i) {
    for (int d = 0; d < cfg.coordinate_dim; ++d) {
      const double x = locations(i, d);
      const int base = d * 2 * f;
      for (int j = 0; j < f; ++j) {
        out(i, base + j) = std::sin(w[j] * x);
        out(i, base + f + j) = std::cos(w[j] * x);
      }
    }
  }
  return out;
}

Mat softmax_rows(const Mat& s) {
  Mat out(s.rows(), s.cols());
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double mx = s.row(r).maxCoeff();
    RowVec e = (s.row(r).array() - mx).exp();
    out.row(r) = e / e.sum();
  }
  return out;
}

Mat weighted_mixing(const Mat& s, const std::function<double(double)>& a, const RowVec& w) {
  if (w.size() != s.cols()) throw ValidationError("weighted_mixing: weight count mismatch");
  const double total = w.sum();
  if (!(total > 0.0)) throw ValidationError("weighted_mixing: weights must have positive sum");
  Mat out = s.unaryExpr(a);
  out.array().rowwise() *= (w / total).array();
  return out;
}

Mat tsa(const Mat& q, const Mat& k, const Mat& v, const MixingFn& mixing) {
  if (q.cols() != k.cols()) throw ValidationError("tsa: key dimension mismatch between Q and K");
  if (k.rows() != v.rows()) throw ValidationError("tsa: K and V disagree on the number of sensors");
  const Mat s = (q * k.transpose()) / std::sqrt(static_cast<double>(q.cols()));
  const Mat a = mixing(s);
  return a * v;
}

}  // namespace setonet
