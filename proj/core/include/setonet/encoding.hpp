#pragma once

#include <functional>
#include <vector>

#include "setonet/linalg.hpp"

namespace setonet {

struct PositionalEncodingConfig {
  int embed_dim = 64;
  double max_scale = 0.1;
  int coordinate_dim = 1;

  void validate() const;
  int frequencies_per_coordinate() const { return embed_dim / (2 * coordinate_dim); }
};

// Geometric ladder from 1 to 1/max_scale, one entry per sin/cos pair.
std::vector<double> pe_frequencies(const PositionalEncodingConfig& cfg);

// Per coordinate d the block [sin(w_f x_d) for f..., cos(w_f x_d) for f...];
// blocks are concatenated in coordinate order.
Mat encode_positions(const Mat& locations, const PositionalEncodingConfig& cfg);

Mat softmax_rows(const Mat& s);

// A(S)_{k,i} = w_i a(S_{k,i}) / sum_j w_j
Mat weighted_mixing(const Mat& s, const std::function<double(double)>& a, const RowVec& w);

using MixingFn = std::function<Mat(const Mat&)>;

// A(Q K^T / sqrt(d_k)) V
Mat tsa(const Mat& q, const Mat& k, const Mat& v, const MixingFn& mixing);

}  // namespace setonet
