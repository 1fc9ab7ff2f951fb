#pragma once

#include <functional>
#include <vector>

#include "setonet/linalg.hpp"
#include "setonet/random.hpp"

namespace setonet {

struct AdaptiveConfig {
  int seed_grid = 25;
  int proposal_grid = 128;
  double beta = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

// Tensor grid with `n` points per side including the end points, x-major.
Mat tensor_grid(int n, double lo, double hi);

// exp(beta * m) with m the min-max normalized |field|.
Vec adaptive_weights(const Vec& field, double beta);

// Proposal cells nearest to each seed point; these are never sampled.
std::vector<int> excluded_proposal_cells(const AdaptiveConfig& cfg);

struct AdaptiveSample {
  Mat points;                  // nq x 2, seed grid first
  std::vector<int> proposal;   // proposal-cell index of each sampled point
};

// The full seed grid, then nq - seed^2 proposal points drawn without
// replacement with probabilities proportional to the adaptive weights
// (Efraimidis-Spirakis keys).
AdaptiveSample adaptive_query_sample(const std::function<Vec(const Mat&)>& coarse_field, int nq,
                                     const AdaptiveConfig& cfg, Rng& rng);

}  // namespace setonet
