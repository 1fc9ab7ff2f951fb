#pragma once

#include "setonet/linalg.hpp"
#include "setonet/random.hpp"

namespace setonet {

// k(x, x') = variance * exp(-(x - x')^2 / (2 length^2))
double se_kernel(double x, double xp, double length, double variance);

// Zero-mean draws with the squared-exponential covariance on a fixed grid,
// via Cholesky of K + jitter I. The jitter starts at 1e-10 and grows x10 up
// to 1e-6 until the factorization succeeds.
class GrfSampler {
public:
  GrfSampler(const Vec& grid, double length, double variance);

  Vec sample(Rng& rng) const;
  double jitter() const { return jitter_; }
  const Vec& grid() const { return grid_; }

private:
  Vec grid_;
  Mat chol_;  // lower factor
  double jitter_ = 0.0;
};

Vec uniform_grid(int n, double lo, double hi);

}  // namespace setonet
