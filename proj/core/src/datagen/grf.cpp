#include "setonet/datagen/grf.hpp"

#include <cmath>

#include "setonet/errors.hpp"

namespace setonet {

double se_kernel(double x, double xp, double length, double variance) {
  const double d = x - xp;
  return variance * std::exp(-d * d / (2.0 * length * length));
}

Vec uniform_grid(int n, double lo, double hi) {
  SETONET_REQUIRE(n >= 2, "uniform grid needs at least two points");
  Vec g(n);
  for (int i = 0; i < n; ++i) g(i) = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return g;
}

GrfSampler::GrfSampler(const Vec& grid, double length, double variance) : grid_(grid) {
  SETONET_REQUIRE(length > 0.0 && variance > 0.0, "GRF: length scale and variance must be positive");
  const Eigen::Index n = grid.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = se_kernel(grid(i), grid(j), length, variance);
  for (double jitter = 1e-10; jitter <= 1e-6 * 1.0000001; jitter *= 10.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(k + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      jitter_ = jitter;
      return;
    }
  }
  throw NumericalError("GRF: Cholesky factorization failed even with jitter 1e-6");
}

Vec GrfSampler::sample(Rng& rng) const {
  Vec z(grid_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return chol_.triangularView<Eigen::Lower>() * z;
}

}  // namespace setonet
