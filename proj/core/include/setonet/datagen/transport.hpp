#pragma once

#include "setonet/linalg.hpp"
#include "setonet/random.hpp"

namespace setonet {

// Densities and potentials live on an n x n tensor grid stored as an n x n
// matrix, entry (i, j) at (grid[i], grid[j]). Cost is |x - y|^2.

struct SinkhornOptions {
  double eps = 0.05;
  int max_iterations = 2000;
  double tolerance = 1e-6;  // L1 error of the row marginal
  bool eps_scaling = true;
};

struct SinkhornResult {
  Mat f;
  Mat g;
  int iterations = 0;
  double row_error = 0.0;  // L1
  double col_error = 0.0;  // L1
};

// Log-domain Sinkhorn with separable log-sum-exp. Column marginal is exact
// after each g update; the row error is read off the next f update. Throws
// NumericalError if the tolerance is not met.
SinkhornResult sinkhorn_log(const Mat& a, const Mat& b, const Vec& grid, const SinkhornOptions& opt);

// Full coupling (n^2 x n^2), rows index x cells in row-major order. For tests.
Mat sinkhorn_coupling(const SinkhornResult& r, const Vec& grid, double eps);

// Barycentric projection T(x) = sum_y P(x, y) y / sum_y P(x, y) at every grid
// node, n^2 x 2 in row-major cell order.
Mat barycentric_map(const Mat& g, const Vec& grid, double eps);

// Bilinear interpolation of per-node values (n^2 x k) at arbitrary points,
// clamped to the grid.
Mat bilinear_interpolate(const Mat& nodes, const Vec& grid, const Mat& points);

struct GaussianMixture2 {
  double mean[2][2] = {{0, 0}, {0, 0}};
  double var[2][2] = {{1, 1}, {1, 1}};
  double weight[2] = {0.5, 0.5};

  double density(double x, double y) const;
  Mat sample(Rng& rng, int n) const;
};

GaussianMixture2 isotropic_gaussian(double mx, double my, double var);

// Balanced two-component mixture: means U[-2,2]^2, variances U[0.1, 1].
GaussianMixture2 sample_source_mixture(Rng& rng);

// Normalized cell masses of a density on the grid, floored at 1e-300.
Mat grid_masses(const GaussianMixture2& rho, const Vec& grid);

struct OtParams {
  double lo = -5.0;
  double hi = 5.0;
  int grid = 80;
  int samples = 512;
  int queries = 1024;
  double target_var = 0.5;
  SinkhornOptions sinkhorn;
};

struct OtSample {
  GaussianMixture2 source;
  Mat samples;       // samples x 2 drawn from the source
  Mat queries;       // queries x 2, uniform on the box
  Mat displacement;  // T(y) - y at the queries
  Mat velocity;      // grid^2 x 2, T(x) - x at the nodes
  SinkhornResult sinkhorn;
};

OtSample ot_sample(Rng& rng, const OtParams& p);

// Transport problem between two given densities, displacement at the nodes.
Mat ot_displacement_field(const GaussianMixture2& rho0, const GaussianMixture2& rho1, const OtParams& p,
                          SinkhornResult* info = nullptr);

}  // namespace setonet
