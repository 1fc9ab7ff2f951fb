#pragma once

#include <vector>

#include "setonet/linalg.hpp"
#include "setonet/random.hpp"

namespace setonet {

struct PointSource {
  double x = 0.0;
  double y = 0.0;
  double s = 0.0;
};

// Sources uniform in [lo, hi]^2 with strengths log-uniform on [s_lo, s_hi]
// (uniform in natural log).
std::vector<PointSource> sample_sources(Rng& rng, int m, double lo, double hi, double s_lo, double s_hi);

// u(q) = sum_i s_i / (2 pi) * log sqrt(|q - x_i|^2 + eps^2)
Vec heat_field(const std::vector<PointSource>& sources, const Mat& queries, double eps);

// Laplacian of the softened field: sum_i s_i eps^2 / (pi (r^2 + eps^2)^2).
Vec heat_source_density(const std::vector<PointSource>& sources, const Mat& queries, double eps);

// Modified Bessel function K0 for x > 0. Power series up to x = 2, beyond that
// the trapezoid rule on K0(x) = int_0^inf exp(-x cosh t) dt.
double bessel_k0(double x);

struct AdvDiffParams {
  double diffusivity = 0.1;
  double vx = 1.0;
  double vy = 0.0;
  double r_min = 1e-3;  // |r| is clamped from below at this radius
};

// g(r) = exp(v.r / 2d) K0(|v||r| / 2d) / (2 pi d)
double advdiff_green(double rx, double ry, const AdvDiffParams& p);

Vec advdiff_field(const std::vector<PointSource>& sources, const Mat& queries, const AdvDiffParams& p);

}  // namespace setonet
