#include "setonet/datagen/green.hpp"

#include <cmath>
#include <numbers>

#include "setonet/errors.hpp"

namespace setonet {

std::vector<PointSource> sample_sources(Rng& rng, int m, double lo, double hi, double s_lo, double s_hi) {
  SETONET_REQUIRE(m >= 1, "need at least one source");
  std::vector<PointSource> out(m);
  const double a = std::log(s_lo);
  const double b = std::log(s_hi);
  for (auto& s : out) {
    s.x = rng.uniform(lo, hi);
    s.y = rng.uniform(lo, hi);
    s.s = std::exp(rng.uniform(a, b));
  }
  return out;
}

Vec heat_field(const std::vector<PointSource>& sources, const Mat& queries, double eps) {
  if (queries.cols() != 2) throw ValidationError("heat_field: queries must be 2D");
  const double e2 = eps * eps;
  const double c = 1.0 / (4.0 * std::numbers::pi);
  Vec u = Vec::Zero(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    double acc = 0.0;
    for (const auto& s : sources) {
      const double dx = queries(q, 0) - s.x;
      const double dy = queries(q, 1) - s.y;
      acc += s.s * std::log(dx * dx + dy * dy + e2);
    }
    u(q) = c * acc;
  }
  return u;
}

Vec heat_source_density(const std::vector<PointSource>& sources, const Mat& queries, double eps) {
  const double e2 = eps * eps;
  Vec out = Vec::Zero(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q)
    for (const auto& s : sources) {
      const double dx = queries(q, 0) - s.x;
      const double dy = queries(q, 1) - s.y;
      const double d = dx * dx + dy * dy + e2;
      out(q) += s.s * e2 / (std::numbers::pi * d * d);
    }
  return out;
}

double bessel_k0(double x) {
  if (!(x > 0.0)) throw ValidationError("bessel_k0: argument must be positive");
  if (x <= 2.0) {
    // K0 = -(ln(x/2) + gamma) I0 + sum_k (x^2/4)^k / (k!)^2 H_k
    const double y = 0.25 * x * x;
    double term = 1.0;
    double i0 = 1.0;
    double tail = 0.0;
    double h = 0.0;
    for (int k = 1; k < 60; ++k) {
      term *= y / (static_cast<double>(k) * k);
      h += 1.0 / k;
      i0 += term;
      tail += term * h;
      if (term < 1e-18 * i0) break;
    }
    return -(std::log(0.5 * x) + std::numbers::egamma) * i0 + tail;
  }
  // Integrand decays double exponentially; step 0.05 is far past round-off.
  const double dt = 0.05;
  double sum = 0.5 * std::exp(-x);
  for (int k = 1; k < 4000; ++k) {
    const double v = std::exp(-x * std::cosh(k * dt));
    sum += v;
    if (v < 1e-18 * sum) break;
  }
  return sum * dt;
}

double advdiff_green(double rx, double ry, const AdvDiffParams& p) {
  const double d = p.diffusivity;
  const double vnorm = std::hypot(p.vx, p.vy);
  const double r = std::max(std::hypot(rx, ry), p.r_min);
  const double arg = vnorm * r / (2.0 * d);
  return std::exp((p.vx * rx + p.vy * ry) / (2.0 * d)) * bessel_k0(arg) / (2.0 * std::numbers::pi * d);
}

Vec advdiff_field(const std::vector<PointSource>& sources, const Mat& queries, const AdvDiffParams& p) {
  if (queries.cols() != 2) throw ValidationError("advdiff_field: queries must be 2D");
  Vec u = Vec::Zero(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q)
    for (const auto& s : sources) u(q) += s.s * advdiff_green(queries(q, 0) - s.x, queries(q, 1) - s.y, p);
  return u;
}

}  // namespace setonet
