#include "setonet/datagen/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "setonet/errors.hpp"

namespace setonet {

namespace {

constexpr double kUnderflow = 1e-280;

struct CostTables {
  Mat ce;  // (x_i - x_j)^2 / eps
  Mat k;   // exp(-ce)
};

CostTables cost_tables(const Vec& grid, double eps) {
  const Eigen::Index n = grid.size();
  CostTables t{Mat(n, n), Mat(n, n)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = grid(i) - grid(j);
      t.ce(i, j) = d * d / eps;
      t.k(i, j) = std::exp(-t.ce(i, j));
    }
  return t;
}

// out(i1, i2) = log sum_{j1, j2} exp(h(j1, j2) + lw1(j1) + lw2(j2) - ce(i1, j1) - ce(i2, j2))
// One axis at a time. Each axis is a matrix product on max-shifted exponentials;
// entries whose sum underflows are recomputed with an explicit log-sum-exp.
Mat lse_separable(const Mat& h, const CostTables& t, const Vec* lw1, const Vec* lw2) {
  const Eigen::Index n = h.rows();

  Mat hr = h;
  if (lw2) hr.rowwise() += lw2->transpose();
  Vec m1 = hr.rowwise().maxCoeff();
  Mat v = (hr.colwise() - m1).array().exp().matrix();
  Mat s1 = v * t.k;  // (j1, i2), k symmetric
  Mat tmid(n, n);
  for (Eigen::Index j1 = 0; j1 < n; ++j1)
    for (Eigen::Index i2 = 0; i2 < n; ++i2) {
      if (s1(j1, i2) > kUnderflow) {
        tmid(j1, i2) = m1(j1) + std::log(s1(j1, i2));
      } else {
        double mx = -INFINITY;
        for (Eigen::Index j2 = 0; j2 < n; ++j2) mx = std::max(mx, hr(j1, j2) - t.ce(i2, j2));
        double acc = 0.0;
        for (Eigen::Index j2 = 0; j2 < n; ++j2) acc += std::exp(hr(j1, j2) - t.ce(i2, j2) - mx);
        tmid(j1, i2) = mx + std::log(acc);
      }
    }

  if (lw1) tmid.colwise() += *lw1;
  RowVec m2 = tmid.colwise().maxCoeff();
  Mat w = (tmid.rowwise() - m2).array().exp().matrix();
  Mat s2 = t.k * w;  // (i1, i2)
  Mat out(n, n);
  for (Eigen::Index i1 = 0; i1 < n; ++i1)
    for (Eigen::Index i2 = 0; i2 < n; ++i2) {
      if (s2(i1, i2) > kUnderflow) {
        out(i1, i2) = m2(i2) + std::log(s2(i1, i2));
      } else {
        double mx = -INFINITY;
        for (Eigen::Index j1 = 0; j1 < n; ++j1) mx = std::max(mx, tmid(j1, i2) - t.ce(i1, j1));
        double acc = 0.0;
        for (Eigen::Index j1 = 0; j1 < n; ++j1) acc += std::exp(tmid(j1, i2) - t.ce(i1, j1) - mx);
        out(i1, i2) = mx + std::log(acc);
      }
    }
  return out;
}

// Potential update against the other side's potential: eps log a - eps LSE.
Mat potential_update(const Mat& other, const Mat& log_mass, const CostTables& t, double eps) {
  return eps * (log_mass - lse_separable(other / eps, t, nullptr, nullptr));
}

double marginal_l1(const Mat& mass, const Mat& pot, const Mat& next, double eps) {
  return (mass.array() * (((pot - next) / eps).array().exp() - 1.0).abs()).sum();
}

}  // namespace

SinkhornResult sinkhorn_log(const Mat& a, const Mat& b, const Vec& grid, const SinkhornOptions& opt) {
  const Eigen::Index n = grid.size();
  SETONET_REQUIRE(a.rows() == n && a.cols() == n && b.rows() == n && b.cols() == n,
                  "sinkhorn: density shape does not match the grid");
  SETONET_REQUIRE(opt.eps > 0.0, "sinkhorn: eps must be positive");
  const Mat la = a.array().log().matrix();
  const Mat lb = b.array().log().matrix();

  SinkhornResult r;
  r.f = Mat::Zero(n, n);
  r.g = Mat::Zero(n, n);

  std::vector<double> schedule;
  if (opt.eps_scaling)
    for (double e = 64.0 * opt.eps; e > opt.eps * 1.5; e *= 0.5) schedule.push_back(e);
  for (double e : schedule) {
    const CostTables t = cost_tables(grid, e);
    for (int it = 0; it < 50; ++it) {
      r.f = potential_update(r.g, la, t, e);
      r.g = potential_update(r.f, lb, t, e);
      ++r.iterations;
    }
  }

  const double eps = opt.eps;
  const CostTables t = cost_tables(grid, eps);
  r.f = potential_update(r.g, la, t, eps);
  for (int it = 0; it < opt.max_iterations; ++it) {
    r.g = potential_update(r.f, lb, t, eps);
    Mat fh = potential_update(r.g, la, t, eps);
    ++r.iterations;
    r.row_error = marginal_l1(a, r.f, fh, eps);
    if (!std::isfinite(r.row_error)) throw NumericalError("sinkhorn: nonfinite potentials");
    if (r.row_error < opt.tolerance) {
      r.col_error = marginal_l1(b, r.g, potential_update(r.f, lb, t, eps), eps);
      return r;
    }
    r.f = std::move(fh);
  }
  throw NumericalError("sinkhorn: marginal error " + std::to_string(r.row_error) + " after " +
                       std::to_string(opt.max_iterations) + " iterations");
}

Mat sinkhorn_coupling(const SinkhornResult& r, const Vec& grid, double eps) {
  const Eigen::Index n = grid.size();
  Mat p(n * n, n * n);
  for (Eigen::Index i1 = 0; i1 < n; ++i1)
    for (Eigen::Index i2 = 0; i2 < n; ++i2)
      for (Eigen::Index j1 = 0; j1 < n; ++j1)
        for (Eigen::Index j2 = 0; j2 < n; ++j2) {
          const double d1 = grid(i1) - grid(j1);
          const double d2 = grid(i2) - grid(j2);
          p(i1 * n + i2, j1 * n + j2) = std::exp((r.f(i1, i2) + r.g(j1, j2) - d1 * d1 - d2 * d2) / eps);
        }
  return p;
}

Mat barycentric_map(const Mat& g, const Vec& grid, double eps) {
  const Eigen::Index n = grid.size();
  const CostTables t = cost_tables(grid, eps);
  // Coordinates shifted to be positive so their logs exist.
  const double shift = 1.0 - grid.minCoeff();
  const Vec ly = (grid.array() + shift).log().matrix();
  const Mat h = g / eps;
  const Mat den = lse_separable(h, t, nullptr, nullptr);
  const Mat num1 = lse_separable(h, t, &ly, nullptr);
  const Mat num2 = lse_separable(h, t, nullptr, &ly);
  Mat out(n * n, 2);
  for (Eigen::Index i1 = 0; i1 < n; ++i1)
    for (Eigen::Index i2 = 0; i2 < n; ++i2) {
      out(i1 * n + i2, 0) = std::exp(num1(i1, i2) - den(i1, i2)) - shift;
      out(i1 * n + i2, 1) = std::exp(num2(i1, i2) - den(i1, i2)) - shift;
    }
  return out;
}

Mat bilinear_interpolate(const Mat& nodes, const Vec& grid, const Mat& points) {
  const Eigen::Index n = grid.size();
  SETONET_REQUIRE(nodes.rows() == n * n, "bilinear_interpolate: node count does not match the grid");
  const double lo = grid(0);
  const double h = (grid(n - 1) - grid(0)) / static_cast<double>(n - 1);
  auto locate = [&](double x, Eigen::Index& i, double& s) {
    const double u = std::clamp((x - lo) / h, 0.0, static_cast<double>(n - 1));
    i = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), n - 2);
    s = u - static_cast<double>(i);
  };
  Mat out(points.rows(), nodes.cols());
  for (Eigen::Index q = 0; q < points.rows(); ++q) {
    Eigen::Index i, j;
    double s, t;
    locate(points(q, 0), i, s);
    locate(points(q, 1), j, t);
    out.row(q) = (1 - s) * (1 - t) * nodes.row(i * n + j) + s * (1 - t) * nodes.row((i + 1) * n + j) +
                 (1 - s) * t * nodes.row(i * n + j + 1) + s * t * nodes.row((i + 1) * n + j + 1);
  }
  return out;
}

double GaussianMixture2::density(double x, double y) const {
  double acc = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double dx = x - mean[c][0];
    const double dy = y - mean[c][1];
    acc += weight[c] / (2.0 * std::numbers::pi * std::sqrt(var[c][0] * var[c][1])) *
           std::exp(-0.5 * (dx * dx / var[c][0] + dy * dy / var[c][1]));
  }
  return acc;
}

Mat GaussianMixture2::sample(Rng& rng, int n) const {
  Mat out(n, 2);
  for (int i = 0; i < n; ++i) {
    const int c = rng.uniform() < weight[0] / (weight[0] + weight[1]) ? 0 : 1;
    out(i, 0) = rng.normal(mean[c][0], std::sqrt(var[c][0]));
    out(i, 1) = rng.normal(mean[c][1], std::sqrt(var[c][1]));
  }
  return out;
}

GaussianMixture2 isotropic_gaussian(double mx, double my, double var) {
  GaussianMixture2 g;
  for (int c = 0; c < 2; ++c) {
    g.mean[c][0] = mx;
    g.mean[c][1] = my;
    g.var[c][0] = var;
    g.var[c][1] = var;
  }
  return g;
}

GaussianMixture2 sample_source_mixture(Rng& rng) {
  GaussianMixture2 g;
  for (int c = 0; c < 2; ++c) {
    g.mean[c][0] = rng.uniform(-2.0, 2.0);
    g.mean[c][1] = rng.uniform(-2.0, 2.0);
    g.var[c][0] = rng.uniform(0.1, 1.0);
    g.var[c][1] = rng.uniform(0.1, 1.0);
  }
  return g;
}

Mat grid_masses(const GaussianMixture2& rho, const Vec& grid) {
  const Eigen::Index n = grid.size();
  Mat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = std::max(rho.density(grid(i), grid(j)), 1e-300);
  return m / m.sum();
}

Mat ot_displacement_field(const GaussianMixture2& rho0, const GaussianMixture2& rho1, const OtParams& p,
                          SinkhornResult* info) {
  Vec grid = Vec::LinSpaced(p.grid, p.lo, p.hi);
  SinkhornResult r = sinkhorn_log(grid_masses(rho0, grid), grid_masses(rho1, grid), grid, p.sinkhorn);
  Mat t = barycentric_map(r.g, grid, p.sinkhorn.eps);
  for (Eigen::Index i = 0; i < p.grid; ++i)
    for (Eigen::Index j = 0; j < p.grid; ++j) {
      t(i * p.grid + j, 0) -= grid(i);
      t(i * p.grid + j, 1) -= grid(j);
    }
  if (info) *info = std::move(r);
  return t;
}

OtSample ot_sample(Rng& rng, const OtParams& p) {
  OtSample s;
  s.source = sample_source_mixture(rng);
  s.samples = Mat(p.samples, 2);
  for (int i = 0; i < p.samples; ++i) {
    // Redraw the rare samples that land outside the box.
    RowVec x;
    do {
      x = s.source.sample(rng, 1).row(0);
    } while (x(0) < p.lo || x(0) > p.hi || x(1) < p.lo || x(1) > p.hi);
    s.samples.row(i) = x;
  }
  s.queries = Mat(p.queries, 2);
  for (int i = 0; i < p.queries; ++i) {
    s.queries(i, 0) = rng.uniform(p.lo, p.hi);
    s.queries(i, 1) = rng.uniform(p.lo, p.hi);
  }
  s.velocity = ot_displacement_field(s.source, isotropic_gaussian(0.0, 0.0, p.target_var), p, &s.sinkhorn);
  s.displacement = bilinear_interpolate(s.velocity, Vec::LinSpaced(p.grid, p.lo, p.hi), s.queries);
  return s;
}

}  // namespace setonet
