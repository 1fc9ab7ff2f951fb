#include "setonet/datagen/generate.hpp"

#include <cmath>

#include "setonet/datagen/adaptive.hpp"
#include "setonet/datagen/darcy.hpp"
#include "setonet/datagen/diffraction.hpp"
#include "setonet/datagen/green.hpp"
#include "setonet/datagen/grf.hpp"
#include "setonet/datagen/poly.hpp"
#include "setonet/datagen/transport.hpp"
#include "setonet/errors.hpp"

namespace setonet {

std::uint64_t split_hash(const std::string& split) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : split) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

// Row-major rank-3 accumulator filled one sample at a time.
struct Stack3 {
  std::int64_t n, rows, cols;
  std::vector<double> data;
  Stack3(std::int64_t n_, std::int64_t r, std::int64_t c) : n(n_), rows(r), cols(c), data(n_ * r * c) {}
  void put(std::int64_t i, const Mat& m) { std::copy(m.data(), m.data() + rows * cols, data.begin() + i * rows * cols); }
  Array array() && { return Array({n, rows, cols}, std::move(data)); }
};

Mat column(const Vec& v) { return Mat(v); }

void gen_poly(const BenchmarkCard& c, OperatorDataset& ds, Eigen::Index n, std::uint64_t base,
              const ProgressFn& progress) {
  const PolyTask task = c.kind == BenchmarkKind::derivative ? PolyTask::derivative : PolyTask::integral;
  const Mat loc = sample_fixed_layout(c.input_domain, c.m, ds.seed);
  const Vec q = Vec::LinSpaced(c.nq, c.output_domain.lo[0], c.output_domain.hi[0]);
  Stack3 vals(n, c.m, 1), tgts(n, c.nq, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng = Rng::stream(base, i);
    const PolyCoeffs k = sample_poly(rng, c.coef_range);
    vals.put(i, column(poly_inputs(task, k, loc.col(0))));
    tgts.put(i, column(poly_targets(task, k, q)));
    if (progress) progress(i + 1, n);
  }
  ds.arrays.set("sensor_locations", Array::from_mat(loc));
  ds.arrays.set("sensor_values", std::move(vals).array());
  ds.arrays.set("query_points", Array::from_mat(column(q)));
  ds.arrays.set("targets", std::move(tgts).array());
}

void gen_darcy(const BenchmarkCard& c, OperatorDataset& ds, Eigen::Index n, std::uint64_t base,
               const ProgressFn& progress) {
  const int g = c.grid_size;
  const Vec grid = uniform_grid(g, c.input_domain.lo[0], c.input_domain.hi[0]);
  const GrfSampler grf(grid, c.length_scale, c.variance);
  const auto si = linspace_indices(g, c.m);
  const auto qi = linspace_indices(g, c.nq);
  Mat loc(c.m, 1), q(c.nq, 1);
  for (int j = 0; j < c.m; ++j) loc(j, 0) = grid(si[j]);
  for (int j = 0; j < c.nq; ++j) q(j, 0) = grid(qi[j]);

  Stack3 vals(n, c.m, 1), tgts(n, c.nq, 1);
  Mat fin(n, g), fout(n, g);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng = Rng::stream(base, i);
    const Vec f = grf.sample(rng);
    DarcyResult r;
    try {
      DarcyOptions opt;
      opt.tolerance = c.newton_tol;
      r = solve_darcy_1d(f, opt);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (split '" + ds.split + "', seed " + std::to_string(ds.seed) +
                           ", sample " + std::to_string(i) + ")");
    }
    Mat v(c.m, 1), t(c.nq, 1);
    for (int j = 0; j < c.m; ++j) v(j, 0) = f(si[j]);
    for (int j = 0; j < c.nq; ++j) t(j, 0) = r.u(qi[j]);
    vals.put(i, v);
    tgts.put(i, t);
    fin.row(i) = f.transpose();
    fout.row(i) = r.u.transpose();
    if (progress) progress(i + 1, n);
  }
  ds.arrays.set("sensor_locations", Array::from_mat(loc));
  ds.arrays.set("sensor_values", std::move(vals).array());
  ds.arrays.set("query_points", Array::from_mat(q));
  ds.arrays.set("targets", std::move(tgts).array());
  ds.arrays.set("grid", Array::from_vec(grid));
  ds.arrays.set("input_field", Array::from_mat(fin));
  ds.arrays.set("output_field", Array::from_mat(fout));
}

void gen_green(const BenchmarkCard& c, OperatorDataset& ds, Eigen::Index n, std::uint64_t base,
               const ProgressFn& progress) {
  const bool heat = c.kind == BenchmarkKind::heat;
  AdvDiffParams ap;
  ap.diffusivity = c.diffusivity;
  ap.vx = c.velocity[0];
  ap.vy = c.velocity[1];
  ap.r_min = c.regularization_radius;
  AdaptiveConfig ac;
  ac.seed_grid = c.seed_grid;
  ac.proposal_grid = c.proposal_grid;
  ac.beta = c.beta;
  ac.lo = c.output_domain.lo[0];
  ac.hi = c.output_domain.hi[0];

  Stack3 locs(n, c.m, 2), vals(n, c.m, 1), qps(n, c.nq, 2), tgts(n, c.nq, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng = Rng::stream(base, i);
    const auto src = sample_sources(rng, c.m, c.input_domain.lo[0], c.input_domain.hi[0], c.strength_lo, c.strength_hi);
    auto field = [&](const Mat& pts) {
      return heat ? heat_field(src, pts, c.softening) : advdiff_field(src, pts, ap);
    };
    const AdaptiveSample qs = adaptive_query_sample(field, c.nq, ac, rng);
    Mat l(c.m, 2), v(c.m, 1);
    for (int j = 0; j < c.m; ++j) {
      l(j, 0) = src[j].x;
      l(j, 1) = src[j].y;
      v(j, 0) = src[j].s;
    }
    locs.put(i, l);
    vals.put(i, v);
    qps.put(i, qs.points);
    tgts.put(i, column(field(qs.points)));
    if (progress) progress(i + 1, n);
  }
  ds.arrays.set("sensor_locations", std::move(locs).array());
  ds.arrays.set("sensor_values", std::move(vals).array());
  ds.arrays.set("query_points", std::move(qps).array());
  ds.arrays.set("targets", std::move(tgts).array());
}

void gen_diffraction(const BenchmarkCard& c, OperatorDataset& ds, Eigen::Index n, std::uint64_t base,
                     const ProgressFn& progress) {
  DiffractionParams p;
  p.grid = c.grid_size;
  p.t0 = c.t0;
  p.sigma_env = c.sigma_env;
  p.bump_width = c.bump_width;
  p.bumps = c.m;
  Stack3 locs(n, c.m, 2), vals(n, c.m, 2), tgts(n, c.nq, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng = Rng::stream(base, i);
    const DiffractionSample s = diffraction_sample(rng, p);
    Mat l(c.m, 2), v(c.m, 2), t(c.nq, 2);
    for (int j = 0; j < c.m; ++j) {
      l(j, 0) = s.bumps[j].x;
      l(j, 1) = s.bumps[j].y;
      v(j, 0) = s.bumps[j].alpha;
      v(j, 1) = s.bumps[j].width;
    }
    for (int k = 0; k < c.nq; ++k) {
      t(k, 0) = s.output[k].real();
      t(k, 1) = s.output[k].imag();
    }
    locs.put(i, l);
    vals.put(i, v);
    tgts.put(i, t);
    if (progress) progress(i + 1, n);
  }
  ds.arrays.set("sensor_locations", std::move(locs).array());
  ds.arrays.set("sensor_values", std::move(vals).array());
  ds.arrays.set("query_points", Array::from_mat(torus_grid(c.grid_size)));
  ds.arrays.set("targets", std::move(tgts).array());
}

void gen_ot(const BenchmarkCard& c, OperatorDataset& ds, Eigen::Index n, std::uint64_t base,
            const ProgressFn& progress) {
  OtParams p;
  p.lo = c.input_domain.lo[0];
  p.hi = c.input_domain.hi[0];
  p.grid = c.grid_size;
  p.samples = c.m;
  p.queries = c.nq;
  p.sinkhorn.eps = c.sinkhorn_eps;
  p.sinkhorn.max_iterations = c.sinkhorn_iters;
  p.sinkhorn.tolerance = c.sinkhorn_tol;
  const std::int64_t g2 = static_cast<std::int64_t>(c.grid_size) * c.grid_size;
  Stack3 locs(n, c.m, 2), vals(n, c.m, 1), qps(n, c.nq, 2), tgts(n, c.nq, 2), vel(n, g2, 2);
  Mat mix(n, 10);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng = Rng::stream(base, i);
    const OtSample s = ot_sample(rng, p);
    locs.put(i, s.samples);
    vals.put(i, Mat::Ones(c.m, 1));
    qps.put(i, s.queries);
    tgts.put(i, s.displacement);
    vel.put(i, s.velocity);
    for (int k = 0; k < 2; ++k) {
      mix(i, 5 * k + 0) = s.source.weight[k];
      mix(i, 5 * k + 1) = s.source.mean[k][0];
      mix(i, 5 * k + 2) = s.source.mean[k][1];
      mix(i, 5 * k + 3) = s.source.var[k][0];
      mix(i, 5 * k + 4) = s.source.var[k][1];
    }
    if (progress) progress(i + 1, n);
  }
  ds.arrays.set("sensor_locations", std::move(locs).array());
  ds.arrays.set("sensor_values", std::move(vals).array());
  ds.arrays.set("query_points", std::move(qps).array());
  ds.arrays.set("targets", std::move(tgts).array());
  ds.arrays.set("velocity", std::move(vel).array());
  ds.arrays.set("mixture", Array::from_mat(mix));
}

}  // namespace

OperatorDataset generate_dataset(const BenchmarkCard& card, const std::string& split, Eigen::Index n,
                                 std::uint64_t seed, const ProgressFn& progress) {
  card.validate();
  SETONET_REQUIRE(n >= 1, "dataset size must be >= 1");
  OperatorDataset ds;
  ds.card = card;
  ds.split = split;
  ds.seed = seed;
  const std::uint64_t base = seed ^ split_hash(split);
  switch (card.kind) {
    case BenchmarkKind::derivative:
    case BenchmarkKind::integral: gen_poly(card, ds, n, base, progress); break;
    case BenchmarkKind::darcy1d: gen_darcy(card, ds, n, base, progress); break;
    case BenchmarkKind::heat:
    case BenchmarkKind::advdiff: gen_green(card, ds, n, base, progress); break;
    case BenchmarkKind::diffraction: gen_diffraction(card, ds, n, base, progress); break;
    case BenchmarkKind::ot: gen_ot(card, ds, n, base, progress); break;
    case BenchmarkKind::elastic:
      throw ValidationError("the elastic benchmark is not generated; load it from NPY files instead");
  }
  ds.validate();
  return ds;
}

}  // namespace setonet
