// End-to-end acceptance checks. One PASS/FAIL line per criterion on stdout,
// progress on stderr. Arguments select criteria by number (default: all).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "setonet/datagen/adaptive.hpp"
#include "setonet/datagen/darcy.hpp"
#include "setonet/datagen/diffraction.hpp"
#include "setonet/datagen/generate.hpp"
#include "setonet/datagen/green.hpp"
#include "setonet/datagen/grf.hpp"
#include "setonet/datagen/transport.hpp"
#include "setonet/errors.hpp"
#include "setonet/sources.hpp"
#include "setonet/training.hpp"
#include "setonet/uat.hpp"

using namespace setonet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}
std::string sci(double x) { return fmt("%.3e", x); }

double rel_diff(const Mat& a, const Mat& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

Batch one_sample(const Mat& loc, const Mat& values, const Mat& queries, const Domain& dom) {
  Batch b;
  b.sensors = shared_sensor_batch(loc, sensor_weights(loc, dom), values);
  b.queries.size = 1;
  b.queries.nq = queries.rows();
  b.queries.shared_queries = true;
  b.queries.points = queries;
  return b;
}

Mat uniform_points(Rng& rng, Eigen::Index n, const Domain& dom) {
  Mat x(n, dom.dim());
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < dom.dim(); ++d) x(i, d) = rng.uniform(dom.lo[d], dom.hi[d]);
  return x;
}

Mat normal_mat(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Mat x(r, c);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

std::vector<int> permutation(Rng& rng, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.index(i + 1)]);
  return p;
}

Mat take_rows(const Mat& x, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = x.row(idx[i]);
  return out;
}

// ------------------------------------------------------------------- 1

Outcome uat() {
  const auto t0 = Clock::now();
  UatConfig c;
  c.m = 3;
  c.n = 2;
  c.p = 2;
  c.dout = 2;
  c.tests = 100;
  c.mix = Activation::tanh;
  const UatReport r = verify_uat(c);
  const double t = seconds_since(t0);
  return {r.sup_discrepancy < 1e-8 && t < 5.0,
          "sup discrepancy " + sci(r.sup_discrepancy) + " (< 1e-8), " + fmt("%.2f", t) + " s (< 5 s)"};
}

// ------------------------------------------------------------------- 2

Outcome permutation_invariance() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int checks = 0;
  for (const char* bench : {"derivative", "heat10"}) {
    const BenchmarkCard card = benchmark_card(bench);
    for (BranchVariant v : {BranchVariant::key, BranchVariant::attention, BranchVariant::mean, BranchVariant::sum,
                            BranchVariant::vidon}) {
      Model model(default_model_config(card, v), 1);
      Rng rng(static_cast<std::uint64_t>(v) + 17);
      const Mat queries = uniform_points(rng, 32, card.output_domain);
      for (int m : {1, 7, 100}) {
        const Mat loc = uniform_points(rng, m, card.input_domain);
        const Mat val = normal_mat(rng, m, card.du);
        const Mat ref = model.predict(one_sample(loc, val, queries, card.input_domain));
        for (int k = 0; k < 20; ++k) {
          const auto p = permutation(rng, m);
          const Mat out = model.predict(one_sample(take_rows(loc, p), take_rows(val, p), queries, card.input_domain));
          worst = std::max(worst, rel_diff(ref, out));
          ++checks;
        }
      }
    }
  }
  const double t = seconds_since(t0);
  return {worst < 1e-5 && t < 30.0, std::to_string(checks) + " permutations, max relative difference " + sci(worst) +
                                        " (< 1e-5), " + fmt("%.1f", t) + " s (< 30 s)"};
}

// ------------------------------------------------------------------- 3

Outcome cardinality_laws() {
  const BenchmarkCard card = benchmark_card("derivative");
  Rng rng(3);
  const int m = 100;
  const Mat loc = uniform_points(rng, m, card.input_domain);
  const Mat val = normal_mat(rng, m, 1);
  Mat loc2(2 * m, 1), val2(2 * m, 1);
  loc2 << loc, loc;
  val2 << val, val;
  const Mat queries = uniform_points(rng, 32, card.output_domain);

  Model sum_model(default_model_config(card, BranchVariant::sum), 2);
  auto& sum_branch = dynamic_cast<PooledBranch&>(sum_model.branch());
  Tape t1(false), t2(false);
  const Mat once = t1.value(sum_branch.pooled(t1, one_sample(loc, val, queries, card.input_domain).sensors));
  const Mat twice = t2.value(sum_branch.pooled(t2, one_sample(loc2, val2, queries, card.input_domain).sensors));
  const double sum_err = rel_diff(2.0 * once, twice);

  Model mean_model(default_model_config(card, BranchVariant::mean), 2);
  const Mat a = mean_model.predict(one_sample(loc, val, queries, card.input_domain));
  const Mat b = mean_model.predict(one_sample(loc2, val2, queries, card.input_domain));
  const double mean_err = rel_diff(a, b);

  ModelConfig dcfg = default_model_config(card, BranchVariant::deeponet);
  Model deeponet(dcfg, 2);
  const Mat ref = deeponet.predict(one_sample(loc, val, queries, card.input_domain));
  double witness = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto p = permutation(rng, m);
    witness = std::max(witness, rel_diff(
                                    ref, deeponet.predict(one_sample(take_rows(loc, p), take_rows(val, p), queries,
                                                                     card.input_domain))));
  }
  return {sum_err <= 1e-12 && mean_err <= 1e-12 && witness > 1e-6,
          "sum 2x error " + sci(sum_err) + ", mean duplication error " + sci(mean_err) +
              " (<= 1e-12); deeponet permutation change " + sci(witness) + " (witness > 1e-6)"};
}

// ------------------------------------------------------------------- 4

Outcome parameter_counts() {
  const BenchmarkCard card = benchmark_card("darcy1d");
  const std::vector<std::pair<BranchVariant, long long>> want{{BranchVariant::key, 207842},
                                                              {BranchVariant::mean, 250765},
                                                              {BranchVariant::sum, 250765},
                                                              {BranchVariant::attention, 255021},
                                                              {BranchVariant::deeponet, 281792},
                                                              {BranchVariant::vidon, 695893}};
  bool ok = true;
  std::string detail;
  for (auto [v, n] : want) {
    Model model(default_model_config(card, v), 0);
    const long long got = model.param_count();
    ok = ok && got == n;
    detail += to_string(v) + " " + std::to_string(got) + (got == n ? "" : " (want " + std::to_string(n) + ")") + "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// ------------------------------------------------------------------- 5

// Residual of -(kappa(u) u')' = f with face-averaged kappa, written out here
// independently of the solver.
double darcy_residual_max(const Vec& u, const Vec& f) {
  const Eigen::Index n = u.size();
  const double h = 1.0 / static_cast<double>(n - 1);
  double worst = std::max(std::abs(u(0)), std::abs(u(n - 1)));
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double kl = 0.2 + 0.5 * (u(i - 1) * u(i - 1) + u(i) * u(i));
    const double kr = 0.2 + 0.5 * (u(i) * u(i) + u(i + 1) * u(i + 1));
    const double r = -(kr * (u(i + 1) - u(i)) - kl * (u(i) - u(i - 1))) / (h * h) - f(i);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double darcy_exact_unit_forcing(double x) {
  const double target = 0.5 * x * (1.0 - x);
  double u = 0.0;
  for (int it = 0; it < 100; ++it) u -= (0.2 * u + u * u * u / 3.0 - target) / (0.2 + u * u);
  return u;
}

// Log-domain row and column marginal errors of exp((f + g - c) / eps),
// evaluated cell by cell.
std::pair<double, double> sinkhorn_marginal_errors(const SinkhornResult& r, const Mat& a, const Mat& b,
                                                   const Vec& grid, double eps) {
  const Eigen::Index n = grid.size(), nn = n * n;
  auto logp = [&](Eigen::Index x, Eigen::Index y) {
    const double d1 = grid(x / n) - grid(y / n), d2 = grid(x % n) - grid(y % n);
    return (r.f(x / n, x % n) + r.g(y / n, y % n) - d1 * d1 - d2 * d2) / eps;
  };
  auto l1 = [&](bool rows) {
    double err = 0.0;
    std::vector<double> buf(nn);
    for (Eigen::Index x = 0; x < nn; ++x) {
      double mx = -1e300;
      for (Eigen::Index y = 0; y < nn; ++y) {
        buf[y] = rows ? logp(x, y) : logp(y, x);
        mx = std::max(mx, buf[y]);
      }
      double s = 0.0;
      for (Eigen::Index y = 0; y < nn; ++y) s += std::exp(buf[y] - mx);
      const double mass = std::exp(mx) * s;
      err += std::abs(mass - (rows ? a(x / n, x % n) : b(x / n, x % n)));
    }
    return err;
  };
  return {l1(true), l1(false)};
}

struct Stencil {
  double lap, gx, gy;
};

Stencil fd(const std::function<double(double, double)>& u, double x, double y, double h) {
  const double c = u(x, y), e = u(x + h, y), w = u(x - h, y), n = u(x, y + h), s = u(x, y - h);
  return {(e + w + n + s - 4.0 * c) / (h * h), (e - w) / (2.0 * h), (n - s) / (2.0 * h)};
}

Mat point(double x, double y) {
  Mat q(1, 2);
  q << x, y;
  return q;
}

Outcome solvers() {
  const auto t0 = Clock::now();
  std::vector<std::string> notes;
  bool ok = true;

  {  // Darcy residual on GRF draws
    const BenchmarkCard card = benchmark_card("darcy1d");
    const GrfSampler grf(uniform_grid(card.grid_size, 0.0, 1.0), card.length_scale, card.variance);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Rng rng = Rng::stream(2024, static_cast<std::uint64_t>(i));
      const Vec f = grf.sample(rng);
      worst = std::max(worst, darcy_residual_max(solve_darcy_1d(f).u, f));
    }
    ok = ok && worst < 1e-10;
    notes.push_back("darcy residual " + sci(worst) + " over 1000 GRF draws");
  }
  {  // grid halving against the closed form for f = 1
    std::vector<double> err;
    for (int n : {126, 251, 501, 1001}) {
      const Vec u = solve_darcy_1d(Vec::Ones(n)).u;
      double e = 0.0;
      for (int i = 0; i < n; ++i) e = std::max(e, std::abs(u(i) - darcy_exact_unit_forcing(double(i) / (n - 1))));
      err.push_back(e);
    }
    std::string ratios;
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
      const double r = err[k] / err[k + 1];
      ok = ok && r >= 3.3 && r <= 4.7;
      ratios += (k ? "/" : "") + fmt("%.3f", r);
    }
    notes.push_back("halving ratios " + ratios);
  }
  {  // spectral propagator norm
    DiffractionParams p;
    double drift = 0.0;
    for (int i = 0; i < 5; ++i) {
      Rng rng = Rng::stream(77, static_cast<std::uint64_t>(i));
      Field f = initial_field(sample_bumps(rng, p), p.grid, p.sigma_env);
      const double before = discrete_l2(f);
      propagate(f, p.grid, p.t0);
      drift = std::max(drift, std::abs(discrete_l2(f) - before));
    }
    ok = ok && drift < 1e-12;
    notes.push_back("norm drift " + sci(drift));
  }
  {  // Sinkhorn marginals on the production grid
    OtParams p;
    const Vec grid = Vec::LinSpaced(p.grid, p.lo, p.hi);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      Rng rng = Rng::stream(5, static_cast<std::uint64_t>(i));
      const Mat a = grid_masses(sample_source_mixture(rng), grid);
      const Mat b = grid_masses(isotropic_gaussian(0.0, 0.0, p.target_var), grid);
      const SinkhornResult r = sinkhorn_log(a, b, grid, p.sinkhorn);
      auto [row, col] = sinkhorn_marginal_errors(r, a, b, grid, p.sinkhorn.eps);
      worst = std::max({worst, row, col});
    }
    ok = ok && worst < 1e-6;
    notes.push_back("sinkhorn marginal L1 " + sci(worst));
  }
  {  // Green's functions: FD residual ratios under step halving
    Rng rng(11);
    const auto src = sample_sources(rng, 10, 0.0, 0.5, 0.1, 1.0);
    const double eps = benchmark_card("heat10").softening;
    AdvDiffParams adv;
    const std::vector<std::pair<double, double>> probes{{0.8, 0.8}, {0.9, 0.3}, {0.3, 0.9}};
    double lo = 1e300, hi = 0.0;
    for (auto [x, y] : probes) {
      auto heat = [&](double px, double py) { return heat_field(src, point(px, py), eps)(0); };
      auto adv_u = [&](double px, double py) { return advdiff_field(src, point(px, py), adv)(0); };
      const double density = heat_source_density(src, point(x, y), eps)(0);
      std::vector<double> rh, ra;
      for (double h : {0.02, 0.01, 0.005}) {
        rh.push_back(std::abs(fd(heat, x, y, h).lap - density));
        const Stencil s = fd(adv_u, x, y, h);
        ra.push_back(std::abs(-adv.diffusivity * s.lap + adv.vx * s.gx + adv.vy * s.gy));
      }
      for (const auto* r : {&rh, &ra})
        for (int k = 0; k < 2; ++k) {
          const double q = (*r)[k] / (*r)[k + 1];
          lo = std::min(lo, q);
          hi = std::max(hi, q);
        }
    }
    ok = ok && lo >= 3.3 && hi <= 4.7;
    notes.push_back("green FD ratios in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "]");
  }
  const double t = seconds_since(t0);
  ok = ok && t < 300.0;
  std::string detail;
  for (const auto& n : notes) detail += n + "; ";
  return {ok, detail + fmt("%.1f", t) + " s (< 300 s)"};
}

// ------------------------------------------------------------------- 6, 7

struct DerivativeRun {
  std::unique_ptr<Model> model;
  std::unique_ptr<DataSource> source;
  TrainConfig cfg;
  double fixed_rel = 0.0;
  double seconds = 0.0;
};

DerivativeRun train_derivative_key() {
  DerivativeRun run;
  const BenchmarkCard card = benchmark_card("derivative");
  run.cfg = default_train_config(card, BranchVariant::key);
  run.cfg.steps = 20000;
  // the card schedule scaled to the shorter budget
  for (auto& m : run.cfg.schedule.milestones) m = m * run.cfg.steps / card.steps;
  run.cfg.seed = 0;
  run.cfg.eval_every = 2000;
  run.source = open_source(card, "", 0);
  const auto t0 = Clock::now();
  TrainResult r = train(run.cfg, *run.source, [](const MetricsRecord& m) {
    std::cerr << "  [6] step " << m.step << " rel_l2 " << m.test_rel_l2 << " loss " << m.train_loss << " "
              << fmt("%.0f", m.wall_seconds) << " s" << std::endl;
  });
  run.seconds = seconds_since(t0);
  run.model = std::move(r.model);
  run.fixed_rel = r.history.back().test_rel_l2;
  return run;
}

Outcome derivative_fixed(const DerivativeRun& run) {
  return {run.fixed_rel < 2e-2 && run.seconds <= 90 * 60.0,
          "rel l2 " + sci(run.fixed_rel) + " (< 2e-2) after 20000 steps, " + fmt("%.1f", run.seconds / 60.0) +
              " min (<= 90 min)"};
}

Outcome derivative_dropoff(DerivativeRun& run) {
  ProtocolSpec drop;
  drop.mode = ProtocolMode::dropoff;
  drop.drop_rate = 0.2;
  const Metrics m = evaluate(*run.model, *run.source, drop, run.cfg.eval_seed);
  const double ratio = m.rel_l2 / run.fixed_rel;
  return {ratio <= 5.0, "drop-off rel l2 " + sci(m.rel_l2) + " vs fixed " + sci(run.fixed_rel) + ", ratio " +
                            fmt("%.2f", ratio) + " (<= 5)"};
}

// ------------------------------------------------------------------- 8

// Narrow models on a 1201-point grid so that 600 sensors stay on grid
// nodes.
ModelConfig toy_model(const BenchmarkCard& card, BranchVariant v) {
  ModelConfig c = default_model_config(card, v);
  BranchConfig& b = c.branch;
  b.key_hidden = {64};
  b.value_hidden = {64};
  b.rho_tok_hidden = {64};
  b.n_pool = 32;
  b.d_k = 32;
  b.d_v = 16;
  b.phi_hidden = {64, 64};
  b.rho_hidden = {64};
  c.trunk.hidden = {64, 64, 64};
  return c;
}

Outcome sensor_ablation() {
  BenchmarkCard card = benchmark_card("darcy1d");
  card.grid_size = 1201;
  // round-off in the residual grows like 1/h^2
  card.newton_tol = 1e-9;
  card.validate();
  const auto t0 = Clock::now();
  auto train_ds = std::make_shared<OperatorDataset>(generate_dataset(card, "train", 2000, 8));
  auto test_ds = std::make_shared<OperatorDataset>(generate_dataset(card, "test", 200, 8));
  std::cerr << "  [8] data " << fmt("%.1f", seconds_since(t0)) << " s" << std::endl;
  DatasetSource source(train_ds, test_ds);
  const std::vector<int> counts{150, 300, 600};

  std::map<BranchVariant, std::vector<double>> mse;  // per count, averaged over seeds
  for (BranchVariant v : {BranchVariant::sum, BranchVariant::key}) {
    std::vector<double> acc(counts.size(), 0.0);
    for (std::uint64_t seed : {0, 1, 2}) {
      TrainConfig cfg;
      cfg.card = card;
      cfg.model = toy_model(card, v);
      cfg.steps = 10000;
      cfg.batch_size = 32;
      cfg.schedule.milestones = {2000, 6000};
      cfg.schedule.factors = {0.2, 0.5};
      cfg.eval_every = 10000;
      cfg.seed = seed;
      TrainResult r = train(cfg, source);
      const auto rows = sensor_count_ablation(*r.model, source, counts, ProtocolSpec{}, cfg.eval_seed);
      for (std::size_t k = 0; k < counts.size(); ++k) acc[k] += rows[k].mse / 3.0;
      std::cerr << "  [8] " << to_string(v) << " seed " << seed << ": mse";
      for (const auto& row : rows) std::cerr << " M=" << row.count << " " << sci(row.mse);
      std::cerr << " (" << fmt("%.0f", seconds_since(t0)) << " s)" << std::endl;
    }
    mse[v] = acc;
  }
  const auto& s = mse[BranchVariant::sum];
  const auto& k = mse[BranchVariant::key];
  const double s_lo = s[0] / s[1], s_hi = s[2] / s[1], k_lo = k[0] / k[1], k_hi = k[2] / k[1];
  const bool ok = s_lo >= 10.0 && s_hi >= 10.0 && k_lo <= 3.0 && k_hi <= 3.0;
  return {ok, "sum MSE ratio M150 " + fmt("%.1f", s_lo) + ", M600 " + fmt("%.1f", s_hi) + " (>= 10); key " +
                  fmt("%.2f", k_lo) + ", " + fmt("%.2f", k_hi) + " (<= 3); 3 seeds, " +
                  fmt("%.0f", seconds_since(t0)) + " s"};
}

// ------------------------------------------------------------------- 9

Outcome protocol_identities(DerivativeRun* run) {
  std::vector<std::string> notes;
  bool ok = true;

  {
    const BenchmarkCard card = benchmark_card("derivative");
    std::unique_ptr<Model> fresh;
    std::unique_ptr<DataSource> fresh_src;
    Model* model = run ? run->model.get() : nullptr;
    DataSource* src = run ? run->source.get() : nullptr;
    if (!model) {
      fresh = std::make_unique<Model>(default_model_config(card, BranchVariant::key), 0);
      fresh_src = open_source(card, "", 0);
      model = fresh.get();
      src = fresh_src.get();
    }
    ProtocolSpec fixed, zero;
    zero.mode = ProtocolMode::dropoff;
    zero.drop_rate = 0.0;
    const Metrics a = evaluate(*model, *src, fixed, 20240917);
    const Metrics b = evaluate(*model, *src, zero, 20240917);
    const bool same = a.mse == b.mse && a.rel_l2 == b.rel_l2;
    ok = ok && same;
    notes.push_back(std::string("drop-off 0 vs fixed ") + (same ? "bitwise equal" : "differ") + " (" +
                    (run ? "trained" : "untrained") + " model)");
  }
  {
    const BenchmarkCard card = benchmark_card("heat10");
    AdaptiveConfig ac;
    ac.seed_grid = card.seed_grid;
    ac.proposal_grid = card.proposal_grid;
    ac.beta = card.beta;
    Rng rng(9);
    const auto src = sample_sources(rng, card.m, 0.0, 1.0, card.strength_lo, card.strength_hi);
    auto coarse = [&](const Mat& pts) { return heat_field(src, pts, card.softening); };
    const AdaptiveSample s = adaptive_query_sample(coarse, card.nq, ac, rng);
    const Mat seed = tensor_grid(ac.seed_grid, ac.lo, ac.hi);
    bool has_seed = seed.rows() == 625;
    for (Eigen::Index i = 0; i < seed.rows() && has_seed; ++i) {
      bool found = false;
      for (Eigen::Index j = 0; j < s.points.rows() && !found; ++j) found = s.points.row(j) == seed.row(i);
      has_seed = found;
    }
    std::set<std::pair<double, double>> distinct;
    for (Eigen::Index j = 0; j < s.points.rows(); ++j) distinct.insert({s.points(j, 0), s.points(j, 1)});
    const bool exact = s.points.rows() == card.nq && static_cast<Eigen::Index>(distinct.size()) == card.nq;
    ok = ok && exact && has_seed;
    notes.push_back("adaptive sampler " + std::to_string(s.points.rows()) + "/" + std::to_string(card.nq) +
                    " distinct points, seed grid " + (has_seed ? "included" : "missing"));
  }
  {
    Schedule sch;
    const double l0 = lr_at_step(0, sch), l1 = lr_at_step(26000, sch), l2 = lr_at_step(80000, sch);
    const bool exact = std::abs(l0 - 5e-4) <= 1e-18 && std::abs(l1 - 1e-4) <= 1e-18 && std::abs(l2 - 5e-5) <= 1e-18;
    ok = ok && exact;
    notes.push_back("lr " + sci(l0) + "/" + sci(l1) + "/" + sci(l2));
  }
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int k) { return only.empty() || only.count(k) > 0; };

  int failed = 0;
  auto report = [&](int k, const std::string& name, const std::function<Outcome()>& f) {
    if (!want(k)) return;
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << k << "] " << name << ": " << o.detail << std::endl;
  };

  report(1, "UAT constructive equivalence", uat);
  report(2, "permutation invariance", permutation_invariance);
  report(3, "pooling cardinality laws", cardinality_laws);
  report(4, "Darcy parameter counts", parameter_counts);
  report(5, "solver correctness", solvers);

  std::unique_ptr<DerivativeRun> run;
  if (want(6) || want(7)) {
    try {
      run = std::make_unique<DerivativeRun>(train_derivative_key());
    } catch (const std::exception& e) {
      std::cerr << "derivative training failed: " << e.what() << std::endl;
    }
  }
  auto need_run = [&](const std::function<Outcome()>& f) {
    return [&, f]() -> Outcome {
      if (!run) return {false, "training did not complete"};
      return f();
    };
  };
  report(6, "derivative Key, fixed protocol", need_run([&] { return derivative_fixed(*run); }));
  report(7, "derivative Key under 20% drop-off", need_run([&] { return derivative_dropoff(*run); }));
  report(8, "sensor-count ablation shape", sensor_ablation);
  report(9, "protocol identities", [&] { return protocol_identities(run.get()); });

  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
