#include "setonet/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "setonet/errors.hpp"
#include "setonet/runtime.hpp"

namespace setonet {

using nlohmann::json;

void Schedule::validate(long long total_steps) const {
  SETONET_REQUIRE(base_lr >= 0.0, "lr must be nonnegative");
  SETONET_REQUIRE(total_steps >= 1, "steps must be >= 1");
  SETONET_REQUIRE(milestones.size() == factors.size(), "milestones and factors must have equal length");
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    SETONET_REQUIRE(milestones[i] > 0, "milestones must be positive");
    SETONET_REQUIRE(i == 0 || milestones[i] > milestones[i - 1], "milestones must be strictly increasing");
    SETONET_REQUIRE(factors[i] > 0.0 && factors[i] <= 1.0, "factors must lie in (0, 1]");
  }
}

double lr_at_step(long long step, const Schedule& s) {
  double lr = s.base_lr;
  for (std::size_t i = 0; i < s.milestones.size(); ++i)
    if (step >= s.milestones[i]) lr *= s.factors[i];
  return lr;
}

void Adam::step(Model& model, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double b1 = cfg_.beta1, b2 = cfg_.beta2, eps = cfg_.eps;
  model.visit([&](Param& p) {
    p.m = b1 * p.m + (1.0 - b1) * p.grad;
    p.v = b2 * p.v + (1.0 - b2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (p.m.array() / c1) / ((p.v.array() / c2).sqrt() + eps);
  });
}

double gradient_norm(Model& model) {
  double s = 0.0;
  model.visit([&](Param& p) { s += p.grad.squaredNorm(); });
  return std::sqrt(s);
}

double clip_gradients(Model& model, double max_norm) {
  const double n = gradient_norm(model);
  if (max_norm > 0.0 && n > max_norm) {
    const double f = max_norm / n;
    model.visit([&](Param& p) { p.grad *= f; });
  }
  return n;
}

void TrainConfig::validate() const {
  card.validate();
  model.validate();
  SETONET_REQUIRE(steps >= 1, "steps must be >= 1");
  SETONET_REQUIRE(batch_size >= 1, "batch_size must be >= 1");
  SETONET_REQUIRE(eval_every >= 1, "eval_every must be >= 1");
  SETONET_REQUIRE(eval_chunk >= 1, "eval_chunk must be >= 1");
  SETONET_REQUIRE(protocol.drop_rate >= 0.0 && protocol.drop_rate < 1.0, "drop_rate must lie in [0, 1)");
  check_protocol_compatible(model, protocol);
  schedule.validate(steps);
}

TrainConfig default_train_config(const BenchmarkCard& card, BranchVariant variant) {
  TrainConfig c;
  c.card = card;
  c.model = default_model_config(card, variant);
  c.protocol.mode = card.train_protocol;
  c.steps = card.steps;
  c.batch_size = card.batch_size;
  c.schedule.milestones = card.milestones;
  c.schedule.factors = card.factors;
  return c;
}

std::string record_to_json(const MetricsRecord& r) {
  json j{{"step", r.step},          {"seed", r.seed}, {"test_mse", r.test_mse}, {"test_rel_l2", r.test_rel_l2},
         {"train_loss", r.train_loss}, {"lr", r.lr},    {"wall_s", r.wall_seconds}};
  return j.dump();
}

MetricsRecord record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError(std::string("bad metrics record: ") + e.what());
  }
  MetricsRecord r;
  r.step = j.value("step", 0LL);
  r.seed = j.value("seed", std::uint64_t{0});
  r.test_mse = j.value("test_mse", 0.0);
  r.test_rel_l2 = j.value("test_rel_l2", 0.0);
  r.train_loss = j.value("train_loss", 0.0);
  r.lr = j.value("lr", 0.0);
  r.wall_seconds = j.value("wall_s", 0.0);
  return r;
}

std::vector<MetricsRecord> read_metrics_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics log '" + path + "'");
  std::vector<MetricsRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(record_from_json(line));
  return out;
}

Metrics prediction_metrics(const Mat& pred, const Mat& target, Eigen::Index nq) {
  SETONET_REQUIRE(pred.rows() == target.rows() && pred.cols() == target.cols(), "metrics: shape mismatch");
  SETONET_REQUIRE(nq >= 1 && pred.rows() % nq == 0, "metrics: rows are not a multiple of N_q");
  const Eigen::Index n = pred.rows() / nq;
  SETONET_REQUIRE(n >= 1, "metrics: empty prediction set");
  Metrics m;
  m.mse = (pred - target).squaredNorm() / static_cast<double>(pred.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double den = target.middleRows(i * nq, nq).norm();
    const double num = (pred - target).middleRows(i * nq, nq).norm();
    m.rel_l2 += den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0);
  }
  m.rel_l2 /= static_cast<double>(n);
  return m;
}

void check_protocol_compatible(const ModelConfig& model, const ProtocolSpec& protocol) {
  if (model.branch.variant == BranchVariant::deeponet && protocol.mode != ProtocolMode::fixed)
    throw ValidationError("protocol '" + to_string(protocol.mode) +
                          "' is not applicable to the deeponet baseline: its branch consumes a fixed, ordered sensor "
                          "vector");
}

Metrics evaluate(Model& model, DataSource& source, const ProtocolSpec& protocol, std::uint64_t eval_seed, int chunk) {
  check_protocol_compatible(model.config(), protocol);
  retain_heap_memory();
  const Eigen::Index n = source.test_size();
  if (n < 1) throw ValidationError("evaluation needs a nonempty test set");
  Rng rng = Rng::stream(eval_seed, 0xe7a1u);
  const std::uint64_t mask_seed = eval_seed ^ 0xd50f5eedull;
  double se = 0.0, rel = 0.0;
  long long entries = 0;
  for (Eigen::Index first = 0; first < n; first += chunk) {
    const Eigen::Index count = std::min<Eigen::Index>(chunk, n - first);
    const Batch b = source.test_batch(first, count, protocol, rng, mask_seed);
    const Mat pred = model.predict(b);
    const Metrics m = prediction_metrics(pred, b.queries.targets, b.queries.nq);
    se += m.mse * static_cast<double>(pred.size());
    entries += pred.size();
    rel += m.rel_l2 * static_cast<double>(count);
  }
  return {se / static_cast<double>(entries), rel / static_cast<double>(n)};
}

TrainResult train(const TrainConfig& cfg, DataSource& source, const StepCallback& on_eval) {
  cfg.validate();
  retain_heap_memory();
  if (source.card().dx != cfg.model.branch.dx || source.card().du != cfg.model.branch.du ||
      source.card().dout != cfg.model.trunk.dout || source.card().dy != cfg.model.trunk.dy)
    throw ValidationError("model dimensions do not match benchmark '" + source.card().name + "'");

  TrainResult res;
  res.model = std::make_unique<Model>(cfg.model, cfg.seed);
  Model& model = *res.model;
  Adam adam(cfg.adam);
  Rng rng = Rng::stream(cfg.seed, 0xda7au);

  std::ofstream log;
  if (!cfg.metrics_path.empty()) {
    log.open(cfg.metrics_path, std::ios::app);
    if (!log) throw IoError("cannot open metrics log '" + cfg.metrics_path + "'");
  }

  const auto t0 = std::chrono::steady_clock::now();
  double window_loss = 0.0;
  long long window_n = 0;
  for (long long step = 0; step < cfg.steps; ++step) {
    const double lr = lr_at_step(step, cfg.schedule);
    const Batch batch = source.train_batch(rng, cfg.batch_size, cfg.protocol);
    model.visit([](Param& p) { p.zero_grad(); });
    Tape tape;
    const NodeId pred = model.forward(tape, batch);
    const NodeId loss = tape.mse(pred, batch.queries.targets);
    const double lv = tape.value(loss)(0, 0);
    if (!std::isfinite(lv))
      throw NumericalError("nonfinite training loss at step " + std::to_string(step) + " (seed " +
                           std::to_string(cfg.seed) + ", lr " + std::to_string(lr) + ")");
    tape.backward(loss);
    clip_gradients(model, cfg.clip);
    adam.step(model, lr);
    res.final_train_loss = lv;
    window_loss += lv;
    ++window_n;

    const long long done = step + 1;
    if (done % cfg.eval_every == 0 || done == cfg.steps) {
      const Metrics m = evaluate(model, source, cfg.protocol, cfg.eval_seed, cfg.eval_chunk);
      MetricsRecord r;
      r.step = done;
      r.seed = cfg.seed;
      r.test_mse = m.mse;
      r.test_rel_l2 = m.rel_l2;
      r.train_loss = window_loss / static_cast<double>(window_n);
      r.lr = lr;
      r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      window_loss = 0.0;
      window_n = 0;
      res.history.push_back(r);
      if (log) log << record_to_json(r) << "\n" << std::flush;
      if (on_eval) on_eval(r);
    }
  }
  return res;
}

std::pair<double, double> mean_std(const std::vector<double>& x) {
  SETONET_REQUIRE(!x.empty(), "mean_std of an empty list");
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  return {mu, std::sqrt(var / static_cast<double>(x.size()))};
}

std::vector<AggregateRow> aggregate_seeds(const std::vector<std::vector<MetricsRecord>>& runs) {
  SETONET_REQUIRE(!runs.empty(), "aggregate_seeds needs at least one run");
  for (const auto& r : runs) {
    if (r.size() != runs[0].size()) throw ValidationError("runs have different numbers of evaluation records");
    for (std::size_t i = 0; i < r.size(); ++i)
      if (r[i].step != runs[0][i].step) throw ValidationError("runs were evaluated at different steps");
  }
  std::vector<AggregateRow> out;
  for (std::size_t i = 0; i < runs[0].size(); ++i) {
    std::vector<double> mse, rel;
    for (const auto& r : runs) {
      mse.push_back(r[i].test_mse);
      rel.push_back(r[i].test_rel_l2);
    }
    AggregateRow row;
    row.step = runs[0][i].step;
    row.seeds = static_cast<int>(runs.size());
    std::tie(row.mse_mean, row.mse_std) = mean_std(mse);
    std::tie(row.rel_mean, row.rel_std) = mean_std(rel);
    out.push_back(row);
  }
  return out;
}

std::vector<AblationRow> sensor_count_ablation(Model& model, const DataSource& source, const std::vector<int>& counts,
                                               const ProtocolSpec& protocol, std::uint64_t eval_seed) {
  std::vector<AblationRow> out;
  for (int c : counts) {
    auto src = source.with_sensor_count(c);
    const Metrics m = evaluate(model, *src, protocol, eval_seed);
    out.push_back({c, m.mse, m.rel_l2});
  }
  return out;
}

}  // namespace setonet
