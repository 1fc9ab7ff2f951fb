#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "setonet/model.hpp"
#include "setonet/sources.hpp"

namespace setonet {

struct Schedule {
  double base_lr = 5e-4;
  std::vector<long long> milestones{25000, 75000};
  std::vector<double> factors{0.2, 0.5};

  void validate(long long total_steps) const;
};

// Piecewise constant: base_lr times every factor whose milestone is <= step.
double lr_at_step(long long step, const Schedule& s);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over every parameter the visitor reaches.
class Adam {
public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
  void step(Model& model, double lr);
  long long steps() const { return t_; }

private:
  AdamConfig cfg_;
  long long t_ = 0;
};

// Global gradient norm before clipping. Rescales when it exceeds max_norm
// (max_norm <= 0 disables clipping).
double clip_gradients(Model& model, double max_norm);
double gradient_norm(Model& model);

struct TrainConfig {
  BenchmarkCard card;
  ModelConfig model;
  ProtocolSpec protocol;
  long long steps = 125000;
  int batch_size = 64;
  Schedule schedule;
  double clip = 1.0;
  AdamConfig adam;
  std::uint64_t seed = 0;
  int eval_every = 1000;
  std::uint64_t eval_seed = 20240917;
  int eval_chunk = 64;
  std::string metrics_path;  // JSON lines, appended; empty disables

  void validate() const;
};

// Default run configuration for a benchmark card and branch variant.
TrainConfig default_train_config(const BenchmarkCard& card, BranchVariant variant);

struct Metrics {
  double mse = 0.0;
  double rel_l2 = 0.0;
};

struct MetricsRecord {
  long long step = 0;
  double test_mse = 0.0;
  double test_rel_l2 = 0.0;
  double train_loss = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

std::string record_to_json(const MetricsRecord& r);
MetricsRecord record_from_json(const std::string& line);
std::vector<MetricsRecord> read_metrics_log(const std::string& path);

// Mean over samples of |pred - true|_2 / |true|_2, and the mean squared
// error over every entry. Rows are stacked per sample (nq rows each).
Metrics prediction_metrics(const Mat& pred, const Mat& target, Eigen::Index nq);

// Models that need a fixed-length sensor vector cannot be evaluated or
// trained under protocols that change the layout.
void check_protocol_compatible(const ModelConfig& model, const ProtocolSpec& protocol);

// Full test set, in chunks, under the given protocol. The evaluation RNG is
// derived from eval_seed only, so every model sees the same layouts.
Metrics evaluate(Model& model, DataSource& source, const ProtocolSpec& protocol, std::uint64_t eval_seed,
                 int chunk = 64);

using StepCallback = std::function<void(const MetricsRecord&)>;

struct TrainResult {
  std::unique_ptr<Model> model;
  std::vector<MetricsRecord> history;
  double final_train_loss = 0.0;
};

// Adam on the query MSE with global-norm clipping, evaluation every
// eval_every steps and at the last step. No early stopping.
TrainResult train(const TrainConfig& cfg, DataSource& source, const StepCallback& on_eval = {});

struct AggregateRow {
  long long step = 0;
  int seeds = 0;
  double mse_mean = 0.0;
  double mse_std = 0.0;
  double rel_mean = 0.0;
  double rel_std = 0.0;
};

// Per-step mean and population std across seeds. All runs must share the
// same evaluation steps.
std::vector<AggregateRow> aggregate_seeds(const std::vector<std::vector<MetricsRecord>>& runs);

// mean and population std
std::pair<double, double> mean_std(const std::vector<double>& x);

struct AblationRow {
  int count = 0;
  double mse = 0.0;
  double rel_l2 = 0.0;
};

// Re-evaluates a trained model at each sensor count without retraining.
std::vector<AblationRow> sensor_count_ablation(Model& model, const DataSource& source, const std::vector<int>& counts,
                                               const ProtocolSpec& protocol, std::uint64_t eval_seed);

}  // namespace setonet
