#include "setonet/sources.hpp"

#include <filesystem>

#include "setonet/datagen/elastic.hpp"
#include "setonet/errors.hpp"

namespace setonet {

Mat DataSource::resample_layout(Rng&) const {
  throw ValidationError("benchmark '" + card().name + "' cannot resample its sensor layout");
}

Batch DataSource::assemble(std::vector<Sample>& samples, const ProtocolSpec& protocol,
                           const std::vector<Rng*>& mask_rngs) const {
  const bool drop = protocol.mode == ProtocolMode::dropoff ||
                    (protocol.mode == ProtocolMode::variable && !can_resample_layout());
  std::vector<SensorSet> sets;
  sets.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SensorSet s = drop ? apply_dropoff(samples[i].sensors, protocol.drop_rate, *mask_rngs[i]).set
                       : std::move(samples[i].sensors);
    s.weights = sensor_weights(s.locations, card().input_domain);
    sets.push_back(std::move(s));
  }

  Batch b;
  b.sensors = stack_sensor_sets(sets, true);
  QueryBatch& q = b.queries;
  q.size = static_cast<Eigen::Index>(samples.size());
  q.nq = samples[0].queries.rows();
  q.shared_queries = true;
  for (const auto& s : samples)
    if (s.queries.rows() != q.nq || s.queries != samples[0].queries) {
      q.shared_queries = false;
      break;
    }
  const Eigen::Index dy = samples[0].queries.cols();
  const Eigen::Index dout = samples[0].targets.cols();
  if (q.shared_queries) {
    q.points = samples[0].queries;
  } else {
    q.points.resize(q.size * q.nq, dy);
    for (Eigen::Index i = 0; i < q.size; ++i) q.points.middleRows(i * q.nq, q.nq) = samples[i].queries;
  }
  q.targets.resize(q.size * q.nq, dout);
  for (Eigen::Index i = 0; i < q.size; ++i) q.targets.middleRows(i * q.nq, q.nq) = samples[i].targets;
  return b;
}

Batch DataSource::train_batch(Rng& rng, int batch_size, const ProtocolSpec& protocol) {
  SETONET_REQUIRE(batch_size >= 1, "batch size must be >= 1");
  const bool resample = can_resample_layout() && (protocol.mode == ProtocolMode::variable ||
                                                  (protocol.mode == ProtocolMode::dropoff && protocol.variable_base));
  Mat layout;
  if (resample) layout = resample_layout(rng);
  std::vector<Sample> samples;
  samples.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i) samples.push_back(train_sample(rng, resample ? &layout : nullptr));
  std::vector<Rng*> masks(batch_size, &rng);
  return assemble(samples, protocol, masks);
}

Batch DataSource::test_batch(Eigen::Index first, Eigen::Index count, const ProtocolSpec& protocol, Rng& rng,
                             std::uint64_t mask_seed) {
  SETONET_REQUIRE(count >= 1 && first >= 0 && first + count <= test_size(), "test batch out of range");
  const bool resample = can_resample_layout() && (protocol.mode == ProtocolMode::variable ||
                                                  (protocol.mode == ProtocolMode::dropoff && protocol.variable_base));
  Mat layout;
  if (resample) layout = resample_layout(rng);
  std::vector<Sample> samples;
  std::vector<Rng> streams;
  samples.reserve(count);
  streams.reserve(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    samples.push_back(test_sample(first + i, resample ? &layout : nullptr));
    streams.push_back(Rng::stream(mask_seed, static_cast<std::uint64_t>(first + i)));
  }
  std::vector<Rng*> masks;
  for (auto& s : streams) masks.push_back(&s);
  return assemble(samples, protocol, masks);
}

PolySource::PolySource(const BenchmarkCard& card, std::uint64_t layout_seed, std::uint64_t test_seed)
    : card_(card), layout_seed_(layout_seed), test_seed_(test_seed) {
  SETONET_REQUIRE(card.kind == BenchmarkKind::derivative || card.kind == BenchmarkKind::integral,
                  "PolySource needs the derivative or integral benchmark");
  card_.validate();
  task_ = card.kind == BenchmarkKind::derivative ? PolyTask::derivative : PolyTask::integral;
  layout_ = sample_fixed_layout(card_.input_domain, card_.m, layout_seed);
  queries_ = Vec::LinSpaced(card_.nq, card_.output_domain.lo[0], card_.output_domain.hi[0]);
  const int n = card_.test_size > 0 ? card_.test_size : 960;
  test_.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng r = Rng::stream(test_seed ^ 0x7e57u, static_cast<std::uint64_t>(i));
    test_.push_back(sample_poly(r, card_.coef_range));
  }
}

std::unique_ptr<DataSource> PolySource::with_sensor_count(int m) const {
  BenchmarkCard c = card_;
  c.m = m;
  return std::make_unique<PolySource>(c, layout_seed_, test_seed_);
}

DataSource::Sample PolySource::make(const PolyCoeffs& k, const Mat& layout) const {
  Sample s;
  s.sensors.locations = layout;
  s.sensors.values = Mat(poly_inputs(task_, k, layout.col(0)));
  s.queries = Mat(queries_);
  s.targets = Mat(poly_targets(task_, k, queries_));
  return s;
}

DataSource::Sample PolySource::train_sample(Rng& rng, const Mat* layout) {
  return make(sample_poly(rng, card_.coef_range), layout ? *layout : layout_);
}

DataSource::Sample PolySource::test_sample(Eigen::Index i, const Mat* layout) {
  return make(test_[i], layout ? *layout : layout_);
}

Mat PolySource::resample_layout(Rng& rng) const { return resample_variable_layout(card_.input_domain, card_.m, rng); }

DatasetSource::DatasetSource(std::shared_ptr<const OperatorDataset> train, std::shared_ptr<const OperatorDataset> test,
                             int m_override)
    : train_(std::move(train)), test_(std::move(test)) {
  SETONET_REQUIRE(train_ && test_, "DatasetSource needs both splits");
  card_ = train_->card;
  if (train_->m() != test_->m() || train_->nq() != test_->nq())
    throw ValidationError("train and test splits disagree on M or N_q");
  m_ = static_cast<int>(train_->m());
  if (m_override > 0 && m_override != m_) {
    if (!has_grid())
      throw ValidationError("benchmark '" + card_.name + "' stores no input grid; cannot change M to " +
                            std::to_string(m_override));
    const Array& grid = train_->arrays.get("grid");
    grid_index_ = linspace_indices(static_cast<int>(grid.numel()), m_override);
    grid_locations_.resize(m_override, 1);
    for (int j = 0; j < m_override; ++j) grid_locations_(j, 0) = grid.data[grid_index_[j]];
    m_ = m_override;
  }
  card_.m = m_;
}

bool DatasetSource::has_grid() const {
  return train_->arrays.has("grid") && train_->arrays.has("input_field") && test_->arrays.has("grid") &&
         test_->arrays.has("input_field");
}

std::unique_ptr<DataSource> DatasetSource::with_sensor_count(int m) const {
  return std::make_unique<DatasetSource>(train_, test_, m);
}

DataSource::Sample DatasetSource::make(const OperatorDataset& ds, Eigen::Index i) const {
  Sample s;
  if (grid_index_.empty()) {
    s.sensors.locations = ds.locations(i);
    s.sensors.values = ds.values(i);
  } else {
    const Array& field = ds.arrays.get("input_field");
    const std::int64_t g = field.dim(1);
    s.sensors.locations = grid_locations_;
    s.sensors.values.resize(m_, 1);
    for (int j = 0; j < m_; ++j) s.sensors.values(j, 0) = field.data[i * g + grid_index_[j]];
  }
  s.queries = ds.query_points(i);
  s.targets = ds.targets(i);
  return s;
}

DataSource::Sample DatasetSource::train_sample(Rng& rng, const Mat*) {
  return make(*train_, static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(train_->size()))));
}

DataSource::Sample DatasetSource::test_sample(Eigen::Index i, const Mat*) { return make(*test_, i); }

std::unique_ptr<DataSource> open_source(const BenchmarkCard& card, const std::string& data_dir,
                                        std::uint64_t layout_seed) {
  if (data_dir.empty()) {
    if (card.kind == BenchmarkKind::derivative || card.kind == BenchmarkKind::integral)
      return std::make_unique<PolySource>(card, layout_seed, layout_seed);
    throw ValidationError("benchmark '" + card.name + "' needs a data directory (run gen first)");
  }
  if (card.kind == BenchmarkKind::elastic &&
      std::filesystem::exists(std::filesystem::path(data_dir) / "train_loads.npy")) {
    ElasticData d = load_elastic_dataset(data_dir);
    return std::make_unique<DatasetSource>(std::make_shared<OperatorDataset>(std::move(d.train)),
                                           std::make_shared<OperatorDataset>(std::move(d.test)));
  }
  auto train = std::make_shared<OperatorDataset>(read_dataset(data_dir, "train"));
  auto test = std::make_shared<OperatorDataset>(read_dataset(data_dir, "test"));
  if (train->card.kind != card.kind)
    throw ValidationError("dataset in '" + data_dir + "' holds benchmark '" + train->card.name + "', not '" +
                          card.name + "'");
  return std::make_unique<DatasetSource>(train, test);
}

}  // namespace setonet
