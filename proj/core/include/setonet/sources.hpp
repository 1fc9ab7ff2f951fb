#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "setonet/batch.hpp"
#include "setonet/datagen/benchmarks.hpp"
#include "setonet/datagen/dataset.hpp"
#include "setonet/datagen/poly.hpp"
#include "setonet/sensors.hpp"

namespace setonet {

// How sensor sets are presented to a model.
//   fixed:    the source's own layout.
//   variable: analytic sources resample one layout per batch; dataset
//             sources apply drop-off with nearest replacement per sample.
//   dropoff:  drop-off per sample on top of the base layout, which is the
//             fixed layout or, with variable_base, a per-batch resample.
struct ProtocolSpec {
  ProtocolMode mode = ProtocolMode::fixed;
  double drop_rate = 0.2;
  bool variable_base = false;
};

// Supplies training batches and a fixed test set.
class DataSource {
public:
  virtual ~DataSource() = default;

  virtual const BenchmarkCard& card() const = 0;
  virtual int m() const = 0;
  virtual Eigen::Index test_size() const = 0;
  virtual bool can_resample_layout() const { return false; }

  Batch train_batch(Rng& rng, int batch_size, const ProtocolSpec& protocol);

  // Test samples [first, first + count). Randomness comes only from `rng`,
  // drop-off masks from per-sample streams of `mask_seed`.
  Batch test_batch(Eigen::Index first, Eigen::Index count, const ProtocolSpec& protocol, Rng& rng,
                   std::uint64_t mask_seed);

  // Same benchmark, resampled to `m` sensors without touching the functions.
  virtual std::unique_ptr<DataSource> with_sensor_count(int m) const = 0;

protected:
  // One sample on a given layout (rows of `layout`), or on the source's own
  // layout when `layout` is null.
  struct Sample {
    SensorSet sensors;
    Mat queries;
    Mat targets;
  };
  virtual Sample train_sample(Rng& rng, const Mat* layout) = 0;
  virtual Sample test_sample(Eigen::Index i, const Mat* layout) = 0;
  virtual Mat resample_layout(Rng& rng) const;

private:
  Batch assemble(std::vector<Sample>& samples, const ProtocolSpec& protocol,
                 const std::vector<Rng*>& mask_rngs) const;
};

// Derivative / integral functions drawn on the fly. Training functions come
// from the batch RNG; the test set is a fixed list of `test_size` functions.
class PolySource : public DataSource {
public:
  PolySource(const BenchmarkCard& card, std::uint64_t layout_seed, std::uint64_t test_seed);

  const BenchmarkCard& card() const override { return card_; }
  int m() const override { return card_.m; }
  Eigen::Index test_size() const override { return static_cast<Eigen::Index>(test_.size()); }
  bool can_resample_layout() const override { return true; }
  std::unique_ptr<DataSource> with_sensor_count(int m) const override;

  const Mat& layout() const { return layout_; }
  const Vec& queries() const { return queries_; }

protected:
  Sample train_sample(Rng& rng, const Mat* layout) override;
  Sample test_sample(Eigen::Index i, const Mat* layout) override;
  Mat resample_layout(Rng& rng) const override;

private:
  Sample make(const PolyCoeffs& k, const Mat& layout) const;

  BenchmarkCard card_;
  PolyTask task_;
  std::uint64_t layout_seed_;
  std::uint64_t test_seed_;
  Mat layout_;
  Vec queries_;
  std::vector<PolyCoeffs> test_;
};

// Stored train/test splits. When the splits carry the full input field on a
// grid (Darcy), the sensor count can be changed by linear index sampling.
class DatasetSource : public DataSource {
public:
  DatasetSource(std::shared_ptr<const OperatorDataset> train, std::shared_ptr<const OperatorDataset> test,
                int m_override = 0);

  const BenchmarkCard& card() const override { return card_; }
  int m() const override { return m_; }
  Eigen::Index test_size() const override { return test_->size(); }
  std::unique_ptr<DataSource> with_sensor_count(int m) const override;

  bool has_grid() const;

protected:
  Sample train_sample(Rng& rng, const Mat* layout) override;
  Sample test_sample(Eigen::Index i, const Mat* layout) override;

private:
  Sample make(const OperatorDataset& ds, Eigen::Index i) const;

  std::shared_ptr<const OperatorDataset> train_;
  std::shared_ptr<const OperatorDataset> test_;
  BenchmarkCard card_;
  int m_ = 0;
  std::vector<int> grid_index_;  // used when m differs from the stored M
  Mat grid_locations_;
};

// Analytic families without a data directory are drawn on the fly with a
// layout and test set fixed by `layout_seed`. Otherwise `data_dir` holds
// train/test splits, or for the elastic benchmark the raw NPY files.
std::unique_ptr<DataSource> open_source(const BenchmarkCard& card, const std::string& data_dir,
                                        std::uint64_t layout_seed = 0);

}  // namespace setonet
