#pragma once

#include <cstdint>
#include <string>

#include "setonet/batch.hpp"
#include "setonet/bundle.hpp"
#include "setonet/datagen/benchmarks.hpp"

namespace setonet {

inline constexpr int kDatasetVersion = 1;
inline constexpr const char* kGeneratorVersion = "setonet-datagen 1.0";

// Affine standardization x -> (x - mean) / std. Identity when disabled.
struct Normalization {
  bool enabled = false;
  double input_mean = 0.0;
  double input_std = 1.0;
  double target_mean = 0.0;
  double target_std = 1.0;
};

// One split of a benchmark. Standard arrays:
//   sensor_locations  [M, dx] shared or [N, M, dx]
//   sensor_values     [N, M, du]
//   query_points      [Nq, dy] shared or [N, Nq, dy]
//   targets           [N, Nq, dout]
// Generators may add more (grid, input_field, output_field, velocity, ...).
struct OperatorDataset {
  BenchmarkCard card;
  std::string split;
  std::uint64_t seed = 0;
  Normalization normalization;
  ArrayBundle arrays;

  Eigen::Index size() const;
  Eigen::Index m() const;
  Eigen::Index nq() const;
  bool shared_sensors() const;
  bool shared_queries() const;

  Mat locations(Eigen::Index i) const;
  Mat values(Eigen::Index i) const;
  Mat query_points(Eigen::Index i) const;
  Mat targets(Eigen::Index i) const;
  SensorSet sensor_set(Eigen::Index i) const;

  // Checks shapes of the standard arrays against each other and the card.
  void validate() const;
};

std::string dataset_bundle_path(const std::string& dir, const std::string& split);
std::string dataset_sidecar_path(const std::string& dir, const std::string& split);

// <dir>/<split>.bin plus the JSON sidecar <dir>/<split>.json holding format,
// version, generator_version, card, split, seed, per-array shape and crc32,
// and normalization.
void write_dataset(const std::string& dir, const OperatorDataset& ds);
OperatorDataset read_dataset(const std::string& dir, const std::string& split);

// Per-array crc32 as printed by the generator.
std::vector<std::pair<std::string, std::uint32_t>> dataset_checksums(const OperatorDataset& ds);

}  // namespace setonet
