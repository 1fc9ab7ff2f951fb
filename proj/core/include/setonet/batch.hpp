#pragma once

#include <vector>

#include "setonet/linalg.hpp"
#include "setonet/sensors.hpp"

namespace setonet {

// Sensor side of a batch. Every sample has the same M. With a shared layout
// the locations and weights are stored once (M rows); otherwise per sample
// (size*M rows and size rows of weights).
struct SensorBatch {
  Eigen::Index size = 0;
  Eigen::Index m = 0;
  bool shared_layout = true;
  Mat locations;
  Mat weights;
  Mat values;  // size*M x d_u

  Mat tiled_locations() const;
  Mat normalized_weights() const;  // rows divided by their sums
  SensorSet sample(Eigen::Index i) const;
};

// Query side. Shared queries are stored once (N rows).
struct QueryBatch {
  Eigen::Index size = 0;
  Eigen::Index nq = 0;
  bool shared_queries = true;
  Mat points;
  Mat targets;  // size*N x d_out, may be empty at inference

  Mat sample_points(Eigen::Index i) const;
};

struct Batch {
  SensorBatch sensors;
  QueryBatch queries;
};

// Stacks sensor sets that share M. If every set has bitwise-identical
// locations the layout is stored once.
SensorBatch stack_sensor_sets(const std::vector<SensorSet>& sets, bool detect_shared = true);

// Wraps one shared layout with per-sample values (size*M x d_u).
SensorBatch shared_sensor_batch(const Mat& locations, const Vec& weights, Mat values);

}  // namespace setonet
