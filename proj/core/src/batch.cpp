#include "setonet/batch.hpp"

#include "setonet/errors.hpp"

namespace setonet {

Mat SensorBatch::tiled_locations() const {
  if (!shared_layout) return locations;
  Mat out(size * m, locations.cols());
  for (Eigen::Index b = 0; b < size; ++b) out.middleRows(b * m, m) = locations;
  return out;
}

Mat SensorBatch::normalized_weights() const {
  Mat w = weights;
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    const double s = w.row(r).sum();
    if (!(s > 0.0)) throw ValidationError("sensor weights must have positive sum");
    w.row(r) /= s;
  }
  return w;
}

SensorSet SensorBatch::sample(Eigen::Index i) const {
  SensorSet s;
  s.locations = shared_layout ? locations : Mat(locations.middleRows(i * m, m));
  s.values = values.middleRows(i * m, m);
  s.weights = (shared_layout ? weights.row(0) : weights.row(i)).transpose();
  return s;
}

Mat QueryBatch::sample_points(Eigen::Index i) const {
  return shared_queries ? points : Mat(points.middleRows(i * nq, nq));
}

SensorBatch stack_sensor_sets(const std::vector<SensorSet>& sets, bool detect_shared) {
  if (sets.empty()) throw ValidationError("cannot stack an empty list of sensor sets");
  SensorBatch sb;
  sb.size = static_cast<Eigen::Index>(sets.size());
  sb.m = sets[0].size();
  const Eigen::Index dx = sets[0].locations.cols();
  const Eigen::Index du = sets[0].values.cols();
  bool shared = detect_shared;
  for (const auto& s : sets) {
    s.validate();
    if (s.size() != sb.m || s.locations.cols() != dx || s.values.cols() != du)
      throw ValidationError("sensor sets in one batch must share M, d_x and d_u");
    if (shared && (s.locations != sets[0].locations || s.weights != sets[0].weights)) shared = false;
  }
  sb.shared_layout = shared;
  sb.values.resize(sb.size * sb.m, du);
  for (Eigen::Index b = 0; b < sb.size; ++b) sb.values.middleRows(b * sb.m, sb.m) = sets[b].values;
  if (shared) {
    sb.locations = sets[0].locations;
    sb.weights = sets[0].weights.transpose();
  } else {
    sb.locations.resize(sb.size * sb.m, dx);
    sb.weights.resize(sb.size, sb.m);
    for (Eigen::Index b = 0; b < sb.size; ++b) {
      sb.locations.middleRows(b * sb.m, sb.m) = sets[b].locations;
      sb.weights.row(b) = sets[b].weights.transpose();
    }
  }
  return sb;
}

SensorBatch shared_sensor_batch(const Mat& locations, const Vec& weights, Mat values) {
  SensorBatch sb;
  sb.m = locations.rows();
  if (sb.m < 1 || values.rows() % sb.m != 0) throw ValidationError("shared_sensor_batch: bad value rows");
  sb.size = values.rows() / sb.m;
  sb.shared_layout = true;
  sb.locations = locations;
  sb.weights = weights.transpose();
  sb.values = std::move(values);
  return sb;
}

}  // namespace setonet
