#pragma once

#include <string>
#include <vector>

#include "setonet/linalg.hpp"
#include "setonet/random.hpp"

namespace setonet {

// Axis-aligned box.
struct Domain {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::Ref<const RowVec>& x, double tol = 1e-12) const;
  static Domain interval(double a, double b) { return {{a}, {b}}; }
  static Domain box(double a, double b, int d) { return {std::vector<double>(d, a), std::vector<double>(d, b)}; }
};

struct SensorSet {
  Mat locations;  // M x d_x
  Mat values;     // M x d_u
  Vec weights;    // M

  Eigen::Index size() const { return locations.rows(); }
  void validate() const;
};

// Cells of the sorted locations clipped to [lo, hi]: interior points own half
// of each neighbouring gap, the extreme points extend to the boundary. A floor
// of 1e-12 keeps coincident points from zeroing the total.
Vec trapezoid_weights(const Vec& x, double lo, double hi);

// 1D: trapezoid cells. Higher dimensions: uniform.
Vec sensor_weights(const Mat& locations, const Domain& domain);

enum class ProtocolMode { fixed, variable, dropoff };

ProtocolMode protocol_from_string(const std::string& s);
std::string to_string(ProtocolMode m);

struct SensorProtocol {
  ProtocolMode mode = ProtocolMode::fixed;
  int m = 0;
  double drop_rate = 0.2;
  std::uint64_t stream = 0;
};

// Uniform i.i.d. locations drawn once from `seed`; sorted ascending in 1D.
Mat sample_fixed_layout(const Domain& domain, int m, std::uint64_t seed);

// Uniform i.i.d. locations for one batch; sorted ascending in 1D.
Mat resample_variable_layout(const Domain& domain, int m, Rng& rng);

// round(i (n-1)/(m-1)) for i < m; m=1 picks the middle index.
std::vector<int> linspace_indices(int grid_size, int m);

int drop_count(int m, double rate);

struct DropoffResult {
  SensorSet set;
  std::vector<int> dropped;  // indices into the input set
  std::vector<int> source;   // source[i] = input index copied into slot i
};

// Drops floor(rate*M) sensors uniformly at random and refills each dropped
// slot with the nearest retained (location, value) pair. Ties go to the lower
// retained index. Weights are copied from the source sensor.
DropoffResult apply_dropoff(const SensorSet& s, double rate, Rng& rng);

// Same as apply_dropoff but with the dropped slots given explicitly.
DropoffResult fill_from_nearest(const SensorSet& s, const std::vector<int>& dropped);

}  // namespace setonet
