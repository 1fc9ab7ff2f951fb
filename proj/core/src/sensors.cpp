#include "setonet/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "setonet/errors.hpp"

namespace setonet {

bool Domain::contains(const Eigen::Ref<const RowVec>& x, double tol) const {
  if (x.size() != dim()) return false;
  for (int d = 0; d < dim(); ++d)
    if (x(d) < lo[d] - tol || x(d) > hi[d] + tol) return false;
  return true;
}

void SensorSet::validate() const {
  if (locations.rows() < 1) throw ValidationError("sensor set is empty");
  if (values.rows() != locations.rows()) throw ValidationError("sensor set: values and locations disagree on M");
  if (weights.size() != locations.rows()) throw ValidationError("sensor set: weight count differs from M");
  if (!locations.allFinite() || !values.allFinite()) throw ValidationError("sensor set: nonfinite entries");
  if ((weights.array() < 0.0).any() || !(weights.sum() > 0.0))
    throw ValidationError("sensor set: weights must be nonnegative with positive sum");
}

Vec trapezoid_weights(const Vec& x, double lo, double hi) {
  const Eigen::Index m = x.size();
  if (m < 1) throw ValidationError("trapezoid_weights: empty location set");
  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&x](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
  Vec w(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double xi = x(order[r]);
    const double left = r == 0 ? lo : 0.5 * (x(order[r - 1]) + xi);
    const double right = r + 1 == m ? hi : 0.5 * (xi + x(order[r + 1]));
    w(order[r]) = std::max(right - left, 0.0) + 1e-12;
  }
  return w;
}

Vec sensor_weights(const Mat& locations, const Domain& domain) {
  if (locations.cols() != domain.dim()) throw ValidationError("sensor_weights: dimension mismatch");
  if (domain.dim() == 1) return trapezoid_weights(locations.col(0), domain.lo[0], domain.hi[0]);
  return Vec::Ones(locations.rows());
}

ProtocolMode protocol_from_string(const std::string& s) {
  if (s == "fixed") return ProtocolMode::fixed;
  if (s == "variable") return ProtocolMode::variable;
  if (s == "dropoff" || s == "drop-off") return ProtocolMode::dropoff;
  throw ValidationError("unknown protocol '" + s + "' (expected fixed, variable or dropoff)");
}

std::string to_string(ProtocolMode m) {
  switch (m) {
    case ProtocolMode::fixed: return "fixed";
    case ProtocolMode::variable: return "variable";
    case ProtocolMode::dropoff: return "dropoff";
  }
  return "?";
}

namespace {

Mat uniform_points(const Domain& domain, int m, Rng& rng) {
  SETONET_REQUIRE(m >= 1, "sensor layout needs M >= 1");
  Mat x(m, domain.dim());
  for (int i = 0; i < m; ++i)
    for (int d = 0; d < domain.dim(); ++d) x(i, d) = rng.uniform(domain.lo[d], domain.hi[d]);
  if (domain.dim() == 1) std::sort(x.data(), x.data() + m);
  return x;
}

}  // namespace

Mat sample_fixed_layout(const Domain& domain, int m, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0x1a70u);
  return uniform_points(domain, m, rng);
}

Mat resample_variable_layout(const Domain& domain, int m, Rng& rng) { return uniform_points(domain, m, rng); }

std::vector<int> linspace_indices(int grid_size, int m) {
  SETONET_REQUIRE(m >= 1, "index sampling needs M >= 1");
  if (m > grid_size)
    throw ValidationError("requested " + std::to_string(m) + " sensors but the grid has only " +
                          std::to_string(grid_size) + " points");
  std::vector<int> idx(m);
  if (m == 1) {
    idx[0] = (grid_size - 1) / 2;
    return idx;
  }
  for (int i = 0; i < m; ++i)
    idx[i] = static_cast<int>(std::lround(static_cast<double>(i) * (grid_size - 1) / (m - 1)));
  return idx;
}

int drop_count(int m, double rate) {
  SETONET_REQUIRE(rate >= 0.0 && rate < 1.0, "drop rate must lie in [0, 1)");
  return static_cast<int>(std::floor(rate * m + 1e-12));
}

DropoffResult fill_from_nearest(const SensorSet& s, const std::vector<int>& dropped) {
  const int m = static_cast<int>(s.size());
  std::vector<char> is_dropped(m, 0);
  for (int d : dropped) {
    if (d < 0 || d >= m) throw ValidationError("dropoff: index out of range");
    is_dropped[d] = 1;
  }
  std::vector<int> kept;
  for (int i = 0; i < m; ++i)
    if (!is_dropped[i]) kept.push_back(i);
  if (kept.empty()) throw ValidationError("dropoff would remove every sensor");

  DropoffResult r;
  r.dropped = dropped;
  r.source.resize(m);
  r.set = s;
  for (int i = 0; i < m; ++i) {
    if (!is_dropped[i]) {
      r.source[i] = i;
      continue;
    }
    int best = kept.front();
    double best_d = (s.locations.row(i) - s.locations.row(best)).squaredNorm();
    for (int k : kept) {
      const double d = (s.locations.row(i) - s.locations.row(k)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    r.source[i] = best;
    r.set.locations.row(i) = s.locations.row(best);
    r.set.values.row(i) = s.values.row(best);
    if (s.weights.size() == m) r.set.weights(i) = s.weights(best);
  }
  return r;
}

DropoffResult apply_dropoff(const SensorSet& s, double rate, Rng& rng) {
  const int m = static_cast<int>(s.size());
  if (m < 1) throw ValidationError("dropoff on an empty sensor set");
  const int n = drop_count(m, rate);
  if (n >= m) throw ValidationError("dropoff rate would remove every sensor");
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < n; ++i) {
    const int j = i + static_cast<int>(rng.index(static_cast<std::size_t>(m - i)));
    std::swap(perm[i], perm[j]);
  }
  std::vector<int> dropped(perm.begin(), perm.begin() + n);
  std::sort(dropped.begin(), dropped.end());
  return fill_from_nearest(s, dropped);
}

}  // namespace setonet
