#include "setonet/datagen/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "setonet/errors.hpp"

namespace setonet {

Mat tensor_grid(int n, double lo, double hi) {
  SETONET_REQUIRE(n >= 2, "tensor grid needs at least two points per side");
  Mat g(static_cast<Eigen::Index>(n) * n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g(i * n + j, 0) = lo + (hi - lo) * i / (n - 1);
      g(i * n + j, 1) = lo + (hi - lo) * j / (n - 1);
    }
  return g;
}

Vec adaptive_weights(const Vec& field, double beta) {
  const Vec mag = field.cwiseAbs();
  const double mn = mag.minCoeff();
  const double mx = mag.maxCoeff();
  const double span = mx - mn;
  Vec m = span > 0.0 ? Vec((mag.array() - mn) / span) : Vec::Zero(mag.size());
  return (beta * m.array()).exp();
}

std::vector<int> excluded_proposal_cells(const AdaptiveConfig& cfg) {
  const int n = cfg.proposal_grid;
  std::vector<char> hit(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < cfg.seed_grid; ++i)
    for (int j = 0; j < cfg.seed_grid; ++j) {
      const double fx = static_cast<double>(i) / (cfg.seed_grid - 1);
      const double fy = static_cast<double>(j) / (cfg.seed_grid - 1);
      const int pi = static_cast<int>(std::lround(fx * (n - 1)));
      const int pj = static_cast<int>(std::lround(fy * (n - 1)));
      hit[static_cast<std::size_t>(pi) * n + pj] = 1;
    }
  std::vector<int> out;
  for (int c = 0; c < n * n; ++c)
    if (hit[c]) out.push_back(c);
  return out;
}

AdaptiveSample adaptive_query_sample(const std::function<Vec(const Mat&)>& coarse_field, int nq,
                                     const AdaptiveConfig& cfg, Rng& rng) {
  const int seeds = cfg.seed_grid * cfg.seed_grid;
  SETONET_REQUIRE(nq >= seeds, "adaptive sampler: N_q must be at least the seed grid size");
  const Mat proposal = tensor_grid(cfg.proposal_grid, cfg.lo, cfg.hi);
  const auto excluded = excluded_proposal_cells(cfg);
  const int available = static_cast<int>(proposal.rows()) - static_cast<int>(excluded.size());
  const int extra = nq - seeds;
  if (extra > available)
    throw ValidationError("adaptive sampler: N_q - seed points (" + std::to_string(extra) +
                          ") exceeds the available proposal cells (" + std::to_string(available) + ")");

  AdaptiveSample out;
  out.points.resize(nq, 2);
  out.points.topRows(seeds) = tensor_grid(cfg.seed_grid, cfg.lo, cfg.hi);
  if (extra == 0) return out;

  const Vec w = adaptive_weights(coarse_field(proposal), cfg.beta);
  std::vector<char> skip(proposal.rows(), 0);
  for (int c : excluded) skip[c] = 1;
  std::vector<std::pair<double, int>> keys;
  keys.reserve(available);
  for (Eigen::Index c = 0; c < proposal.rows(); ++c) {
    const double u = rng.uniform();
    if (skip[c]) continue;
    // log(u)/w orders identically to u^(1/w) and avoids underflow.
    keys.emplace_back(std::log(std::max(u, 1e-300)) / w(c), static_cast<int>(c));
  }
  std::partial_sort(keys.begin(), keys.begin() + extra, keys.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  for (int i = 0; i < extra; ++i) {
    out.points.row(seeds + i) = proposal.row(keys[i].second);
    out.proposal.push_back(keys[i].second);
  }
  return out;
}

}  // namespace setonet
