#pragma once

#include <string>
#include <vector>

#include "setonet/autodiff.hpp"
#include "setonet/sensors.hpp"

namespace setonet {

enum class BenchmarkKind { derivative, integral, darcy1d, elastic, heat, advdiff, diffraction, ot };

std::string to_string(BenchmarkKind k);

// Everything needed to generate, train on and evaluate one benchmark.
struct BenchmarkCard {
  std::string name;
  BenchmarkKind kind = BenchmarkKind::derivative;
  Domain input_domain;
  Domain output_domain;
  int dx = 1;
  int du = 1;
  int dy = 1;
  int dout = 1;
  int m = 100;
  int nq = 200;
  int p = 32;
  double pe_max = 0.1;

  // Per-family branch widths.
  int key_hidden = 200;
  int rho_hidden = 300;
  Activation mix = Activation::softplus;
  bool augment_values_with_coords = false;

  // Splits and schedule.
  int train_size = 0;  // 0 = generated on the fly
  int test_size = 0;
  long long steps = 125000;
  int batch_size = 64;
  std::vector<long long> milestones{25000, 75000};
  std::vector<double> factors{0.2, 0.5};
  ProtocolMode train_protocol = ProtocolMode::fixed;

  // Generator parameters; only the ones relevant to `kind` are used.
  double coef_range = 0.1;
  int grid_size = 0;
  double length_scale = 0.04;
  double variance = 1.0;
  double newton_tol = 1e-10;  // max-norm Darcy residual
  double softening = 0.1;
  double diffusivity = 0.1;
  std::vector<double> velocity{1.0, 0.0};
  double regularization_radius = 1e-3;
  double strength_lo = 0.1;
  double strength_hi = 1.0;
  double beta = 0.0;
  int seed_grid = 25;
  int proposal_grid = 128;
  double t0 = 0.1;
  double sigma_env = 0.2;
  double bump_width = 0.4;
  double sinkhorn_eps = 0.05;
  int sinkhorn_iters = 2000;
  double sinkhorn_tol = 1e-6;

  bool structured_family() const;
  void validate() const;
};

// Names: derivative, integral, darcy1d, elastic, heat10, heat30, advdiff,
// diffraction, ot.
BenchmarkCard benchmark_card(const std::string& name);
std::vector<std::string> benchmark_names();

std::string card_to_json(const BenchmarkCard& c);
BenchmarkCard card_from_json(const std::string& text);

}  // namespace setonet
