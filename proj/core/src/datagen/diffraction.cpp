#include "setonet/datagen/diffraction.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>

#include "setonet/errors.hpp"

namespace setonet {

double wrap_periodic(double d) { return d - std::round(d); }

std::vector<PhaseBump> sample_bumps(Rng& rng, const DiffractionParams& p) {
  std::vector<PhaseBump> b(p.bumps);
  for (auto& x : b) {
    x.x = rng.uniform();
    x.y = rng.uniform();
    x.alpha = rng.uniform(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
    x.width = p.bump_width;
  }
  return b;
}

Mat torus_grid(int n) {
  Mat g(static_cast<Eigen::Index>(n) * n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g(i * n + j, 0) = static_cast<double>(i) / n;
      g(i * n + j, 1) = static_cast<double>(j) / n;
    }
  return g;
}

Mat phase_screen(const std::vector<PhaseBump>& bumps, int n) {
  Mat phi = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = static_cast<double>(i) / n;
      const double y = static_cast<double>(j) / n;
      double acc = 0.0;
      for (const auto& b : bumps) {
        const double dx = wrap_periodic(x - b.x);
        const double dy = wrap_periodic(y - b.y);
        acc += b.alpha * std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width));
      }
      phi(i, j) = acc;
    }
  return phi;
}

Field initial_field(const std::vector<PhaseBump>& bumps, int n, double sigma_env) {
  const Mat phi = phase_screen(bumps, n);
  Field f(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dx = wrap_periodic(static_cast<double>(i) / n - 0.5);
      const double dy = wrap_periodic(static_cast<double>(j) / n - 0.5);
      const double amp = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_env * sigma_env));
      f[static_cast<std::size_t>(i) * n + j] = std::polar(amp, phi(i, j));
    }
  return f;
}

void propagate(Field& field, int n, double t) {
  if (field.size() != static_cast<std::size_t>(n) * n) throw ValidationError("propagate: field size mismatch");
  if (t == 0.0) return;
  auto* data = reinterpret_cast<fftw_complex*>(field.data());
  fftw_plan fwd = fftw_plan_dft_2d(n, n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan inv = fftw_plan_dft_2d(n, n, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(fwd);
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (int i = 0; i < n; ++i) {
    const int ki = i <= n / 2 ? i : i - n;
    for (int j = 0; j < n; ++j) {
      const int kj = j <= n / 2 ? j : j - n;
      const double xi2 = 4.0 * std::numbers::pi * std::numbers::pi * (static_cast<double>(ki) * ki + static_cast<double>(kj) * kj);
      field[static_cast<std::size_t>(i) * n + j] *= std::polar(scale, -0.5 * xi2 * t);
    }
  }
  fftw_execute(inv);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(inv);
}

double discrete_l2(const Field& field) {
  double s = 0.0;
  for (const auto& z : field) s += std::norm(z);
  return std::sqrt(s / static_cast<double>(field.size()));
}

DiffractionSample diffraction_sample(Rng& rng, const DiffractionParams& p) {
  DiffractionSample s;
  s.bumps = sample_bumps(rng, p);
  s.output = initial_field(s.bumps, p.grid, p.sigma_env);
  propagate(s.output, p.grid, p.t0);
  return s;
}

}  // namespace setonet
