#pragma once

#include <complex>
#include <vector>

#include "setonet/linalg.hpp"
#include "setonet/random.hpp"

namespace setonet {

using Field = std::vector<std::complex<double>>;  // n x n, row-major, x-major

// Minimal-image displacement on the unit torus, in [-1/2, 1/2].
double wrap_periodic(double d);

struct PhaseBump {
  double x = 0.0;
  double y = 0.0;
  double alpha = 0.0;
  double width = 0.4;
};

struct DiffractionParams {
  int grid = 128;
  double t0 = 0.1;
  double sigma_env = 0.2;
  double bump_width = 0.4;
  int bumps = 10;
};

std::vector<PhaseBump> sample_bumps(Rng& rng, const DiffractionParams& p);

// Phi(x) = sum_i alpha_i exp(-|wrap(x - x_i)|^2 / (2 l_i^2)) on the grid.
Mat phase_screen(const std::vector<PhaseBump>& bumps, int n);

// A(x) exp(i Phi(x)) with a Gaussian envelope centred at (1/2, 1/2).
Field initial_field(const std::vector<PhaseBump>& bumps, int n, double sigma_env);

// Free Schrodinger step: Fourier coefficients times exp(-i |xi|^2 t / 2),
// xi = 2 pi k. In-place.
void propagate(Field& field, int n, double t);

double discrete_l2(const Field& field);

// Grid points (i/n, j/n), x-major.
Mat torus_grid(int n);

struct DiffractionSample {
  std::vector<PhaseBump> bumps;
  Field output;
};

DiffractionSample diffraction_sample(Rng& rng, const DiffractionParams& p);

}  // namespace setonet
