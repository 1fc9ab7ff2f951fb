#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "setonet/datagen/diffraction.hpp"
#include "setonet/errors.hpp"

namespace setonet {
namespace {

double l2_direct(const Field& f) {
  double s = 0.0;
  for (const auto& z : f) s += std::norm(z);
  return std::sqrt(s / static_cast<double>(f.size()));
}

TEST(Diffraction, WrapIsMinimalImage) {
  EXPECT_NEAR(wrap_periodic(0.9 - 0.1), -0.2, 1e-15);
  EXPECT_NEAR(wrap_periodic(0.1 - 0.9), 0.2, 1e-15);
  EXPECT_NEAR(wrap_periodic(0.3), 0.3, 1e-15);
  EXPECT_LE(std::abs(wrap_periodic(0.5)), 0.5);
  EXPECT_NEAR(wrap_periodic(2.25), 0.25, 1e-15);
}

TEST(Diffraction, PhaseScreenMatchesBumpSum) {
  std::vector<PhaseBump> bumps{{0.95, 0.1, 0.7, 0.3}, {0.2, 0.6, -0.4, 0.1}};
  const int n = 12;
  Mat phi = phase_screen(bumps, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double want = 0.0;
      for (const auto& b : bumps) {
        // shortest distance over the 9 nearest images
        double best = 1e9;
        for (int a = -1; a <= 1; ++a)
          for (int c = -1; c <= 1; ++c) {
            const double dx = i / double(n) - b.x + a;
            const double dy = j / double(n) - b.y + c;
            best = std::min(best, dx * dx + dy * dy);
          }
        want += b.alpha * std::exp(-best / (2 * b.width * b.width));
      }
      EXPECT_NEAR(phi(i, j), want, 1e-14);
    }
}

TEST(Diffraction, ZeroPhaseGivesRealEnvelope) {
  std::vector<PhaseBump> bumps(10);
  for (auto& b : bumps) b.alpha = 0.0;
  Field f = initial_field(bumps, 16, 0.2);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      const auto z = f[i * 16 + j];
      EXPECT_EQ(z.imag(), 0.0);
      const double dx = i / 16.0 - 0.5, dy = j / 16.0 - 0.5;
      EXPECT_NEAR(z.real(), std::exp(-(dx * dx + dy * dy) / 0.08), 1e-15);
    }
}

TEST(Diffraction, NormConservedWithZeroPhase) {
  std::vector<PhaseBump> bumps(10);
  for (auto& b : bumps) b.alpha = 0.0;
  Field f = initial_field(bumps, 128, 0.2);
  const double before = discrete_l2(f);
  propagate(f, 128, 0.1);
  EXPECT_LT(std::abs(discrete_l2(f) - before), 1e-12);
}

TEST(Diffraction, NormConservedForRandomFields) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    DiffractionParams p;
    p.grid = 64;
    auto bumps = sample_bumps(rng, p);
    Field f = initial_field(bumps, p.grid, p.sigma_env);
    // arbitrary complex noise on top
    for (auto& z : f) z += std::complex<double>(rng.normal(), rng.normal());
    const double before = discrete_l2(f);
    EXPECT_NEAR(before, l2_direct(f), 1e-14 * before);
    propagate(f, p.grid, 0.1 + trial);
    EXPECT_LT(std::abs(discrete_l2(f) - before), 1e-12 * std::max(1.0, before));
  }
}

TEST(Diffraction, ZeroTimeIsIdentity) {
  Rng rng(4);
  DiffractionParams p;
  p.grid = 32;
  Field f = initial_field(sample_bumps(rng, p), p.grid, p.sigma_env);
  Field g = f;
  propagate(g, p.grid, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], g[i]);
}

TEST(Diffraction, PlaneWaveGetsQuadraticPhase) {
  const int n = 16;
  const int kx = 3, ky = -2;
  const double t = 0.013;
  Field f(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f[i * n + j] = std::polar(1.0, 2 * M_PI * (kx * i + ky * j) / double(n));
  Field g = f;
  propagate(g, n, t);
  const double xi2 = 4 * M_PI * M_PI * (kx * kx + ky * ky);
  const auto phase = std::polar(1.0, -xi2 * t / 2);
  for (int q = 0; q < n * n; ++q) EXPECT_LT(std::abs(g[q] - f[q] * phase), 1e-12);
}

TEST(Diffraction, SizeMismatchThrows) {
  Field f(10);
  EXPECT_THROW(propagate(f, 4, 0.1), ValidationError);
}

TEST(Diffraction, SamplesAreDeterministic) {
  DiffractionParams p;
  p.grid = 32;
  Rng a(9), b(9);
  auto s1 = diffraction_sample(a, p);
  auto s2 = diffraction_sample(b, p);
  ASSERT_EQ(s1.bumps.size(), 10u);
  for (std::size_t i = 0; i < s1.output.size(); ++i) EXPECT_EQ(s1.output[i], s2.output[i]);
  for (const auto& bump : s1.bumps) {
    EXPECT_GE(bump.x, 0.0);
    EXPECT_LT(bump.x, 1.0);
    EXPECT_DOUBLE_EQ(bump.width, 0.4);
  }
}

TEST(Diffraction, TorusGridLayout) {
  Mat g = torus_grid(4);
  ASSERT_EQ(g.rows(), 16);
  EXPECT_DOUBLE_EQ(g(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(g(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(g(4, 0), 0.25);
}

}  // namespace
}  // namespace setonet
