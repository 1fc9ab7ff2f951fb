#pragma once

#include "setonet/linalg.hpp"
#include "setonet/random.hpp"

namespace setonet {

// f(x) = a x^3 + b x^2 + c x + e sin x, so f(0) = 0.
struct PolyCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double e = 0.0;
};

enum class PolyTask { derivative, integral };

PolyCoeffs sample_poly(Rng& rng, double range = 0.1);
double poly_value(const PolyCoeffs& k, double x);
double poly_derivative(const PolyCoeffs& k, double x);

// Derivative task: input f, target f'. Integral task: input f', target f.
Vec poly_inputs(PolyTask task, const PolyCoeffs& k, const Vec& x);
Vec poly_targets(PolyTask task, const PolyCoeffs& k, const Vec& y);

}  // namespace setonet
