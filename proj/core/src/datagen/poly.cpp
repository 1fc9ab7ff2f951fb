#include "setonet/datagen/poly.hpp"

#include <cmath>

namespace setonet {

PolyCoeffs sample_poly(Rng& rng, double range) {
  PolyCoeffs k;
  k.a = rng.uniform(-range, range);
  k.b = rng.uniform(-range, range);
  k.c = rng.uniform(-range, range);
  k.e = rng.uniform(-range, range);
  return k;
}

double poly_value(const PolyCoeffs& k, double x) { return ((k.a * x + k.b) * x + k.c) * x + k.e * std::sin(x); }

double poly_derivative(const PolyCoeffs& k, double x) {
  return (3.0 * k.a * x + 2.0 * k.b) * x + k.c + k.e * std::cos(x);
}

Vec poly_inputs(PolyTask task, const PolyCoeffs& k, const Vec& x) {
  return x.unaryExpr([&](double v) { return task == PolyTask::derivative ? poly_value(k, v) : poly_derivative(k, v); });
}

Vec poly_targets(PolyTask task, const PolyCoeffs& k, const Vec& y) {
  return y.unaryExpr([&](double v) { return task == PolyTask::derivative ? poly_derivative(k, v) : poly_value(k, v); });
}

}  // namespace setonet
