#pragma once

#include "setonet/linalg.hpp"

namespace setonet {

// kappa(u) = 0.2 + u^2
inline double darcy_kappa(double u) { return 0.2 + u * u; }

struct DarcyOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;  // max-norm of the discrete residual
};

struct DarcyResult {
  Vec u;
  int iterations = 0;
  double residual = 0.0;
};

// Discrete residual of -(kappa(u) u')' = f on the uniform grid over [0, 1]
// with u(0) = u(1) = 0, flux kappa taken as the average of the two nodal
// values. Boundary entries are zero.
Vec darcy_residual(const Vec& u, const Vec& f);

// Newton with the analytic tridiagonal Jacobian, backtracking line search
// and zero initial guess. Throws NumericalError if the tolerance is not
// reached within the iteration budget.
DarcyResult solve_darcy_1d(const Vec& f, const DarcyOptions& opt = {});

}  // namespace setonet
