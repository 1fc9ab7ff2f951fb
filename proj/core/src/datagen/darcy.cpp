#include "setonet/datagen/darcy.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "setonet/errors.hpp"

namespace setonet {

namespace {

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Vec darcy_residual(const Vec& u, const Vec& f) {
  const Eigen::Index n = u.size();
  if (f.size() != n || n < 3) throw ValidationError("darcy: grid needs >= 3 points and matching f");
  const double h = 1.0 / static_cast<double>(n - 1);
  const double ih2 = 1.0 / (h * h);
  Vec r = Vec::Zero(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double kp = 0.5 * (darcy_kappa(u(i)) + darcy_kappa(u(i + 1)));
    const double km = 0.5 * (darcy_kappa(u(i - 1)) + darcy_kappa(u(i)));
    r(i) = -(kp * (u(i + 1) - u(i)) - km * (u(i) - u(i - 1))) * ih2 - f(i);
  }
  return r;
}

DarcyResult solve_darcy_1d(const Vec& f, const DarcyOptions& opt) {
  const Eigen::Index n = f.size();
  if (n < 3) throw ValidationError("darcy: grid needs >= 3 points");
  if (!f.allFinite()) throw ValidationError("darcy: nonfinite forcing");
  const double h = 1.0 / static_cast<double>(n - 1);
  const double ih2 = 1.0 / (h * h);
  const Eigen::Index k = n - 2;

  DarcyResult res;
  res.u = Vec::Zero(n);
  Vec r = darcy_residual(res.u, f);
  double rn = max_abs(r);
  std::vector<double> lo(k), di(k), up(k), rhs(k), cp(k), dp(k);

  // One extra Newton step once the tolerance is met, to land well inside it.
  int polish = 1;
  for (int it = 0; it < opt.max_iterations && (rn >= opt.tolerance || polish-- > 0); ++it) {
    const Vec& u = res.u;
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::Index i = j + 1;
      const double dk_m = u(i - 1);  // kappa'(u)/2 = u
      const double dk_i = u(i);
      const double dk_p = u(i + 1);
      const double kp = 0.5 * (darcy_kappa(u(i)) + darcy_kappa(u(i + 1)));
      const double km = 0.5 * (darcy_kappa(u(i - 1)) + darcy_kappa(u(i)));
      const double dp_ = u(i + 1) - u(i);
      const double dm_ = u(i) - u(i - 1);
      lo[j] = (dk_m * dm_ - km) * ih2;
      up[j] = -(dk_p * dp_ + kp) * ih2;
      di[j] = -((dk_i * dp_ - kp) - (dk_i * dm_ + km)) * ih2;
      rhs[j] = -r(i);
    }
    // Thomas algorithm.
    cp[0] = up[0] / di[0];
    dp[0] = rhs[0] / di[0];
    for (Eigen::Index j = 1; j < k; ++j) {
      const double den = di[j] - lo[j] * cp[j - 1];
      if (den == 0.0 || !std::isfinite(den)) throw NumericalError("darcy: singular Newton Jacobian");
      cp[j] = up[j] / den;
      dp[j] = (rhs[j] - lo[j] * dp[j - 1]) / den;
    }
    Vec delta = Vec::Zero(n);
    delta(k) = dp[k - 1];
    for (Eigen::Index j = k - 2; j >= 0; --j) delta(j + 1) = dp[j] - cp[j] * delta(j + 2);

    double step = 1.0;
    Vec trial;
    Vec rt;
    double rtn = 0.0;
    for (int ls = 0; ls < 30; ++ls) {
      trial = res.u + step * delta;
      rt = darcy_residual(trial, f);
      rtn = max_abs(rt);
      if (rtn < rn || rtn < opt.tolerance) break;
      step *= 0.5;
    }
    if (!(rtn < rn) && !(rtn < opt.tolerance)) {
      res.iterations = it + 1;
      break;  // stalled at round-off
    }
    res.u = trial;
    r = rt;
    rn = rtn;
    res.iterations = it + 1;
  }
  res.residual = rn;
  if (!(rn < opt.tolerance)) {
    std::ostringstream msg;
    msg << "darcy: Newton did not reach residual " << opt.tolerance << " (got " << rn << " after "
        << res.iterations << " iterations)";
    throw NumericalError(msg.str());
  }
  return res;
}

}  // namespace setonet
