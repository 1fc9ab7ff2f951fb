#include "setonet/uat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "setonet/errors.hpp"
#include "setonet/trunk.hpp"

namespace setonet {

void ReferenceBranch::validate() const {
  SETONET_REQUIRE(m >= 1 && n >= 1 && p >= 1 && dout >= 1 && dy >= 1, "reference branch dimensions must be >= 1");
  SETONET_REQUIRE(locations.rows() == m, "reference branch: need m sensor locations");
  SETONET_REQUIRE(c.rows() == p && c.cols() == n, "reference branch: c must be p x n");
  SETONET_REQUIRE(xi.rows() == p * n && xi.cols() == m, "reference branch: xi must be (p n) x m");
  SETONET_REQUIRE(theta.rows() == p && theta.cols() == n, "reference branch: theta must be p x n");
  SETONET_REQUIRE(w.rows() == p && w.cols() == dy && zeta.size() == p, "reference branch: trunk shapes");
  SETONET_REQUIRE(static_cast<int>(route.size()) == p, "reference branch: one route per k");
  for (int r : route) SETONET_REQUIRE(r >= 0 && r < dout, "reference branch: route out of range");
}

ReferenceBranch random_reference_branch(int m, int n, int p, int dout, int dy, Rng& rng, Activation sigma) {
  ReferenceBranch b;
  b.m = m;
  b.n = n;
  b.p = p;
  b.dout = dout;
  b.dy = dy;
  b.sigma = sigma;
  auto fill = [&rng](Eigen::Index r, Eigen::Index c) {
    Mat x(r, c);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    return x;
  };
  Vec x = fill(m, 1);
  std::sort(x.data(), x.data() + m);
  b.locations = Mat(x);
  b.c = fill(p, n);
  b.xi = fill(p * n, m);
  b.theta = fill(p, n);
  b.w = fill(p, dy);
  b.zeta = fill(p, 1);
  for (int k = 0; k < p; ++k) b.route.push_back(k % dout);
  b.validate();
  return b;
}

Vec token_codes(const ReferenceBranch& b) { return b.xi.rowwise().sum(); }

double min_code_gap(const Vec& codes) {
  if (codes.size() < 2) return INFINITY;
  std::vector<double> s(codes.data(), codes.data() + codes.size());
  std::sort(s.begin(), s.end());
  double gap = INFINITY;
  for (std::size_t i = 1; i < s.size(); ++i) gap = std::min(gap, s[i] - s[i - 1]);
  return gap;
}

Mat reference_coefficients(const ReferenceBranch& b, const Vec& g) {
  SETONET_REQUIRE(g.size() == b.m, "reference branch: input needs m values");
  const Vec pre = b.xi * g;
  Mat out = Mat::Zero(b.p, b.dout);
  for (int k = 0; k < b.p; ++k) {
    double beta = 0.0;
    for (int i = 0; i < b.n; ++i) beta += b.c(k, i) * apply_activation(b.sigma, pre(k * b.n + i) + b.theta(k, i));
    out(k, b.route[k]) = beta;
  }
  return out;
}

Mat reference_basis(const ReferenceBranch& b, const Mat& y) {
  SETONET_REQUIRE(y.cols() == b.dy, "reference basis: query dimension mismatch");
  Mat out = Mat::Zero(y.rows(), b.p * b.dout);
  for (Eigen::Index q = 0; q < y.rows(); ++q)
    for (int k = 0; k < b.p; ++k)
      out(q, k * b.dout + b.route[k]) = apply_activation(b.sigma, y.row(q).dot(b.w.row(k)) + b.zeta(k));
  return out;
}

Mat reference_output(const ReferenceBranch& b, const Vec& g, const Mat& y) {
  return synthesize(reference_coefficients(b, g), reference_basis(b, y), RowVec::Zero(b.dout));
}

PerturbResult perturb_for_distinct_codes(const ReferenceBranch& b, Rng& rng, double magnitude, int max_attempts) {
  SETONET_REQUIRE(magnitude > 0.0, "perturbation magnitude must be positive");
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    PerturbResult r{b, 0.0, attempt};
    for (Eigen::Index i = 0; i < r.branch.xi.size(); ++i) r.branch.xi.data()[i] += rng.uniform(-magnitude, magnitude);
    r.min_gap = min_code_gap(token_codes(r.branch));
    if (r.min_gap > 0.0) return r;
  }
  throw NumericalError("could not separate the token codes within " + std::to_string(max_attempts) + " attempts");
}

KeyMap::KeyMap(Mat encodings) : e_(std::move(encodings)) {
  const Eigen::Index m = e_.rows();
  denom_ = Vec::Ones(m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index r = 0; r < m; ++r) {
      if (r == j) continue;
      const double d = (e_.row(j) - e_.row(r)).squaredNorm();
      if (!(d > 0.0)) throw ValidationError("ideal keys: encoded sensor locations must be pairwise distinct");
      denom_(j) *= d;
    }
}

Vec KeyMap::operator()(const Eigen::Ref<const RowVec>& z) const {
  const Eigen::Index m = e_.rows();
  Vec d(m);
  for (Eigen::Index r = 0; r < m; ++r) d(r) = (z - e_.row(r)).squaredNorm();
  Vec out(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double num = 1.0;
    for (Eigen::Index r = 0; r < m; ++r)
      if (r != j) num *= d(r);
    out(j) = num / denom_(j);
  }
  return out;
}

Mat KeyMap::apply(const Mat& z) const {
  Mat out(z.rows(), e_.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) out.row(i) = (*this)(z.row(i)).transpose();
  return out;
}

KeyMap build_ideal_keys(const Mat& encodings) { return KeyMap(encodings); }

QueryTokens build_queries_and_scale(const ReferenceBranch& b, Activation mix) {
  if (mix != Activation::tanh && mix != Activation::identity)
    throw ValidationError("mixing '" + to_string(mix) +
                          "' has no inverse on an interval whose image contains 0 in its interior; use tanh");
  QueryTokens t;
  t.alpha = 1.0 / static_cast<double>(b.m);
  const double peak = b.xi.cwiseAbs().maxCoeff();
  if (mix == Activation::tanh)
    while (peak / (t.alpha * t.lambda) > 0.5) {
      t.lambda *= 2.0;
      ++t.doublings;
      if (t.doublings > 2000) throw NumericalError("query scale search did not terminate");
    }
  const Mat r = b.xi / (t.alpha * t.lambda);
  const double root = std::sqrt(static_cast<double>(b.m));
  t.q = mix == Activation::tanh ? Mat(root * r.array().atanh().matrix()) : Mat(root * r);
  if (!t.q.allFinite()) throw NumericalError("query tokens are not finite");
  return t;
}

LagrangeBasis::LagrangeBasis(Vec nodes) : nodes_(std::move(nodes)) {
  const Eigen::Index k = nodes_.size();
  SETONET_REQUIRE(k >= 1, "Lagrange basis needs at least one node");
  weights_ = Vec::Ones(k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      if (a == b) continue;
      const double d = nodes_(a) - nodes_(b);
      if (d == 0.0) throw ValidationError("Lagrange basis: nodes must be distinct");
      weights_(a) /= d;
    }
}

Vec LagrangeBasis::operator()(double c) const {
  const Eigen::Index k = nodes_.size();
  Vec out = Vec::Zero(k);
  for (Eigen::Index a = 0; a < k; ++a)
    if (c == nodes_(a)) {
      out(a) = 1.0;
      return out;
    }
  double den = 0.0;
  for (Eigen::Index a = 0; a < k; ++a) {
    out(a) = weights_(a) / (c - nodes_(a));
    den += out(a);
  }
  return out / den;
}

Vec LagrangeBasis::product_form(double c) const {
  const Eigen::Index k = nodes_.size();
  Vec out = Vec::Ones(k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      if (a != b) out(a) *= (c - nodes_(b)) / (nodes_(a) - nodes_(b));
  return out;
}

LagrangeReadout::LagrangeReadout(const ReferenceBranch& b, const Vec& codes)
    : basis_(codes), dout_(b.dout), sigma_(b.sigma) {
  theta_ = Eigen::Map<const Vec>(b.theta.data(), b.theta.size());  // row-major: a = k n + i
  for (int k = 0; k < b.p; ++k)
    for (int i = 0; i < b.n; ++i) route_.push_back(b.route[k]);
}

RowVec LagrangeReadout::operator()(double s, double c) const {
  const Vec l = basis_(c);
  RowVec out = RowVec::Zero(dout_);
  for (Eigen::Index a = 0; a < l.size(); ++a) out(route_[a]) += l(a) * apply_activation(sigma_, s + theta_(a));
  return out;
}

Mat LagrangeReadout::apply(const Mat& tokens) const {
  Mat out(tokens.rows(), dout_);
  for (Eigen::Index r = 0; r < tokens.rows(); ++r) out.row(r) = (*this)(tokens(r, 0), tokens(r, 1));
  return out;
}

Mat AssembledKey::key_matrix() const { return keys.apply(encode_positions(reference.locations, pe)); }

Mat AssembledKey::token_matrix(const Vec& g) const {
  const int m = reference.m;
  Mat v(m, 2);
  v.col(0) = queries.lambda * g;
  v.col(1).setConstant(queries.lambda);
  const Activation a = mix;
  const RowVec ones = RowVec::Ones(m);
  return tsa(queries.q, key_matrix(), v,
             [a, ones](const Mat& s) { return weighted_mixing(s, [a](double x) { return apply_activation(a, x); }, ones); });
}

Mat AssembledKey::coefficients(const Vec& g) const { return w * readout.apply(token_matrix(g)); }

Mat AssembledKey::output(const Vec& g, const Mat& y) const {
  return synthesize(coefficients(g), reference_basis(reference, y), RowVec::Zero(reference.dout));
}

AssembledKey assemble_key(const ReferenceBranch& b, Activation mix) {
  b.validate();
  const Vec codes = token_codes(b);
  if (!(min_code_gap(codes) > 0.0)) throw ValidationError("assemble: token codes must be pairwise distinct");
  PositionalEncodingConfig pe;
  pe.coordinate_dim = static_cast<int>(b.locations.cols());
  pe.validate();
  Mat w = Mat::Zero(b.p, b.p * b.n);
  for (int k = 0; k < b.p; ++k)
    for (int i = 0; i < b.n; ++i) w(k, k * b.n + i) = b.c(k, i);
  return AssembledKey{b,
                      pe,
                      build_ideal_keys(encode_positions(b.locations, pe)),
                      build_queries_and_scale(b, mix),
                      LagrangeReadout(b, codes),
                      std::move(w),
                      mix};
}

UatReport verify_uat(const UatConfig& cfg) {
  UatReport rep;
  rep.config = cfg;
  SETONET_REQUIRE(cfg.tests >= 1 && cfg.queries >= 1, "verify-uat: tests and queries must be >= 1");
  Rng rng = Rng::stream(cfg.seed, 0x0a7u);
  const ReferenceBranch base = random_reference_branch(cfg.m, cfg.n, cfg.p, cfg.dout, cfg.dy, rng);
  const PerturbResult pert = perturb_for_distinct_codes(base, rng, cfg.magnitude);
  const ReferenceBranch& b = pert.branch;
  const AssembledKey key = assemble_key(b, cfg.mix);
  rep.min_code_gap = pert.min_gap;
  rep.lambda = key.queries.lambda;

  const Mat kmat = key.key_matrix();
  rep.interpolation_error = (kmat - Mat::Identity(cfg.m, cfg.m)).cwiseAbs().maxCoeff();

  const Mat s = key.queries.q * kmat.transpose() / std::sqrt(static_cast<double>(cfg.m));
  for (Eigen::Index a = 0; a < s.rows(); ++a)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      rep.roundtrip_error =
          std::max(rep.roundtrip_error, std::abs(key.queries.alpha * key.queries.lambda * apply_activation(cfg.mix, s(a, j)) -
                                                 b.xi(a, j)));

  const Vec codes = token_codes(b);
  for (Eigen::Index a = 0; a < codes.size(); ++a) {
    Vec l = key.readout.basis()(codes(a));
    l(a) -= 1.0;
    rep.lagrange_error = std::max(rep.lagrange_error, l.cwiseAbs().maxCoeff());
  }

  Mat y(cfg.queries, cfg.dy);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform(-1.0, 1.0);

  {
    const Vec zero = Vec::Zero(cfg.m);
    Mat closed = Mat::Zero(cfg.queries, cfg.dout);
    for (int k = 0; k < cfg.p; ++k) {
      double beta = 0.0;
      for (int i = 0; i < cfg.n; ++i) beta += b.c(k, i) * apply_activation(b.sigma, b.theta(k, i));
      for (int q = 0; q < cfg.queries; ++q)
        closed(q, b.route[k]) += beta * apply_activation(b.sigma, y.row(q).dot(b.w.row(k)) + b.zeta(k));
    }
    rep.zero_input_error = std::max((key.output(zero, y) - closed).cwiseAbs().maxCoeff(),
                                    (reference_output(b, zero, y) - closed).cwiseAbs().maxCoeff());
  }

  for (int t = 0; t < cfg.tests; ++t) {
    Vec g(cfg.m);
    for (int j = 0; j < cfg.m; ++j) g(j) = rng.uniform(-1.0, 1.0);
    const Mat tokens = key.token_matrix(g);
    const Vec sums = b.xi * g;
    for (Eigen::Index a = 0; a < tokens.rows(); ++a)
      rep.token_error = std::max(rep.token_error, std::max(std::abs(tokens(a, 0) - sums(a)), std::abs(tokens(a, 1) - codes(a))));
    const double d = (key.output(g, y) - reference_output(b, g, y)).cwiseAbs().maxCoeff();
    rep.sup_discrepancy = std::max(rep.sup_discrepancy, d);
  }
  rep.pass = rep.sup_discrepancy < cfg.tolerance && std::isfinite(rep.sup_discrepancy);
  return rep;
}

std::string report_to_text(const UatReport& r) {
  std::ostringstream o;
  o.precision(6);
  o << std::scientific;
  o << "m=" << r.config.m << " n=" << r.config.n << " p=" << r.config.p << " d_out=" << r.config.dout
    << " mix=" << to_string(r.config.mix) << " tests=" << r.config.tests << "\n";
  o << "min_code_gap " << r.min_code_gap << "\n";
  o << "lambda " << r.lambda << "\n";
  o << "key_interpolation_error " << r.interpolation_error << "\n";
  o << "mixing_roundtrip_error " << r.roundtrip_error << "\n";
  o << "token_row_error " << r.token_error << "\n";
  o << "lagrange_error " << r.lagrange_error << "\n";
  o << "zero_input_error " << r.zero_input_error << "\n";
  o << "sup_discrepancy " << r.sup_discrepancy << " (tolerance " << r.config.tolerance << ")\n";
  o << (r.pass ? "PASS" : "FAIL") << "\n";
  return o.str();
}

}  // namespace setonet
