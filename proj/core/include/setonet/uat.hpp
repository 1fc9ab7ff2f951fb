#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "setonet/autodiff.hpp"
#include "setonet/encoding.hpp"
#include "setonet/linalg.hpp"
#include "setonet/random.hpp"

namespace setonet {

// Stacked DeepONet with one hidden layer per branch coefficient:
//   beta_k(g) = sum_i c_i^k sigma(sum_j xi_ij^k g(x_j) + theta_i^k)
//   tau_k(y)  = sigma(w_k . y + zeta_k) e_{route(k)}
// Pair (k, i) is flattened to a = k * n + i.
struct ReferenceBranch {
  int m = 0;
  int n = 0;
  int p = 0;
  int dout = 1;
  int dy = 1;
  Mat locations;  // m x d_x
  Mat c;          // p x n
  Mat xi;         // (p n) x m
  Mat theta;      // p x n
  Mat w;          // p x d_y
  Vec zeta;       // p
  std::vector<int> route;
  Activation sigma = Activation::tanh;

  void validate() const;
};

ReferenceBranch random_reference_branch(int m, int n, int p, int dout, int dy, Rng& rng,
                                        Activation sigma = Activation::tanh);

// Row sums gamma_a = sum_j xi_{a j}.
Vec token_codes(const ReferenceBranch& b);
double min_code_gap(const Vec& codes);

// b_k(g) e_route(k) per k: p x d_out.
Mat reference_coefficients(const ReferenceBranch& b, const Vec& g);
// t_k(y) blocks: N x p*d_out.
Mat reference_basis(const ReferenceBranch& b, const Mat& y);
Mat reference_output(const ReferenceBranch& b, const Vec& g, const Mat& y);

struct PerturbResult {
  ReferenceBranch branch;
  double min_gap = 0.0;
  int attempts = 0;
};

// Adds Uniform(-magnitude, magnitude) noise to xi until every code differs.
PerturbResult perturb_for_distinct_codes(const ReferenceBranch& b, Rng& rng, double magnitude, int max_attempts = 100);

// eta_j(z) = prod_{r != j} |z - e_r|^2 / |e_j - e_r|^2
class KeyMap {
public:
  explicit KeyMap(Mat encodings);
  Vec operator()(const Eigen::Ref<const RowVec>& z) const;
  Mat apply(const Mat& z) const;  // row-wise
  const Mat& encodings() const { return e_; }

private:
  Mat e_;
  Vec denom_;
};

KeyMap build_ideal_keys(const Mat& encodings);

struct QueryTokens {
  double lambda = 1.0;
  double alpha = 1.0;  // 1 / sum of the (uniform) weights = 1 / m
  Mat q;               // (p n) x m
  int doublings = 0;
};

// lambda starts at 1 and doubles until every |xi| / (alpha lambda) <= 1/2
// (half of the tanh range), then q = sqrt(m) atanh(xi / (alpha lambda)).
// Only tanh and identity mixing are invertible around zero.
QueryTokens build_queries_and_scale(const ReferenceBranch& b, Activation mix);

// Barycentric Lagrange basis on distinct nodes.
class LagrangeBasis {
public:
  explicit LagrangeBasis(Vec nodes);
  Vec operator()(double c) const;
  // Product form, for comparison.
  Vec product_form(double c) const;
  const Vec& nodes() const { return nodes_; }

private:
  Vec nodes_;
  Vec weights_;
};

// rho(s, c) = sum_a L_a(c) sigma(s + theta_a) e_route(k(a))
class LagrangeReadout {
public:
  LagrangeReadout(const ReferenceBranch& b, const Vec& codes);
  RowVec operator()(double s, double c) const;
  Mat apply(const Mat& tokens) const;  // (p n) x 2 -> (p n) x d_out
  const LagrangeBasis& basis() const { return basis_; }

private:
  LagrangeBasis basis_;
  Vec theta_;
  std::vector<int> route_;
  int dout_;
  Activation sigma_;
};

// The explicit SetONet-Key built from a (perturbed) reference branch.
struct AssembledKey {
  ReferenceBranch reference;
  PositionalEncodingConfig pe;
  KeyMap keys;
  QueryTokens queries;
  LagrangeReadout readout;
  Mat w;  // p x (p n), W_{k,(k',i)} = c_i^k delta_{k k'}
  Activation mix = Activation::tanh;

  Mat key_matrix() const;                      // m x m
  Mat token_matrix(const Vec& g) const;        // (p n) x 2
  Mat coefficients(const Vec& g) const;        // p x d_out
  Mat output(const Vec& g, const Mat& y) const;
};

AssembledKey assemble_key(const ReferenceBranch& perturbed, Activation mix = Activation::tanh);

struct UatConfig {
  int m = 3;
  int n = 2;
  int p = 2;
  int dout = 2;
  int dy = 1;
  int tests = 100;
  int queries = 16;
  double magnitude = 1e-2;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  Activation mix = Activation::tanh;
};

struct UatReport {
  UatConfig config;
  double min_code_gap = 0.0;
  double lambda = 0.0;
  double interpolation_error = 0.0;  // |eta(e_j) - I|
  double roundtrip_error = 0.0;      // |alpha lambda a(q.K/sqrt(d_k)) - xi|
  double token_error = 0.0;          // token rows vs (sum xi g, gamma)
  double lagrange_error = 0.0;       // |L(gamma) - I|
  double zero_input_error = 0.0;     // g = 0 against the closed form
  double sup_discrepancy = 0.0;
  bool pass = false;
};

UatReport verify_uat(const UatConfig& cfg);
std::string report_to_text(const UatReport& r);

}  // namespace setonet
