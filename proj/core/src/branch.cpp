#include "setonet/branch.hpp"

#include <cmath>

#include "setonet/errors.hpp"

namespace setonet {

namespace {

std::vector<int> widths(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

Mat gaussian_mat(Eigen::Index r, Eigen::Index c, double sd, Rng& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, sd);
  return m;
}

Mat uniform_mat(Eigen::Index r, Eigen::Index c, double bound, Rng& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

void check_batch(const BranchConfig& cfg, const SensorBatch& s) {
  if (s.size < 1 || s.m < 1) throw ValidationError("branch forward: empty sensor set");
  if (s.locations.cols() != cfg.dx)
    throw ValidationError("branch forward: locations have " + std::to_string(s.locations.cols()) +
                          " columns, expected d_x=" + std::to_string(cfg.dx));
  if (s.values.cols() != cfg.du)
    throw ValidationError("branch forward: values have " + std::to_string(s.values.cols()) +
                          " columns, expected d_u=" + std::to_string(cfg.du));
  if (s.values.rows() != s.size * s.m) throw ValidationError("branch forward: value rows differ from size*M");
  if (!s.values.allFinite() || !s.locations.allFinite())
    throw ValidationError("branch forward: nonfinite sensor data");
}

}  // namespace

BranchVariant branch_variant_from_string(const std::string& s) {
  if (s == "key" || s == "setonet-key") return BranchVariant::key;
  if (s == "attention") return BranchVariant::attention;
  if (s == "mean") return BranchVariant::mean;
  if (s == "sum") return BranchVariant::sum;
  if (s == "deeponet") return BranchVariant::deeponet;
  if (s == "vidon") return BranchVariant::vidon;
  throw ValidationError("variant: unknown value '" + s +
                        "' (expected key, attention, mean, sum, deeponet or vidon)");
}

std::string to_string(BranchVariant v) {
  switch (v) {
    case BranchVariant::key: return "key";
    case BranchVariant::attention: return "attention";
    case BranchVariant::mean: return "mean";
    case BranchVariant::sum: return "sum";
    case BranchVariant::deeponet: return "deeponet";
    case BranchVariant::vidon: return "vidon";
  }
  return "?";
}

bool is_set_based(BranchVariant v) { return v != BranchVariant::deeponet; }

void BranchConfig::validate() const {
  SETONET_REQUIRE(dx >= 1 && du >= 1 && dout >= 1, "branch: d_x, d_u and d_out must be >= 1");
  SETONET_REQUIRE(p >= 1, "branch: p must be >= 1");
  auto positive = [](const std::vector<int>& v) {
    for (int w : v)
      if (w <= 0) return false;
    return true;
  };
  switch (variant) {
    case BranchVariant::key:
      pe.validate();
      SETONET_REQUIRE(pe.coordinate_dim == dx, "branch: positional encoding coordinate_dim must equal d_x");
      SETONET_REQUIRE(d_k >= 1 && d_v >= 1 && n_pool >= 1, "branch: d_k, d_v and n_pool must be >= 1");
      SETONET_REQUIRE(mix == Activation::softplus || mix == Activation::tanh,
                      "branch: mix_fn must be softplus or tanh");
      SETONET_REQUIRE(positive(key_hidden) && positive(value_hidden) && positive(rho_tok_hidden),
                      "branch: hidden widths must be positive");
      break;
    case BranchVariant::attention:
      SETONET_REQUIRE(heads >= 1 && d_v % heads == 0, "branch: d_v must split evenly across attention heads");
      [[fallthrough]];
    case BranchVariant::mean:
    case BranchVariant::sum:
      pe.validate();
      SETONET_REQUIRE(pe.coordinate_dim == dx, "branch: positional encoding coordinate_dim must equal d_x");
      SETONET_REQUIRE(d_v >= 1 && positive(phi_hidden) && positive(rho_hidden), "branch: widths must be positive");
      break;
    case BranchVariant::deeponet:
      SETONET_REQUIRE(m_fixed >= 1, "branch: deeponet needs the fixed sensor count m_fixed");
      SETONET_REQUIRE(positive(deeponet_hidden), "branch: widths must be positive");
      break;
    case BranchVariant::vidon:
      SETONET_REQUIRE(heads >= 1 && vidon_enc >= 1 && vidon_head_out >= 1, "branch: vidon sizes must be >= 1");
      SETONET_REQUIRE(positive(vidon_enc_hidden) && positive(vidon_head_hidden) && positive(vidon_out_hidden),
                      "branch: widths must be positive");
      break;
  }
}

long long Branch::param_count() {
  return count_params([this](const ParamVisitor& f) { visit(f); });
}

std::unique_ptr<Branch> make_branch(const BranchConfig& cfg, Rng& rng) {
  cfg.validate();
  switch (cfg.variant) {
    case BranchVariant::key: return std::make_unique<KeyBranch>(cfg, rng);
    case BranchVariant::attention:
    case BranchVariant::mean:
    case BranchVariant::sum: return std::make_unique<PooledBranch>(cfg, rng);
    case BranchVariant::deeponet: return std::make_unique<DeepONetBranch>(cfg, rng);
    case BranchVariant::vidon: return std::make_unique<VidonBranch>(cfg, rng);
  }
  throw ValidationError("unhandled branch variant");
}

// ---------------------------------------------------------------- key

KeyBranch::KeyBranch(const BranchConfig& cfg, Rng& rng) : Branch(cfg) {
  const int key_in = cfg.pe.embed_dim + (cfg.key_uses_raw_coords ? cfg.dx : 0);
  const int val_in = cfg.du + (cfg.augment_values_with_coords ? cfg.dx : 0);
  key_net_ = Mlp("branch.key", widths(key_in, cfg.key_hidden, cfg.d_k), cfg.act, rng);
  value_net_ = Mlp("branch.value", widths(val_in, cfg.value_hidden, cfg.d_v), cfg.act, rng);
  rho_tok_ = Mlp("branch.rho_tok", widths(cfg.d_v, cfg.rho_tok_hidden, cfg.dout), cfg.act, rng);
  tokens_ = Param("branch.tokens", gaussian_mat(cfg.n_pool, cfg.d_k, 0.02, rng));
  w_ = Param("branch.W", uniform_mat(cfg.p, cfg.n_pool, 1.0 / std::sqrt(static_cast<double>(cfg.n_pool)), rng));
  b0_ = Param("branch.b0", Mat::Zero(1, cfg.dout));
}

void KeyBranch::visit(const ParamVisitor& f) {
  key_net_.visit(f);
  value_net_.visit(f);
  rho_tok_.visit(f);
  f(tokens_);
  f(w_);
  f(b0_);
}

Mat KeyBranch::key_input(const Mat& locations) const {
  Mat pe = encode_positions(locations, cfg_.pe);
  if (!cfg_.key_uses_raw_coords) return pe;
  Mat in(locations.rows(), pe.cols() + locations.cols());
  in << pe, locations;
  return in;
}

Mat KeyBranch::mixing_matrix(const Mat& locations, const Vec& weights) {
  Tape tape(false);
  NodeId k = key_net_.forward(tape, tape.constant(key_input(locations)));
  NodeId s = tape.scale(tape.matmul_nt(tape.param(tokens_), k), 1.0 / std::sqrt(static_cast<double>(cfg_.d_k)));
  NodeId a = tape.activate(s, cfg_.mix);
  RowVec w = weights.transpose() / weights.sum();
  return tape.value(tape.scale_cols(a, w, cfg_.n_pool));
}

BranchOutput KeyBranch::forward(Tape& tape, const SensorBatch& s) {
  check_batch(cfg_, s);
  const double inv = 1.0 / std::sqrt(static_cast<double>(cfg_.d_k));
  NodeId keys = key_net_.forward(tape, tape.constant(key_input(s.locations)));
  NodeId q = tape.param(tokens_);
  NodeId scores = s.shared_layout ? tape.matmul_nt(q, keys) : tape.group_matmul_nt(q, keys, s.size);
  NodeId mixed = tape.activate(tape.scale(scores, inv), cfg_.mix);
  NodeId a = tape.scale_cols(mixed, s.normalized_weights(), cfg_.n_pool);

  Mat val_in;
  if (cfg_.augment_values_with_coords) {
    val_in.resize(s.values.rows(), cfg_.du + cfg_.dx);
    val_in << s.values, s.tiled_locations();
  } else {
    val_in = s.values;
  }
  NodeId v = value_net_.forward(tape, tape.constant(std::move(val_in)));
  NodeId pooled = tape.group_matmul(a, v, s.size, s.shared_layout);
  NodeId r = rho_tok_.forward(tape, pooled);
  NodeId coef = tape.group_matmul(tape.param(w_), r, s.size, true);
  return {coef, tape.param(b0_)};
}

// ---------------------------------------------------------------- pooled

PooledBranch::PooledBranch(const BranchConfig& cfg, Rng& rng) : Branch(cfg) {
  phi_ = Mlp("branch.phi", widths(cfg.pe.embed_dim + cfg.du, cfg.phi_hidden, cfg.d_v), cfg.act, rng);
  if (cfg.variant == BranchVariant::attention) {
    token_ = Param("branch.pool_token", gaussian_mat(1, cfg.d_v, 0.02, rng));
    q_proj_ = Linear("branch.attn.q", cfg.d_v, cfg.d_v, rng);
    k_proj_ = Linear("branch.attn.k", cfg.d_v, cfg.d_v, rng);
    v_proj_ = Linear("branch.attn.v", cfg.d_v, cfg.d_v, rng);
    out_proj_ = Linear("branch.attn.out", cfg.d_v, cfg.d_v, rng);
  }
  rho_ = Mlp("branch.rho", widths(cfg.d_v, cfg.rho_hidden, cfg.p * cfg.dout), cfg.act, rng);
  b0_ = Param("branch.b0", Mat::Zero(1, cfg.dout));
}

void PooledBranch::visit(const ParamVisitor& f) {
  phi_.visit(f);
  if (cfg_.variant == BranchVariant::attention) {
    f(token_);
    q_proj_.visit(f);
    k_proj_.visit(f);
    v_proj_.visit(f);
    out_proj_.visit(f);
  }
  rho_.visit(f);
  f(b0_);
}

NodeId PooledBranch::pooled(Tape& tape, const SensorBatch& s) {
  check_batch(cfg_, s);
  Mat pe = encode_positions(s.tiled_locations(), cfg_.pe);
  Mat feat(pe.rows(), pe.cols() + cfg_.du);
  feat << pe, s.values;
  NodeId v = phi_.forward(tape, tape.constant(std::move(feat)));
  switch (cfg_.variant) {
    case BranchVariant::sum: return tape.segment_sum(v, s.m);
    case BranchVariant::mean: return tape.scale(tape.segment_sum(v, s.m), 1.0 / static_cast<double>(s.m));
    default: break;
  }
  // Multi-head cross-attention from one learnable token onto the sensor
  // embeddings, one softmax per head over the sensors of each sample.
  const int h = cfg_.heads;
  const int dh = cfg_.d_v / h;
  Mat e = Mat::Zero(cfg_.d_v, h);
  for (int c = 0; c < cfg_.d_v; ++c) e(c, c / dh) = 1.0;
  NodeId qp = q_proj_.forward(tape, tape.param(token_));
  NodeId kp = k_proj_.forward(tape, v);
  NodeId vp = v_proj_.forward(tape, v);
  NodeId scores = tape.scale(tape.matmul(tape.mul_row(kp, qp), tape.constant(e)),
                             1.0 / std::sqrt(static_cast<double>(dh)));
  NodeId alpha = tape.segment_softmax(scores, s.m);
  NodeId alpha_full = tape.matmul(alpha, tape.constant(e.transpose()));
  NodeId heads = tape.segment_sum(tape.hadamard(alpha_full, vp), s.m);
  return out_proj_.forward(tape, heads);
}

BranchOutput PooledBranch::forward(Tape& tape, const SensorBatch& s) {
  NodeId pooled_rep = pooled(tape, s);
  NodeId out = rho_.forward(tape, pooled_rep);
  NodeId coef = tape.reshape(out, s.size * cfg_.p, cfg_.dout);
  return {coef, tape.param(b0_)};
}

// ---------------------------------------------------------------- deeponet

DeepONetBranch::DeepONetBranch(const BranchConfig& cfg, Rng& rng) : Branch(cfg) {
  net_ = Mlp("branch.net", widths(cfg.m_fixed * cfg.du, cfg.deeponet_hidden, cfg.p * cfg.dout), cfg.act, rng);
}

void DeepONetBranch::visit(const ParamVisitor& f) { net_.visit(f); }

BranchOutput DeepONetBranch::forward(Tape& tape, const SensorBatch& s) {
  check_batch(cfg_, s);
  if (s.m != cfg_.m_fixed)
    throw ValidationError("deeponet branch was built for M=" + std::to_string(cfg_.m_fixed) + " sensors, got " +
                          std::to_string(s.m));
  NodeId x = tape.reshape(tape.constant(s.values), s.size, s.m * cfg_.du);
  NodeId out = net_.forward(tape, x);
  return {tape.reshape(out, s.size * cfg_.p, cfg_.dout), kNoNode};
}

// ---------------------------------------------------------------- vidon

VidonBranch::VidonBranch(const BranchConfig& cfg, Rng& rng) : Branch(cfg) {
  coord_enc_ = Mlp("branch.coord_enc", widths(cfg.dx, cfg.vidon_enc_hidden, cfg.vidon_enc), cfg.act, rng);
  value_enc_ = Mlp("branch.value_enc", widths(cfg.du, cfg.vidon_enc_hidden, cfg.vidon_enc), cfg.act, rng);
  for (int h = 0; h < cfg.heads; ++h) {
    score_nets_.emplace_back("branch.head" + std::to_string(h) + ".score",
                             widths(cfg.vidon_enc, cfg.vidon_head_hidden, 1), cfg.act, rng);
    value_nets_.emplace_back("branch.head" + std::to_string(h) + ".value",
                             widths(cfg.vidon_enc, cfg.vidon_head_hidden, cfg.vidon_head_out), cfg.act, rng);
  }
  out_ = Mlp("branch.out", widths(cfg.heads * cfg.vidon_head_out, cfg.vidon_out_hidden, cfg.p * cfg.dout), cfg.act,
             rng);
}

void VidonBranch::visit(const ParamVisitor& f) {
  coord_enc_.visit(f);
  value_enc_.visit(f);
  for (int h = 0; h < cfg_.heads; ++h) {
    score_nets_[h].visit(f);
    value_nets_[h].visit(f);
  }
  out_.visit(f);
}

NodeId VidonBranch::heads(Tape& tape, const SensorBatch& s) {
  check_batch(cfg_, s);
  NodeId enc = tape.add(coord_enc_.forward(tape, tape.constant(s.tiled_locations())),
                        value_enc_.forward(tape, tape.constant(s.values)));
  NodeId ones = tape.constant(Mat::Ones(1, cfg_.vidon_head_out));
  std::vector<NodeId> outs;
  for (int h = 0; h < cfg_.heads; ++h) {
    NodeId w = tape.segment_softmax(score_nets_[h].forward(tape, enc), s.m);
    NodeId v = value_nets_[h].forward(tape, enc);
    outs.push_back(tape.segment_sum(tape.hadamard(tape.matmul(w, ones), v), s.m));
  }
  return tape.concat_cols(outs);
}

BranchOutput VidonBranch::forward(Tape& tape, const SensorBatch& s) {
  NodeId out = out_.forward(tape, heads(tape, s));
  return {tape.reshape(out, s.size * cfg_.p, cfg_.dout), kNoNode};
}

}  // namespace setonet
