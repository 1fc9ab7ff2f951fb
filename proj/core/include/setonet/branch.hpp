#pragma once

#include <memory>
#include <string>
#include <vector>

#include "setonet/autodiff.hpp"
#include "setonet/batch.hpp"
#include "setonet/encoding.hpp"
#include "setonet/nn.hpp"

namespace setonet {

enum class BranchVariant { key, attention, mean, sum, deeponet, vidon };

BranchVariant branch_variant_from_string(const std::string& s);
std::string to_string(BranchVariant v);
bool is_set_based(BranchVariant v);

struct BranchConfig {
  BranchVariant variant = BranchVariant::key;
  int dx = 1;
  int du = 1;
  int dout = 1;
  int p = 32;
  Activation act = Activation::relu;
  PositionalEncodingConfig pe;

  // key
  int d_k = 64;
  int d_v = 32;
  int n_pool = 270;
  Activation mix = Activation::softplus;
  bool augment_values_with_coords = false;
  bool key_uses_raw_coords = true;
  std::vector<int> key_hidden{200};
  std::vector<int> value_hidden{256};
  std::vector<int> rho_tok_hidden{200};

  // attention / mean / sum
  int heads = 4;
  std::vector<int> phi_hidden{256, 256};
  std::vector<int> rho_hidden{300};

  // deeponet
  int m_fixed = 0;
  std::vector<int> deeponet_hidden{128, 128, 128};

  // vidon
  int vidon_enc = 40;
  std::vector<int> vidon_enc_hidden{40, 40, 40};
  std::vector<int> vidon_head_hidden{128, 128, 128};
  int vidon_head_out = 64;
  std::vector<int> vidon_out_hidden{256, 256};

  void validate() const;
};

// b_k stacked per sample: coef has size*p rows and d_out columns. bias is the
// learnable b_0 (1 x d_out) or kNoNode for variants without one.
struct BranchOutput {
  NodeId coef = kNoNode;
  NodeId bias = kNoNode;
};

class Branch {
public:
  explicit Branch(BranchConfig cfg) : cfg_(std::move(cfg)) {}
  virtual ~Branch() = default;

  virtual BranchOutput forward(Tape& tape, const SensorBatch& s) = 0;
  virtual void visit(const ParamVisitor& f) = 0;

  const BranchConfig& config() const { return cfg_; }
  long long param_count();

protected:
  BranchConfig cfg_;
};

std::unique_ptr<Branch> make_branch(const BranchConfig& cfg, Rng& rng);

class KeyBranch : public Branch {
public:
  KeyBranch(const BranchConfig& cfg, Rng& rng);
  BranchOutput forward(Tape& tape, const SensorBatch& s) override;
  void visit(const ParamVisitor& f) override;

  // Mixing matrix for a single layout (n_pool x M), exposed for tests.
  Mat mixing_matrix(const Mat& locations, const Vec& weights);

  Mlp& key_net() { return key_net_; }
  Mlp& value_net() { return value_net_; }
  Mlp& rho_tok() { return rho_tok_; }
  Param& tokens() { return tokens_; }
  Param& projection() { return w_; }
  Param& bias() { return b0_; }

private:
  Mat key_input(const Mat& locations) const;

  Mlp key_net_;
  Mlp value_net_;
  Mlp rho_tok_;
  Param tokens_;
  Param w_;
  Param b0_;
};

class PooledBranch : public Branch {
public:
  PooledBranch(const BranchConfig& cfg, Rng& rng);
  BranchOutput forward(Tape& tape, const SensorBatch& s) override;
  void visit(const ParamVisitor& f) override;

  // The pooled set representation (size x d) before rho, for tests.
  NodeId pooled(Tape& tape, const SensorBatch& s);

  Mlp& phi() { return phi_; }
  Mlp& rho() { return rho_; }

private:
  Mlp phi_;
  Mlp rho_;
  Param token_;
  Linear q_proj_;
  Linear k_proj_;
  Linear v_proj_;
  Linear out_proj_;
  Param b0_;
};

class DeepONetBranch : public Branch {
public:
  DeepONetBranch(const BranchConfig& cfg, Rng& rng);
  BranchOutput forward(Tape& tape, const SensorBatch& s) override;
  void visit(const ParamVisitor& f) override;

  Mlp& net() { return net_; }

private:
  Mlp net_;
};

class VidonBranch : public Branch {
public:
  VidonBranch(const BranchConfig& cfg, Rng& rng);
  BranchOutput forward(Tape& tape, const SensorBatch& s) override;
  void visit(const ParamVisitor& f) override;

  // Concatenated head outputs (size x heads*head_out), for tests.
  NodeId heads(Tape& tape, const SensorBatch& s);

private:
  Mlp coord_enc_;
  Mlp value_enc_;
  std::vector<Mlp> score_nets_;
  std::vector<Mlp> value_nets_;
  Mlp out_;
};

}  // namespace setonet
