#pragma once

#include <functional>
#include <string>
#include <vector>

#include "setonet/linalg.hpp"

namespace setonet {

enum class Activation { relu, tanh, softplus, gelu, identity };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

double apply_activation(Activation a, double x);

// Trainable tensor together with its gradient and optimizer moments.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat m;
  Mat v;

  Param() = default;
  Param(std::string n, Mat init) : name(std::move(n)), value(std::move(init)) { reset_state(); }

  Eigen::Index size() const { return value.size(); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  void reset_state() {
    grad.setZero(value.rows(), value.cols());
    m.setZero(value.rows(), value.cols());
    v.setZero(value.rows(), value.cols());
  }
};

using ParamVisitor = std::function<void(Param&)>;

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

// Reverse-mode tape. Rows index items (sensors, tokens, queries), columns
// index features. A tape is single-use: build, backward, discard.
class Tape {
public:
  // With record=false parameters enter as constants and no closures are kept.
  explicit Tape(bool record = true) : record_(record) {}

  NodeId constant(Mat v);
  NodeId param(Param& p);

  const Mat& value(NodeId id) const { return nodes_[id].val; }
  const Mat& grad(NodeId id) const { return nodes_[id].grad; }
  bool requires_grad(NodeId id) const { return nodes_[id].rg; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)=1 for a 1x1 node and propagates to every parameter leaf.
  void backward(NodeId loss);

  NodeId matmul(NodeId a, NodeId b);
  NodeId matmul_nt(NodeId a, NodeId b);
  // x * w + bias, with bias optional (kNoNode).
  NodeId affine(NodeId x, NodeId w, NodeId bias);
  NodeId add_bias(NodeId x, NodeId bias);
  NodeId mul_row(NodeId x, NodeId row);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId activate(NodeId x, Activation act);

  // Rows of x come in consecutive groups of `group_rows`; group g has its
  // columns multiplied by row g of the constant w.
  NodeId scale_cols(NodeId x, const Mat& w, Eigen::Index group_rows);

  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId slice_cols(NodeId x, Eigen::Index start, Eigen::Index n);
  NodeId reshape(NodeId x, Eigen::Index rows, Eigen::Index cols);

  NodeId segment_sum(NodeId x, Eigen::Index seg);
  NodeId segment_softmax(NodeId x, Eigen::Index seg);

  // out_g = A_g * X_g for g < groups. X has groups*M rows. With shared_a the
  // same A (n x M) is used for every group, otherwise A stacks groups*n rows.
  NodeId group_matmul(NodeId a, NodeId x, Eigen::Index groups, bool shared_a);
  // out_g = Q * K_g^T with a shared Q (n x d) and K stacking groups*M rows.
  NodeId group_matmul_nt(NodeId q, NodeId k, Eigen::Index groups);

  // pred[g*N + q, c] = sum_k coef[g*p + k, c] * basis[q, k*dout + c]
  //                    (+ tau0[q, c]) (+ b0[c])
  // basis/tau0 are shared (N rows) or per group (groups*N rows).
  NodeId synthesize(NodeId coef, NodeId basis, NodeId tau0, NodeId b0, Eigen::Index groups,
                    Eigen::Index p, Eigen::Index dout, bool shared_basis);

  NodeId mse(NodeId pred, const Mat& target);

private:
  struct Node {
    Mat val;
    Mat grad;
    bool rg = false;
    Param* param = nullptr;
    std::function<void()> back;
  };

  NodeId push(Mat v, bool rg);
  Mat& g(NodeId id);

  std::vector<Node> nodes_;
  bool record_ = true;
};

}  // namespace setonet
