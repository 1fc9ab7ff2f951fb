#include "setonet/autodiff.hpp"

#include <cmath>

#include "setonet/errors.hpp"

namespace setonet {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double activation_grad(Activation a, double x, double y) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - y * y;
    case Activation::softplus: return sigmoid(x);
    case Activation::gelu:
      return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
    case Activation::identity: return 1.0;
  }
  return 0.0;
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "softplus") return Activation::softplus;
  if (name == "gelu") return Activation::gelu;
  if (name == "identity") return Activation::identity;
  throw ValidationError("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::softplus: return "softplus";
    case Activation::gelu: return "gelu";
    case Activation::identity: return "identity";
  }
  return "?";
}

double apply_activation(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::softplus: return softplus(x);
    case Activation::gelu: return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
    case Activation::identity: return x;
  }
  return x;
}

NodeId Tape::push(Mat v, bool rg) {
  Node n;
  n.val = std::move(v);
  n.rg = rg;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Mat& Tape::g(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad.setZero(n.val.rows(), n.val.cols());
  return n.grad;
}

NodeId Tape::constant(Mat v) { return push(std::move(v), false); }

NodeId Tape::param(Param& p) {
  NodeId id = push(p.value, record_);
  if (record_) nodes_[id].param = &p;
  return id;
}

void Tape::backward(NodeId loss) {
  if (nodes_[loss].val.size() != 1) throw ValidationError("backward needs a scalar loss node");
  g(loss)(0, 0) = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.rg || n.grad.size() == 0) continue;
    if (n.back) n.back();
    if (n.param) {
      Param& p = *nodes_[id].param;
      if (p.grad.size() == 0) p.grad.setZero(p.value.rows(), p.value.cols());
      p.grad += nodes_[id].grad;
    }
  }
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  if (A.cols() != B.rows()) throw ValidationError("matmul: inner dimension mismatch");
  Mat out;
  out.noalias() = A * B;
  NodeId id = push(std::move(out), nodes_[a].rg || nodes_[b].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, a, b] {
      const Mat& G = nodes_[id].grad;
      if (nodes_[a].rg) g(a).noalias() += G * nodes_[b].val.transpose();
      if (nodes_[b].rg) g(b).noalias() += nodes_[a].val.transpose() * G;
    };
  }
  return id;
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  if (A.cols() != B.cols()) throw ValidationError("matmul_nt: inner dimension mismatch");
  Mat out;
  out.noalias() = A * B.transpose();
  NodeId id = push(std::move(out), nodes_[a].rg || nodes_[b].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, a, b] {
      const Mat& G = nodes_[id].grad;
      if (nodes_[a].rg) g(a).noalias() += G * nodes_[b].val;
      if (nodes_[b].rg) g(b).noalias() += G.transpose() * nodes_[a].val;
    };
  }
  return id;
}

NodeId Tape::affine(NodeId x, NodeId w, NodeId bias) {
  const Mat& X = value(x);
  const Mat& W = value(w);
  if (X.cols() != W.rows()) throw ValidationError("affine: inner dimension mismatch");
  Mat out;
  out.noalias() = X * W;
  if (bias != kNoNode) {
    const Mat& b = value(bias);
    if (b.rows() != 1 || b.cols() != W.cols()) throw ValidationError("affine: bias shape mismatch");
    out.rowwise() += b.row(0);
  }
  const bool rg = nodes_[x].rg || nodes_[w].rg || (bias != kNoNode && nodes_[bias].rg);
  NodeId id = push(std::move(out), rg);
  if (rg) {
    nodes_[id].back = [this, id, x, w, bias] {
      const Mat& G = nodes_[id].grad;
      if (nodes_[x].rg) g(x).noalias() += G * nodes_[w].val.transpose();
      if (nodes_[w].rg) g(w).noalias() += nodes_[x].val.transpose() * G;
      if (bias != kNoNode && nodes_[bias].rg) g(bias) += G.colwise().sum();
    };
  }
  return id;
}

NodeId Tape::add_bias(NodeId x, NodeId bias) {
  const Mat& X = value(x);
  const Mat& b = value(bias);
  if (b.rows() != 1 || b.cols() != X.cols()) throw ValidationError("add_bias: shape mismatch");
  Mat out = X.rowwise() + b.row(0);
  NodeId id = push(std::move(out), nodes_[x].rg || nodes_[bias].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, x, bias] {
      const Mat& G = nodes_[id].grad;
      if (nodes_[x].rg) g(x) += G;
      if (nodes_[bias].rg) g(bias) += G.colwise().sum();
    };
  }
  return id;
}

NodeId Tape::mul_row(NodeId x, NodeId row) {
  const Mat& X = value(x);
  const Mat& r = value(row);
  if (r.rows() != 1 || r.cols() != X.cols()) throw ValidationError("mul_row: shape mismatch");
  Mat out = X.array().rowwise() * r.row(0).array();
  NodeId id = push(std::move(out), nodes_[x].rg || nodes_[row].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, x, row] {
      const Mat& G = nodes_[id].grad;
      if (nodes_[x].rg) g(x).array() += G.array().rowwise() * nodes_[row].val.row(0).array();
      if (nodes_[row].rg) g(row) += (G.array() * nodes_[x].val.array()).colwise().sum().matrix();
    };
  }
  return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
    throw ValidationError("add: shape mismatch");
  Mat out = value(a) + value(b);
  NodeId id = push(std::move(out), nodes_[a].rg || nodes_[b].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, a, b] {
      if (nodes_[a].rg) g(a) += nodes_[id].grad;
      if (nodes_[b].rg) g(b) += nodes_[id].grad;
    };
  }
  return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
    throw ValidationError("sub: shape mismatch");
  Mat out = value(a) - value(b);
  NodeId id = push(std::move(out), nodes_[a].rg || nodes_[b].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, a, b] {
      if (nodes_[a].rg) g(a) += nodes_[id].grad;
      if (nodes_[b].rg) g(b) -= nodes_[id].grad;
    };
  }
  return id;
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
    throw ValidationError("hadamard: shape mismatch");
  Mat out = value(a).cwiseProduct(value(b));
  NodeId id = push(std::move(out), nodes_[a].rg || nodes_[b].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, a, b] {
      const Mat& G = nodes_[id].grad;
      if (nodes_[a].rg) g(a) += G.cwiseProduct(nodes_[b].val);
      if (nodes_[b].rg) g(b) += G.cwiseProduct(nodes_[a].val);
    };
  }
  return id;
}

NodeId Tape::scale(NodeId a, double s) {
  Mat out = value(a) * s;
  NodeId id = push(std::move(out), nodes_[a].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, a, s] { g(a) += nodes_[id].grad * s; };
  }
  return id;
}

NodeId Tape::activate(NodeId x, Activation act) {
  if (act == Activation::identity) return x;
  const Mat& X = value(x);
  Mat out = act == Activation::relu ? Mat(X.cwiseMax(0.0))
                                    : Mat(X.unaryExpr([act](double v) { return apply_activation(act, v); }));
  NodeId id = push(std::move(out), nodes_[x].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, x, act] {
      const Mat& G = nodes_[id].grad;
      const Mat& X = nodes_[x].val;
      const Mat& Y = nodes_[id].val;
      Mat& gx = g(x);
      if (act == Activation::relu) {
        gx.array() += (X.array() > 0.0).select(G.array(), 0.0);
        return;
      }
      const Eigen::Index n = X.size();
      const double* xp = X.data();
      const double* yp = Y.data();
      const double* gp = G.data();
      double* op = gx.data();
      for (Eigen::Index i = 0; i < n; ++i) op[i] += gp[i] * activation_grad(act, xp[i], yp[i]);
    };
  }
  return id;
}

NodeId Tape::scale_cols(NodeId x, const Mat& w, Eigen::Index group_rows) {
  const Mat& X = value(x);
  if (group_rows <= 0 || X.rows() % group_rows != 0 || X.rows() / group_rows != w.rows() ||
      w.cols() != X.cols())
    throw ValidationError("scale_cols: shape mismatch");
  Mat out(X.rows(), X.cols());
  for (Eigen::Index gi = 0; gi < w.rows(); ++gi)
    out.middleRows(gi * group_rows, group_rows) =
        X.middleRows(gi * group_rows, group_rows).array().rowwise() * w.row(gi).array();
  NodeId id = push(std::move(out), nodes_[x].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, x, w, group_rows] {
      const Mat& G = nodes_[id].grad;
      Mat& gx = g(x);
      for (Eigen::Index gi = 0; gi < w.rows(); ++gi)
        gx.middleRows(gi * group_rows, group_rows).array() +=
            G.middleRows(gi * group_rows, group_rows).array().rowwise() * w.row(gi).array();
    };
  }
  return id;
}

NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw ValidationError("concat_cols: no inputs");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool rg = false;
  for (NodeId p : parts) {
    if (value(p).rows() != rows) throw ValidationError("concat_cols: row mismatch");
    cols += value(p).cols();
    rg = rg || nodes_[p].rg;
  }
  Mat out(rows, cols);
  Eigen::Index c = 0;
  for (NodeId p : parts) {
    out.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
  }
  NodeId id = push(std::move(out), rg);
  if (rg) {
    nodes_[id].back = [this, id, parts] {
      Eigen::Index c = 0;
      for (NodeId p : parts) {
        const Eigen::Index w = nodes_[p].val.cols();
        if (nodes_[p].rg) g(p) += nodes_[id].grad.middleCols(c, w);
        c += w;
      }
    };
  }
  return id;
}

NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw ValidationError("concat_rows: no inputs");
  const Eigen::Index cols = value(parts[0]).cols();
  Eigen::Index rows = 0;
  bool rg = false;
  for (NodeId p : parts) {
    if (value(p).cols() != cols) throw ValidationError("concat_rows: column mismatch");
    rows += value(p).rows();
    rg = rg || nodes_[p].rg;
  }
  Mat out(rows, cols);
  Eigen::Index r = 0;
  for (NodeId p : parts) {
    out.middleRows(r, value(p).rows()) = value(p);
    r += value(p).rows();
  }
  NodeId id = push(std::move(out), rg);
  if (rg) {
    nodes_[id].back = [this, id, parts] {
      Eigen::Index r = 0;
      for (NodeId p : parts) {
        const Eigen::Index h = nodes_[p].val.rows();
        if (nodes_[p].rg) g(p) += nodes_[id].grad.middleRows(r, h);
        r += h;
      }
    };
  }
  return id;
}

NodeId Tape::slice_cols(NodeId x, Eigen::Index start, Eigen::Index n) {
  const Mat& X = value(x);
  if (start < 0 || n < 0 || start + n > X.cols()) throw ValidationError("slice_cols: out of range");
  Mat out = X.middleCols(start, n);
  NodeId id = push(std::move(out), nodes_[x].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, x, start, n] { g(x).middleCols(start, n) += nodes_[id].grad; };
  }
  return id;
}

NodeId Tape::reshape(NodeId x, Eigen::Index rows, Eigen::Index cols) {
  const Mat& X = value(x);
  if (rows * cols != X.size()) throw ValidationError("reshape: size mismatch");
  Mat out = Eigen::Map<const Mat>(X.data(), rows, cols);
  NodeId id = push(std::move(out), nodes_[x].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, x] {
      Mat& gx = g(x);
      Eigen::Map<Mat>(gx.data(), nodes_[id].val.rows(), nodes_[id].val.cols()) += nodes_[id].grad;
    };
  }
  return id;
}

NodeId Tape::segment_sum(NodeId x, Eigen::Index seg) {
  const Mat& X = value(x);
  if (seg <= 0 || X.rows() % seg != 0) throw ValidationError("segment_sum: bad segment size");
  const Eigen::Index groups = X.rows() / seg;
  Mat out(groups, X.cols());
  for (Eigen::Index gi = 0; gi < groups; ++gi) out.row(gi) = X.middleRows(gi * seg, seg).colwise().sum();
  NodeId id = push(std::move(out), nodes_[x].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, x, seg] {
      const Mat& G = nodes_[id].grad;
      Mat& gx = g(x);
      for (Eigen::Index gi = 0; gi < G.rows(); ++gi)
        gx.middleRows(gi * seg, seg).rowwise() += G.row(gi);
    };
  }
  return id;
}

NodeId Tape::segment_softmax(NodeId x, Eigen::Index seg) {
  const Mat& X = value(x);
  if (seg <= 0 || X.rows() % seg != 0) throw ValidationError("segment_softmax: bad segment size");
  const Eigen::Index groups = X.rows() / seg;
  Mat out(X.rows(), X.cols());
  for (Eigen::Index gi = 0; gi < groups; ++gi) {
    auto blk = X.middleRows(gi * seg, seg);
    RowVec mx = blk.colwise().maxCoeff();
    Mat e = (blk.rowwise() - mx).array().exp();
    RowVec s = e.colwise().sum();
    out.middleRows(gi * seg, seg) = e.array().rowwise() / s.array();
  }
  NodeId id = push(std::move(out), nodes_[x].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, x, seg] {
      const Mat& G = nodes_[id].grad;
      const Mat& Y = nodes_[id].val;
      Mat& gx = g(x);
      for (Eigen::Index gi = 0; gi < Y.rows() / seg; ++gi) {
        auto y = Y.middleRows(gi * seg, seg);
        auto gy = G.middleRows(gi * seg, seg);
        RowVec dot = (y.array() * gy.array()).colwise().sum();
        gx.middleRows(gi * seg, seg).array() += y.array() * (gy.rowwise() - dot).array();
      }
    };
  }
  return id;
}

NodeId Tape::group_matmul(NodeId a, NodeId x, Eigen::Index groups, bool shared_a) {
  const Mat& A = value(a);
  const Mat& X = value(x);
  if (groups <= 0 || X.rows() % groups != 0) throw ValidationError("group_matmul: bad group count");
  const Eigen::Index m = X.rows() / groups;
  if (A.cols() != m) throw ValidationError("group_matmul: inner dimension mismatch");
  if (!shared_a && A.rows() % groups != 0) throw ValidationError("group_matmul: bad A rows");
  const Eigen::Index n = shared_a ? A.rows() : A.rows() / groups;
  Mat out(groups * n, X.cols());
  if (shared_a && groups > 1) {
    // One GEMM: A * [X_0 X_1 ...] with the groups laid side by side.
    Mat xs(m, groups * X.cols());
    for (Eigen::Index gi = 0; gi < groups; ++gi) xs.middleCols(gi * X.cols(), X.cols()) = X.middleRows(gi * m, m);
    Mat ys;
    ys.noalias() = A * xs;
    for (Eigen::Index gi = 0; gi < groups; ++gi) out.middleRows(gi * n, n) = ys.middleCols(gi * X.cols(), X.cols());
  } else {
    for (Eigen::Index gi = 0; gi < groups; ++gi)
      out.middleRows(gi * n, n).noalias() =
          (shared_a ? A : A.middleRows(gi * n, n)) * X.middleRows(gi * m, m);
  }
  NodeId id = push(std::move(out), nodes_[a].rg || nodes_[x].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, a, x, groups, shared_a, n, m] {
      const Mat& G = nodes_[id].grad;
      const Mat& A = nodes_[a].val;
      const Mat& X = nodes_[x].val;
      const Eigen::Index f = X.cols();
      if (shared_a && groups > 1) {
        Mat gs(n, groups * f);
        Mat xs(m, groups * f);
        for (Eigen::Index gi = 0; gi < groups; ++gi) {
          gs.middleCols(gi * f, f) = G.middleRows(gi * n, n);
          xs.middleCols(gi * f, f) = X.middleRows(gi * m, m);
        }
        if (nodes_[a].rg) g(a).noalias() += gs * xs.transpose();
        if (nodes_[x].rg) {
          Mat gx;
          gx.noalias() = A.transpose() * gs;
          Mat& dx = g(x);
          for (Eigen::Index gi = 0; gi < groups; ++gi) dx.middleRows(gi * m, m) += gx.middleCols(gi * f, f);
        }
        return;
      }
      for (Eigen::Index gi = 0; gi < groups; ++gi) {
        auto Gg = G.middleRows(gi * n, n);
        auto Xg = X.middleRows(gi * m, m);
        if (nodes_[a].rg) {
          if (shared_a)
            g(a).noalias() += Gg * Xg.transpose();
          else
            g(a).middleRows(gi * n, n).noalias() += Gg * Xg.transpose();
        }
        if (nodes_[x].rg) {
          if (shared_a)
            g(x).middleRows(gi * m, m).noalias() += A.transpose() * Gg;
          else
            g(x).middleRows(gi * m, m).noalias() += A.middleRows(gi * n, n).transpose() * Gg;
        }
      }
    };
  }
  return id;
}

NodeId Tape::group_matmul_nt(NodeId q, NodeId k, Eigen::Index groups) {
  const Mat& Q = value(q);
  const Mat& K = value(k);
  if (groups <= 0 || K.rows() % groups != 0) throw ValidationError("group_matmul_nt: bad group count");
  if (Q.cols() != K.cols()) throw ValidationError("group_matmul_nt: inner dimension mismatch");
  const Eigen::Index m = K.rows() / groups;
  const Eigen::Index n = Q.rows();
  // Q K^T for all groups at once, then regroup the column blocks.
  Mat full;
  full.noalias() = Q * K.transpose();
  Mat out(groups * n, m);
  for (Eigen::Index gi = 0; gi < groups; ++gi) out.middleRows(gi * n, n) = full.middleCols(gi * m, m);
  NodeId id = push(std::move(out), nodes_[q].rg || nodes_[k].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, q, k, groups, n, m] {
      const Mat& G = nodes_[id].grad;
      Mat gf(n, groups * m);
      for (Eigen::Index gi = 0; gi < groups; ++gi) gf.middleCols(gi * m, m) = G.middleRows(gi * n, n);
      if (nodes_[q].rg) g(q).noalias() += gf * nodes_[k].val;
      if (nodes_[k].rg) g(k).noalias() += gf.transpose() * nodes_[q].val;
    };
  }
  return id;
}

NodeId Tape::synthesize(NodeId coef, NodeId basis, NodeId tau0, NodeId b0, Eigen::Index groups,
                        Eigen::Index p, Eigen::Index dout, bool shared_basis) {
  const Mat& C = value(coef);
  const Mat& T = value(basis);
  if (C.rows() != groups * p || C.cols() != dout) throw ValidationError("synthesize: coefficient shape mismatch");
  if (T.cols() != p * dout) throw ValidationError("synthesize: basis width mismatch");
  if (!shared_basis && T.rows() % groups != 0) throw ValidationError("synthesize: basis rows mismatch");
  const Eigen::Index nq = shared_basis ? T.rows() : T.rows() / groups;
  if (tau0 != kNoNode && (value(tau0).rows() != T.rows() || value(tau0).cols() != dout))
    throw ValidationError("synthesize: tau0 shape mismatch");
  if (b0 != kNoNode && (value(b0).rows() != 1 || value(b0).cols() != dout))
    throw ValidationError("synthesize: bias shape mismatch");

  auto gather_basis = [p, dout](const Mat& src, Eigen::Index c) {
    Mat tc(src.rows(), p);
    for (Eigen::Index k = 0; k < p; ++k) tc.col(k) = src.col(k * dout + c);
    return tc;
  };
  auto gather_coef = [p, dout, groups](const Mat& src, Eigen::Index c) {
    Mat cc(p, groups);
    for (Eigen::Index gi = 0; gi < groups; ++gi)
      for (Eigen::Index k = 0; k < p; ++k) cc(k, gi) = src(gi * p + k, c);
    return cc;
  };

  Mat out(groups * nq, dout);
  for (Eigen::Index c = 0; c < dout; ++c) {
    Mat tc = gather_basis(T, c);
    Mat cc = gather_coef(C, c);
    if (shared_basis) {
      Mat pc;
      pc.noalias() = tc * cc;
      for (Eigen::Index gi = 0; gi < groups; ++gi) out.col(c).segment(gi * nq, nq) = pc.col(gi);
    } else {
      for (Eigen::Index gi = 0; gi < groups; ++gi)
        out.col(c).segment(gi * nq, nq).noalias() = tc.middleRows(gi * nq, nq) * cc.col(gi);
    }
  }
  if (tau0 != kNoNode) {
    const Mat& t0 = value(tau0);
    for (Eigen::Index gi = 0; gi < groups; ++gi)
      out.middleRows(gi * nq, nq) += shared_basis ? t0 : Mat(t0.middleRows(gi * nq, nq));
  }
  if (b0 != kNoNode) out.rowwise() += value(b0).row(0);

  const bool rg = nodes_[coef].rg || nodes_[basis].rg || (tau0 != kNoNode && nodes_[tau0].rg) ||
                  (b0 != kNoNode && nodes_[b0].rg);
  NodeId id = push(std::move(out), rg);
  if (rg) {
    nodes_[id].back = [this, id, coef, basis, tau0, b0, groups, p, dout, shared_basis, nq, gather_basis,
                       gather_coef] {
      const Mat& G = nodes_[id].grad;
      const Mat& C = nodes_[coef].val;
      const Mat& T = nodes_[basis].val;
      for (Eigen::Index c = 0; c < dout; ++c) {
        Mat tc = gather_basis(T, c);
        Mat cc = gather_coef(C, c);
        Mat gp(nq, groups);
        for (Eigen::Index gi = 0; gi < groups; ++gi) gp.col(gi) = G.col(c).segment(gi * nq, nq);
        if (nodes_[basis].rg) {
          Mat& gt = g(basis);
          if (shared_basis) {
            Mat dt;
            dt.noalias() = gp * cc.transpose();
            for (Eigen::Index k = 0; k < p; ++k) gt.col(k * dout + c) += dt.col(k);
          } else {
            for (Eigen::Index gi = 0; gi < groups; ++gi)
              for (Eigen::Index k = 0; k < p; ++k)
                gt.col(k * dout + c).segment(gi * nq, nq) += gp.col(gi) * cc(k, gi);
          }
        }
        if (nodes_[coef].rg) {
          Mat dc(p, groups);
          if (shared_basis) {
            dc.noalias() = tc.transpose() * gp;
          } else {
            for (Eigen::Index gi = 0; gi < groups; ++gi)
              dc.col(gi).noalias() = tc.middleRows(gi * nq, nq).transpose() * gp.col(gi);
          }
          Mat& gc = g(coef);
          for (Eigen::Index gi = 0; gi < groups; ++gi)
            for (Eigen::Index k = 0; k < p; ++k) gc(gi * p + k, c) += dc(k, gi);
        }
      }
      if (tau0 != kNoNode && nodes_[tau0].rg) {
        Mat& gt0 = g(tau0);
        for (Eigen::Index gi = 0; gi < groups; ++gi) {
          if (shared_basis)
            gt0 += G.middleRows(gi * nq, nq);
          else
            gt0.middleRows(gi * nq, nq) += G.middleRows(gi * nq, nq);
        }
      }
      if (b0 != kNoNode && nodes_[b0].rg) g(b0) += G.colwise().sum();
    };
  }
  return id;
}

NodeId Tape::mse(NodeId pred, const Mat& target) {
  const Mat& P = value(pred);
  if (P.rows() != target.rows() || P.cols() != target.cols()) throw ValidationError("mse: shape mismatch");
  const double n = static_cast<double>(P.size());
  Mat out(1, 1);
  out(0, 0) = (P - target).squaredNorm() / n;
  NodeId id = push(std::move(out), nodes_[pred].rg);
  if (nodes_[id].rg) {
    nodes_[id].back = [this, id, pred, target, n] {
      g(pred) += (nodes_[pred].val - target) * (2.0 * nodes_[id].grad(0, 0) / n);
    };
  }
  return id;
}

}  // namespace setonet
