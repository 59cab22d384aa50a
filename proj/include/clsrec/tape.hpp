#pragma once

#include <functional>
#include <vector>

#include "clsrec/types.hpp"

namespace clsrec::ad {

// Reverse-mode autodiff over dense row-major matrices. One tape per training
// step; nodes are immutable once created. Sparse operands referenced by
// spmatmul must outlive the tape.

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

enum class Op : std::uint8_t {
  kLeaf,
  kConstant,
  kMatMul,
  kSpMatMul,
  kTranspose,
  kAdd,
  kSub,
  kCwiseMul,
  kScalarMul,
  kTanh,
  kExp,
  kLog,
  kLogSigmoid,
  kRowSoftmax,
  kRowSum,
  kMeanAll,
  kL2NormSq,
  kRowGather,
  kMaskMul,
  kRowCosine,
  kRowScale,
};

const char* op_name(Op op);

struct Node {
  Op op;
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  Mat value;
  Real scalar = 0.0;                  // kScalarMul factor
  const SpMat* sparse = nullptr;      // kSpMatMul left operand
  const SpMat* sparse_t = nullptr;    // its transpose, when the caller has one
  std::vector<Index> rows;            // kRowGather indices
  std::vector<Mat> aux;               // cached auxiliaries for backward
  bool requires_grad = false;
};

// Gradients indexed by node id; entries exist for nodes reached by backward.
class Gradients {
 public:
  explicit Gradients(std::size_t n) : grads_(n), has_(n, false) {}

  bool has(NodeId id) const { return id >= 0 && static_cast<std::size_t>(id) < has_.size() && has_[id]; }

  const Mat& at(NodeId id) const {
    if (!has(id)) throw Error(ErrorKind::Usage, "no gradient recorded for node " + std::to_string(id));
    return grads_[id];
  }

  // zero matrix of the node's shape when the node received no adjoint
  Mat value_or_zero(NodeId id, Index rows, Index cols) const {
    if (has(id)) return grads_[id];
    return Mat::Zero(rows, cols);
  }

  Mat& slot(NodeId id) {
    has_[id] = true;
    return grads_[id];
  }

 private:
  std::vector<Mat> grads_;
  std::vector<bool> has_;
};

class Tape {
 public:
  NodeId leaf(Mat value);
  NodeId constant(Mat value);

  const Mat& value(NodeId id) const { return node(id).value; }
  const Node& node(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  bool requires_grad(NodeId id) const { return node(id).requires_grad; }

  // Seeds d(loss)=1 and applies chain rule in reverse insertion order.
  // loss must be 1x1. Fan-out contributions accumulate additively.
  Gradients backward(NodeId loss) const;

  NodeId push(Node n);

 private:
  std::vector<Node> nodes_;
};

// --- primitive ops (forward value computed eagerly, adjoint registered) ---

NodeId matmul(Tape& t, NodeId a, NodeId b);
NodeId spmatmul(Tape& t, const SpMat& a, NodeId x);  // a is a non-differentiable constant
// variant with a precomputed transpose so the adjoint takes the CSR fast path
NodeId spmatmul(Tape& t, const SpMat& a, const SpMat& a_transpose, NodeId x);
NodeId transpose(Tape& t, NodeId a);
NodeId add(Tape& t, NodeId a, NodeId b);
NodeId sub(Tape& t, NodeId a, NodeId b);
NodeId cwise_mul(Tape& t, NodeId a, NodeId b);
NodeId scalar_mul(Tape& t, NodeId a, Real s);
NodeId tanh(Tape& t, NodeId a);
NodeId exp(Tape& t, NodeId a);
NodeId log(Tape& t, NodeId a);
NodeId log_sigmoid(Tape& t, NodeId a);
NodeId row_softmax(Tape& t, NodeId a);               // max-subtracted, rows sum to 1
NodeId row_sum(Tape& t, NodeId a);                   // M x N -> M x 1
NodeId mean_all(Tape& t, NodeId a);                  // -> 1 x 1
NodeId l2_norm_sq(Tape& t, NodeId a);                // -> 1 x 1
NodeId row_gather(Tape& t, NodeId a, std::vector<Index> rows);
NodeId mask_mul(Tape& t, NodeId a, Mat mask);        // mask in {0,1}, constant in backward
NodeId row_cosine(Tape& t, NodeId x, NodeId y);      // C[i,j] = cos(x_i, y_j); zero-norm rows give 0
NodeId row_scale(Tape& t, NodeId x, NodeId s);       // row i of x scaled by s(i, 0)

// Finite-difference verifier. `build` receives leaves for `params` in order
// and returns the scalar loss node. Central differences with step `epsilon`;
// returns max over parameter entries of |analytic - numeric| / max(1, |analytic|).
using TapeBuilder = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;
Real grad_check(const TapeBuilder& build, const std::vector<Mat>& params, Real epsilon);

}  // namespace clsrec::ad
