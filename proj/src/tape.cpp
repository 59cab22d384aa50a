#include "clsrec/tape.hpp"

#include <cmath>
#include <sstream>

namespace clsrec::ad {

namespace {

std::string shape_str(const Mat& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

[[noreturn]] void shape_error(const char* what, const Mat& a, const Mat& b) {
  throw Error(ErrorKind::Usage,
              std::string(what) + ": got " + shape_str(a) + " and " + shape_str(b));
}

// exponent-bits scan; Eigen's allFinite is an order of magnitude slower
bool all_finite_fast(const Mat& m) {
  constexpr std::uint64_t kExpMask = 0x7ff0000000000000ULL;
  const double* p = m.data();
  const std::size_t n = static_cast<std::size_t>(m.size());
  std::uint64_t bad = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &p[i], 8);
    bad |= static_cast<std::uint64_t>((bits & kExpMask) == kExpMask);
  }
  return bad == 0;
}

void check_finite(const Mat& m, Op op) {
  if (!all_finite_fast(m))
    throw Error(ErrorKind::Numeric, std::string("non-finite value produced by ") + op_name(op));
}

Real stable_sigmoid(Real x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  Real e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kConstant: return "constant";
    case Op::kMatMul: return "matmul";
    case Op::kSpMatMul: return "spmatmul";
    case Op::kTranspose: return "transpose";
    case Op::kAdd: return "add";
    case Op::kSub: return "subtract";
    case Op::kCwiseMul: return "elementwise-multiply";
    case Op::kScalarMul: return "scalar-multiply";
    case Op::kTanh: return "tanh";
    case Op::kExp: return "exponential";
    case Op::kLog: return "logarithm";
    case Op::kLogSigmoid: return "log-sigmoid";
    case Op::kRowSoftmax: return "row-softmax";
    case Op::kRowSum: return "row-sum";
    case Op::kMeanAll: return "mean-all";
    case Op::kL2NormSq: return "l2-norm-squared";
    case Op::kRowGather: return "row-gather";
    case Op::kMaskMul: return "constant-mask-multiply";
    case Op::kRowCosine: return "row-cosine-similarity";
    case Op::kRowScale: return "row-scale";
  }
  return "?";
}

const Node& Tape::node(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw Error(ErrorKind::Usage, "invalid node id " + std::to_string(id));
  return nodes_[id];
}

NodeId Tape::push(Node n) {
  check_finite(n.value, n.op);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::leaf(Mat value) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

NodeId Tape::constant(Mat value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  n.requires_grad = false;
  return push(std::move(n));
}

namespace {

Node binary(const Tape& t, Op op, NodeId a, NodeId b) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.requires_grad = t.requires_grad(a) || (b != kNoNode && t.requires_grad(b));
  return n;
}

Node unary(const Tape& t, Op op, NodeId a) { return binary(t, op, a, kNoNode); }

}  // namespace

NodeId matmul(Tape& t, NodeId a, NodeId b) {
  const Mat& A = t.value(a);
  const Mat& B = t.value(b);
  if (A.cols() != B.rows()) shape_error("matmul shape mismatch", A, B);
  Node n = binary(t, Op::kMatMul, a, b);
  n.value = A * B;
  return t.push(std::move(n));
}

namespace {

// CSR row-major product. Accumulates each output row in a hot scratch buffer
// so the (large) output matrix is written exactly once.
Mat csr_times_dense(const SpMat& a, const Mat& x) {
  Mat out(a.rows(), x.cols());
  Eigen::Matrix<Real, 1, Eigen::Dynamic> acc(x.cols());
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const Real* vals = a.valuePtr();
  for (Index i = 0; i < a.rows(); ++i) {
    acc.setZero();
    for (int p = outer[i]; p < outer[i + 1]; ++p) acc += vals[p] * x.row(inner[p]);
    out.row(i) = acc;
  }
  return out;
}

}  // namespace

namespace {

NodeId spmatmul_node(Tape& t, const SpMat& a, const SpMat* a_transpose, NodeId x) {
  const Mat& X = t.value(x);
  if (a.cols() != X.rows())
    throw Error(ErrorKind::Usage, "spmatmul shape mismatch: " + std::to_string(a.rows()) + "x" +
                                      std::to_string(a.cols()) + " * " + shape_str(X));
  if (!a.isCompressed())
    throw Error(ErrorKind::Usage, "spmatmul requires a compressed sparse matrix");
  Node n = unary(t, Op::kSpMatMul, x);
  n.sparse = &a;
  n.sparse_t = a_transpose;
  n.value = csr_times_dense(a, X);
  return t.push(std::move(n));
}

}  // namespace

NodeId spmatmul(Tape& t, const SpMat& a, NodeId x) { return spmatmul_node(t, a, nullptr, x); }

NodeId spmatmul(Tape& t, const SpMat& a, const SpMat& a_transpose, NodeId x) {
  if (a_transpose.rows() != a.cols() || a_transpose.cols() != a.rows() ||
      a_transpose.nonZeros() != a.nonZeros() || !a_transpose.isCompressed())
    throw Error(ErrorKind::Usage, "spmatmul: transpose operand does not match");
  return spmatmul_node(t, a, &a_transpose, x);
}

NodeId transpose(Tape& t, NodeId a) {
  Node n = unary(t, Op::kTranspose, a);
  n.value = t.value(a).transpose();
  return t.push(std::move(n));
}

NodeId add(Tape& t, NodeId a, NodeId b) {
  const Mat& A = t.value(a);
  const Mat& B = t.value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols()) shape_error("add shape mismatch", A, B);
  Node n = binary(t, Op::kAdd, a, b);
  n.value = A + B;
  return t.push(std::move(n));
}

NodeId sub(Tape& t, NodeId a, NodeId b) {
  const Mat& A = t.value(a);
  const Mat& B = t.value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols()) shape_error("subtract shape mismatch", A, B);
  Node n = binary(t, Op::kSub, a, b);
  n.value = A - B;
  return t.push(std::move(n));
}

NodeId cwise_mul(Tape& t, NodeId a, NodeId b) {
  const Mat& A = t.value(a);
  const Mat& B = t.value(b);
  if (A.rows() != B.rows() || A.cols() != B.cols())
    shape_error("elementwise-multiply shape mismatch", A, B);
  Node n = binary(t, Op::kCwiseMul, a, b);
  n.value = A.cwiseProduct(B);
  return t.push(std::move(n));
}

NodeId scalar_mul(Tape& t, NodeId a, Real s) {
  Node n = unary(t, Op::kScalarMul, a);
  n.scalar = s;
  n.value = t.value(a) * s;
  return t.push(std::move(n));
}

NodeId tanh(Tape& t, NodeId a) {
  Node n = unary(t, Op::kTanh, a);
  n.value = t.value(a).array().tanh();
  return t.push(std::move(n));
}

NodeId exp(Tape& t, NodeId a) {
  Node n = unary(t, Op::kExp, a);
  n.value = t.value(a).array().exp();
  return t.push(std::move(n));
}

NodeId log(Tape& t, NodeId a) {
  Node n = unary(t, Op::kLog, a);
  n.value = t.value(a).array().log();
  return t.push(std::move(n));
}

NodeId log_sigmoid(Tape& t, NodeId a) {
  const Mat& A = t.value(a);
  Node n = unary(t, Op::kLogSigmoid, a);
  n.value = A.unaryExpr([](Real x) {
    // ln sigma(x) = -softplus(-x), computed without overflow
    return x < 0.0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x));
  });
  return t.push(std::move(n));
}

NodeId row_softmax(Tape& t, NodeId a) {
  const Mat& A = t.value(a);
  Node n = unary(t, Op::kRowSoftmax, a);
  // max-subtracted for overflow safety; full-matrix expressions keep the
  // exp on Eigen's packet path
  Vec row_max = A.rowwise().maxCoeff();
  Mat out = (A.colwise() - row_max).array().exp();
  Vec denom = out.rowwise().sum();
  out.array().colwise() /= denom.array();
  n.value = std::move(out);
  return t.push(std::move(n));
}

NodeId row_sum(Tape& t, NodeId a) {
  Node n = unary(t, Op::kRowSum, a);
  n.value = t.value(a).rowwise().sum();
  return t.push(std::move(n));
}

NodeId mean_all(Tape& t, NodeId a) {
  Node n = unary(t, Op::kMeanAll, a);
  Mat v(1, 1);
  v(0, 0) = t.value(a).mean();
  n.value = std::move(v);
  return t.push(std::move(n));
}

NodeId l2_norm_sq(Tape& t, NodeId a) {
  Node n = unary(t, Op::kL2NormSq, a);
  Mat v(1, 1);
  v(0, 0) = t.value(a).squaredNorm();
  n.value = std::move(v);
  return t.push(std::move(n));
}

NodeId row_gather(Tape& t, NodeId a, std::vector<Index> rows) {
  const Mat& A = t.value(a);
  for (Index r : rows)
    if (r < 0 || r >= A.rows())
      throw Error(ErrorKind::Usage, "row-gather index " + std::to_string(r) + " out of range [0, " +
                                        std::to_string(A.rows()) + ")");
  Node n = unary(t, Op::kRowGather, a);
  Mat out(static_cast<Index>(rows.size()), A.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = A.row(rows[r]);
  n.rows = std::move(rows);
  n.value = std::move(out);
  return t.push(std::move(n));
}

NodeId mask_mul(Tape& t, NodeId a, Mat mask) {
  const Mat& A = t.value(a);
  if (A.rows() != mask.rows() || A.cols() != mask.cols())
    shape_error("constant-mask-multiply shape mismatch", A, mask);
  if (((mask.array() != 0.0) && (mask.array() != 1.0)).any())
    throw Error(ErrorKind::Usage, "constant-mask-multiply mask must be {0,1}-valued");
  Node n = unary(t, Op::kMaskMul, a);
  n.value = A.cwiseProduct(mask);
  n.aux.push_back(std::move(mask));
  return t.push(std::move(n));
}

NodeId row_cosine(Tape& t, NodeId x, NodeId y) {
  const Mat& X = t.value(x);
  const Mat& Y = t.value(y);
  if (X.cols() != Y.cols()) shape_error("row-cosine-similarity dimension mismatch", X, Y);
  Node n = binary(t, Op::kRowCosine, x, y);
  // normalized copies; zero-norm rows stay zero so their cosines are 0
  Mat Xn = X, Yn = Y;
  Mat inv_nx(X.rows(), 1), inv_ny(Y.rows(), 1);
  for (Index i = 0; i < X.rows(); ++i) {
    Real nrm = X.row(i).norm();
    inv_nx(i, 0) = nrm > 0.0 ? 1.0 / nrm : 0.0;
    Xn.row(i) *= inv_nx(i, 0);
  }
  for (Index j = 0; j < Y.rows(); ++j) {
    Real nrm = Y.row(j).norm();
    inv_ny(j, 0) = nrm > 0.0 ? 1.0 / nrm : 0.0;
    Yn.row(j) *= inv_ny(j, 0);
  }
  n.value = Xn * Yn.transpose();
  n.aux = {std::move(Xn), std::move(Yn), std::move(inv_nx), std::move(inv_ny)};
  return t.push(std::move(n));
}

NodeId row_scale(Tape& t, NodeId x, NodeId s) {
  const Mat& X = t.value(x);
  const Mat& S = t.value(s);
  if (S.cols() != 1 || S.rows() != X.rows()) shape_error("row-scale shape mismatch", X, S);
  Node n = binary(t, Op::kRowScale, x, s);
  n.value = X.array().colwise() * S.col(0).array();
  return t.push(std::move(n));
}

namespace {

void accumulate(Gradients& g, NodeId id, const Mat& delta) {
  Mat& slot = g.slot(id);
  if (slot.size() == 0)
    slot = delta;
  else
    slot += delta;
}

void accumulate(Gradients& g, NodeId id, Mat&& delta) {
  Mat& slot = g.slot(id);
  if (slot.size() == 0)
    slot = std::move(delta);
  else
    slot += delta;
}

}  // namespace

Gradients Tape::backward(NodeId loss) const {
  const Mat& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1)
    throw Error(ErrorKind::Usage,
                "backward requires a scalar (1x1) loss node, got " + shape_str(lv));
  Gradients grads(nodes_.size());
  grads.slot(loss) = Mat::Ones(1, 1);

  for (NodeId i = loss; i >= 0; --i) {
    const Node& n = nodes_[i];
    if (!n.requires_grad || !grads.has(i)) continue;
    const Mat& g = grads.at(i);  // slots are preallocated; parents never alias node i
    auto needs = [&](NodeId p) { return p != kNoNode && nodes_[p].requires_grad; };

    switch (n.op) {
      case Op::kLeaf:
      case Op::kConstant:
        break;
      case Op::kMatMul: {
        if (needs(n.a)) accumulate(grads, n.a, g * value(n.b).transpose());
        if (needs(n.b)) accumulate(grads, n.b, value(n.a).transpose() * g);
        break;
      }
      case Op::kSpMatMul: {
        if (needs(n.a)) {
          Mat d = n.sparse_t ? csr_times_dense(*n.sparse_t, g)
                             : Mat(n.sparse->transpose() * g);
          accumulate(grads, n.a, std::move(d));
        }
        break;
      }
      case Op::kTranspose: {
        if (needs(n.a)) accumulate(grads, n.a, g.transpose());
        break;
      }
      case Op::kAdd: {
        if (needs(n.a)) accumulate(grads, n.a, g);
        if (needs(n.b)) accumulate(grads, n.b, g);
        break;
      }
      case Op::kSub: {
        if (needs(n.a)) accumulate(grads, n.a, g);
        if (needs(n.b)) accumulate(grads, n.b, Mat(-g));
        break;
      }
      case Op::kCwiseMul: {
        if (needs(n.a)) accumulate(grads, n.a, g.cwiseProduct(value(n.b)));
        if (needs(n.b)) accumulate(grads, n.b, g.cwiseProduct(value(n.a)));
        break;
      }
      case Op::kScalarMul: {
        if (needs(n.a)) accumulate(grads, n.a, Mat(g * n.scalar));
        break;
      }
      case Op::kTanh: {
        if (needs(n.a))
          accumulate(grads, n.a, Mat(g.array() * (1.0 - n.value.array().square())));
        break;
      }
      case Op::kExp: {
        if (needs(n.a)) accumulate(grads, n.a, g.cwiseProduct(n.value));
        break;
      }
      case Op::kLog: {
        if (needs(n.a)) accumulate(grads, n.a, Mat(g.array() / value(n.a).array()));
        break;
      }
      case Op::kLogSigmoid: {
        if (needs(n.a)) {
          // d/dx ln sigma(x) = sigma(-x)
          Mat d = value(n.a).unaryExpr([](Real x) { return stable_sigmoid(-x); });
          accumulate(grads, n.a, g.cwiseProduct(d));
        }
        break;
      }
      case Op::kRowSoftmax: {
        if (needs(n.a)) {
          const Mat& y = n.value;
          Mat d(y.rows(), y.cols());
          for (Index r = 0; r < y.rows(); ++r) {
            Real dot = g.row(r).dot(y.row(r));
            d.row(r) = y.row(r).array() * (g.row(r).array() - dot);
          }
          accumulate(grads, n.a, std::move(d));
        }
        break;
      }
      case Op::kRowSum: {
        if (needs(n.a)) {
          const Mat& A = value(n.a);
          accumulate(grads, n.a, Mat(g.col(0).replicate(1, A.cols())));
        }
        break;
      }
      case Op::kMeanAll: {
        if (needs(n.a)) {
          const Mat& A = value(n.a);
          Real w = g(0, 0) / static_cast<Real>(A.size());
          accumulate(grads, n.a, Mat(Mat::Constant(A.rows(), A.cols(), w)));
        }
        break;
      }
      case Op::kL2NormSq: {
        if (needs(n.a)) accumulate(grads, n.a, Mat(2.0 * g(0, 0) * value(n.a)));
        break;
      }
      case Op::kRowGather: {
        if (needs(n.a)) {
          const Mat& A = value(n.a);
          Mat d = Mat::Zero(A.rows(), A.cols());
          for (std::size_t r = 0; r < n.rows.size(); ++r)
            d.row(n.rows[r]) += g.row(static_cast<Index>(r));
          accumulate(grads, n.a, std::move(d));
        }
        break;
      }
      case Op::kMaskMul: {
        if (needs(n.a)) accumulate(grads, n.a, g.cwiseProduct(n.aux[0]));
        break;
      }
      case Op::kRowCosine: {
        const Mat& Xn = n.aux[0];
        const Mat& Yn = n.aux[1];
        const Mat& inv_nx = n.aux[2];
        const Mat& inv_ny = n.aux[3];
        if (needs(n.a)) {
          Mat gx = g * Yn;  // P x d
          Mat d(gx.rows(), gx.cols());
          for (Index r = 0; r < gx.rows(); ++r) {
            Real dot = gx.row(r).dot(Xn.row(r));
            d.row(r) = (gx.row(r) - dot * Xn.row(r)) * inv_nx(r, 0);
          }
          accumulate(grads, n.a, std::move(d));
        }
        if (needs(n.b)) {
          Mat gy = g.transpose() * Xn;  // Q x d
          Mat d(gy.rows(), gy.cols());
          for (Index r = 0; r < gy.rows(); ++r) {
            Real dot = gy.row(r).dot(Yn.row(r));
            d.row(r) = (gy.row(r) - dot * Yn.row(r)) * inv_ny(r, 0);
          }
          accumulate(grads, n.b, std::move(d));
        }
        break;
      }
      case Op::kRowScale: {
        const Mat& X = value(n.a);
        const Mat& S = value(n.b);
        if (needs(n.a)) accumulate(grads, n.a, Mat(g.array().colwise() * S.col(0).array()));
        if (needs(n.b)) {
          Mat d(S.rows(), 1);
          for (Index r = 0; r < S.rows(); ++r) d(r, 0) = g.row(r).dot(X.row(r));
          accumulate(grads, n.b, std::move(d));
        }
        break;
      }
    }
  }
  return grads;
}

Real grad_check(const TapeBuilder& build, const std::vector<Mat>& params, Real epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-2))
    throw Error(ErrorKind::Usage, "grad_check epsilon must lie in (0, 1e-2]");

  auto eval = [&](const std::vector<Mat>& p) -> Real {
    Tape t;
    std::vector<NodeId> leaves;
    leaves.reserve(p.size());
    for (const Mat& m : p) leaves.push_back(t.leaf(m));
    NodeId loss = build(t, leaves);
    const Mat& v = t.value(loss);
    if (v.rows() != 1 || v.cols() != 1)
      throw Error(ErrorKind::Usage, "grad_check function must produce a scalar loss");
    return v(0, 0);
  };

  // analytic gradients
  Tape t;
  std::vector<NodeId> leaves;
  for (const Mat& m : params) leaves.push_back(t.leaf(m));
  NodeId loss = build(t, leaves);
  Gradients grads = t.backward(loss);

  Real max_rel = 0.0;
  std::vector<Mat> work = params;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Mat analytic = grads.value_or_zero(leaves[k], params[k].rows(), params[k].cols());
    for (Index i = 0; i < params[k].rows(); ++i) {
      for (Index j = 0; j < params[k].cols(); ++j) {
        const Real saved = work[k](i, j);
        Real fp, fm;
        try {
          work[k](i, j) = saved + epsilon;
          fp = eval(work);
          work[k](i, j) = saved - epsilon;
          fm = eval(work);
        } catch (const Error& e) {
          throw Error(ErrorKind::Numeric,
                      std::string(e.what()) + " while perturbing parameter " + std::to_string(k) +
                          " at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
        work[k](i, j) = saved;
        Real numeric = (fp - fm) / (2.0 * epsilon);
        Real a = analytic(i, j);
        Real rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
        if (rel > max_rel) max_rel = rel;
      }
    }
  }
  return max_rel;
}

}  // namespace clsrec::ad
