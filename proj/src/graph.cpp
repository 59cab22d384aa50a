#include "clsrec/graph.hpp"

#include <cmath>
#include <vector>

namespace clsrec {

namespace {

void check_binary(const SpMat& m, const char* what) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      if (it.value() != 1.0)
        throw Error(ErrorKind::Data, std::string(what) + " must be binary; found entry " +
                                         std::to_string(it.value()));
}

}  // namespace

BipartiteNorm normalize_bipartite(const SpMat& a) {
  if (a.rows() == 0 || a.cols() == 0)
    throw Error(ErrorKind::Data, "normalize_bipartite: empty matrix");
  check_binary(a, "interaction matrix");

  Vec deg_u = Vec::Zero(a.rows());
  Vec deg_v = Vec::Zero(a.cols());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      deg_u(it.row()) += 1.0;
      deg_v(it.col()) += 1.0;
    }

  std::vector<Eigen::Triplet<Real>> fwd, bwd;
  fwd.reserve(static_cast<std::size_t>(a.nonZeros()));
  bwd.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      Real w = 1.0 / std::sqrt(deg_u(it.row()) * deg_v(it.col()));
      fwd.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), w);
      bwd.emplace_back(static_cast<int>(it.col()), static_cast<int>(it.row()), w);
    }

  BipartiteNorm out;
  out.user_to_item.resize(a.rows(), a.cols());
  out.user_to_item.setFromTriplets(fwd.begin(), fwd.end());
  out.item_to_user.resize(a.cols(), a.rows());
  out.item_to_user.setFromTriplets(bwd.begin(), bwd.end());
  return out;
}

SpMat normalize_social(const SpMat& s) {
  if (s.rows() != s.cols()) throw Error(ErrorKind::Data, "normalize_social: matrix must be square");
  check_binary(s, "social matrix");

  Vec deg = Vec::Zero(s.rows());
  for (int k = 0; k < s.outerSize(); ++k)
    for (SpMat::InnerIterator it(s, k); it; ++it) {
      if (it.row() == it.col())
        throw Error(ErrorKind::Data, "normalize_social: self-loop at user " +
                                         std::to_string(it.row()));
      deg(it.row()) += 1.0;
    }

  std::vector<Eigen::Triplet<Real>> tri;
  tri.reserve(static_cast<std::size_t>(s.nonZeros()));
  for (int k = 0; k < s.outerSize(); ++k)
    for (SpMat::InnerIterator it(s, k); it; ++it) {
      if (it.row() >= it.col()) continue;  // visit each undirected edge once
      if (s.coeff(it.col(), it.row()) != 1.0)
        throw Error(ErrorKind::Data, "normalize_social: asymmetric edge (" +
                                         std::to_string(it.row()) + ", " +
                                         std::to_string(it.col()) + ")");
      Real w = 1.0 / std::sqrt(deg(it.row()) * deg(it.col()));
      tri.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), w);
      tri.emplace_back(static_cast<int>(it.col()), static_cast<int>(it.row()), w);
    }
  // a lone lower-triangle entry has no mirror above; catch it
  Index nnz_upper = 0;
  for (int k = 0; k < s.outerSize(); ++k)
    for (SpMat::InnerIterator it(s, k); it; ++it)
      if (it.row() < it.col()) ++nnz_upper;
  if (2 * nnz_upper != s.nonZeros())
    throw Error(ErrorKind::Data, "normalize_social: asymmetric input");

  SpMat out(s.rows(), s.cols());
  out.setFromTriplets(tri.begin(), tri.end());
  return out;
}

InteractionTowers propagate_interaction(ad::Tape& t, const BipartiteNorm& g, ad::NodeId user_emb0,
                                        ad::NodeId item_emb0, int layers) {
  const Mat& eu = t.value(user_emb0);
  const Mat& ev = t.value(item_emb0);
  if (eu.rows() != g.user_to_item.rows() || ev.rows() != g.user_to_item.cols() ||
      eu.cols() != ev.cols())
    throw Error(ErrorKind::Usage, "propagate_interaction: embedding shapes do not match graph");

  ad::NodeId u = user_emb0, v = item_emb0;
  ad::NodeId sum_u = user_emb0, sum_v = item_emb0;
  for (int l = 1; l <= layers; ++l) {
    ad::NodeId nu = ad::spmatmul(t, g.user_to_item, g.item_to_user, v);
    ad::NodeId nv = ad::spmatmul(t, g.item_to_user, g.user_to_item, u);
    u = nu;
    v = nv;
    sum_u = ad::add(t, sum_u, u);
    sum_v = ad::add(t, sum_v, v);
  }
  Real w = 1.0 / static_cast<Real>(layers + 1);
  return {ad::scalar_mul(t, sum_u, w), ad::scalar_mul(t, sum_v, w)};
}

ad::NodeId propagate_social(ad::Tape& t, const SpMat& s_norm, ad::NodeId user_emb0, int layers) {
  const Mat& eu = t.value(user_emb0);
  if (eu.rows() != s_norm.rows())
    throw Error(ErrorKind::Usage, "propagate_social: embedding rows do not match graph");

  ad::NodeId u = user_emb0;
  ad::NodeId sum = user_emb0;
  for (int l = 1; l <= layers; ++l) {
    u = ad::spmatmul(t, s_norm, s_norm, u);  // symmetric: its own transpose
    sum = ad::add(t, sum, u);
  }
  return ad::scalar_mul(t, sum, 1.0 / static_cast<Real>(layers + 1));
}

}  // namespace clsrec
