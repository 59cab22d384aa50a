#include "clsrec/svd.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>

namespace clsrec {

namespace {

Mat thin_q(const Mat& y) {
  Eigen::HouseholderQR<Mat> qr(y);
  Mat q = qr.householderQ() * Mat::Identity(y.rows(), std::min(y.rows(), y.cols()));
  return q;
}

}  // namespace

SvdFactors truncated_svd(const SpMat& a, int k, int oversampling, int power_iters,
                         std::uint64_t seed) {
  const Index m = a.rows(), n = a.cols();
  const Index min_dim = std::min(m, n);
  if (k < 1 || k > min_dim)
    throw Error(ErrorKind::Usage, "truncated_svd: rank " + std::to_string(k) +
                                      " out of range [1, " + std::to_string(min_dim) + "]");
  if (oversampling < 0 || power_iters < 0)
    throw Error(ErrorKind::Usage, "truncated_svd: oversampling and power iterations must be >= 0");

  const Index l = std::min<Index>(k + oversampling, min_dim);

  Rng rng(seed);
  Mat omega = rng.gaussian_matrix(n, l);
  Mat q = thin_q(a * omega);
  for (int it = 0; it < power_iters; ++it) {
    Mat z = thin_q(a.transpose() * q);
    q = thin_q(a * z);
  }

  Mat b = q.transpose() * a;  // l x n
  Eigen::JacobiSVD<Mat> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdFactors f;
  f.u = q * svd.matrixU().leftCols(k);
  f.s = svd.singularValues().head(k);
  f.v = svd.matrixV().leftCols(k);
  return f;
}

ad::NodeId propagate_reconstructed(ad::Tape& t, const SvdFactors& f, ad::NodeId user_emb0,
                                   int layers) {
  const Mat& e0 = t.value(user_emb0);
  if (e0.rows() != f.u.rows())
    throw Error(ErrorKind::Usage, "propagate_reconstructed: embedding rows do not match factors");

  ad::NodeId cu = t.constant(f.u);
  ad::NodeId cut = t.constant(f.u.transpose());
  ad::NodeId cs = t.constant(Mat(f.s));  // k x 1

  ad::NodeId e = user_emb0;
  ad::NodeId sum = user_emb0;
  for (int l = 1; l <= layers; ++l) {
    ad::NodeId proj = ad::matmul(t, cut, e);           // k x d
    ad::NodeId scaled = ad::row_scale(t, proj, cs);    // diag(S) * proj
    e = ad::matmul(t, cu, scaled);                     // M x d
    sum = ad::add(t, sum, e);
  }
  return ad::scalar_mul(t, sum, 1.0 / static_cast<Real>(layers + 1));
}

}  // namespace clsrec
