#include "clsrec/losses.hpp"

#include <iostream>

namespace clsrec {

ad::NodeId info_nce(ad::Tape& t, ad::NodeId view_a, ad::NodeId view_b, Real tau) {
  if (tau <= 0.0) throw Error(ErrorKind::Usage, "info_nce: tau must be > 0");
  const Mat& a = t.value(view_a);
  const Mat& b = t.value(view_b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::Usage, "info_nce: views must have identical shape");
  if (a.rows() < 1) throw Error(ErrorKind::Usage, "info_nce: empty batch");

  Index zero_rows = 0;
  for (Index i = 0; i < a.rows(); ++i)
    if (a.row(i).norm() == 0.0 || b.row(i).norm() == 0.0) ++zero_rows;
  if (zero_rows > 0)
    std::cerr << "warning: info_nce saw " << zero_rows
              << " zero-norm embedding row(s); their cosines are 0\n";

  const Index batch = a.rows();
  ad::NodeId sim = ad::row_cosine(t, view_a, view_b);        // B x B
  ad::NodeId logits = ad::scalar_mul(t, sim, 1.0 / tau);
  ad::NodeId probs = ad::row_softmax(t, logits);
  ad::NodeId diagonal = ad::row_sum(t, ad::mask_mul(t, probs, Mat(Mat::Identity(batch, batch))));
  ad::NodeId log_diag = ad::log(t, diagonal);                // B x 1
  return ad::scalar_mul(t, ad::mean_all(t, log_diag), -static_cast<Real>(batch));
}

ad::NodeId bpr_loss(ad::Tape& t, ad::NodeId pos_scores, ad::NodeId neg_scores,
                    ad::NodeId user_emb0, ad::NodeId item_emb0, Real lambda) {
  const Mat& p = t.value(pos_scores);
  const Mat& n = t.value(neg_scores);
  if (p.rows() != n.rows() || p.cols() != 1 || n.cols() != 1)
    throw Error(ErrorKind::Usage, "bpr_loss: score vectors must be equal-length columns");

  ad::NodeId margin = ad::sub(t, pos_scores, neg_scores);
  ad::NodeId log_sig = ad::log_sigmoid(t, margin);
  ad::NodeId sum = ad::scalar_mul(t, ad::mean_all(t, log_sig), static_cast<Real>(p.rows()));
  ad::NodeId loss = ad::scalar_mul(t, sum, -1.0);
  if (lambda != 0.0) {
    ad::NodeId reg =
        ad::add(t, ad::l2_norm_sq(t, user_emb0), ad::l2_norm_sq(t, item_emb0));
    loss = ad::add(t, loss, ad::scalar_mul(t, reg, lambda));
  }
  return loss;
}

ad::NodeId total_loss(ad::Tape& t, ad::NodeId bpr, ad::NodeId cl, Real alpha) {
  return ad::add(t, bpr, ad::scalar_mul(t, cl, alpha));
}

}  // namespace clsrec
