#include "clsrec/alignment.hpp"

#include <cmath>

namespace clsrec {

CoAttentionWeights coattention_weights(ad::Tape& t, ad::NodeId behavior, ad::NodeId social,
                                       ad::NodeId p_b, ad::NodeId p_s) {
  const Mat& e = t.value(behavior);
  const Mat& eh = t.value(social);
  const Mat& pb = t.value(p_b);
  if (e.rows() != eh.rows() || e.cols() != eh.cols())
    throw Error(ErrorKind::Usage, "coattention: towers must have identical shape");
  if (pb.rows() != e.cols() || pb.cols() != e.cols())
    throw Error(ErrorKind::Usage, "coattention: weight matrices must be d x d");

  ad::NodeId wb =
      ad::row_softmax(t, ad::tanh(t, ad::cwise_mul(t, ad::matmul(t, social, p_b), behavior)));
  ad::NodeId ws =
      ad::row_softmax(t, ad::tanh(t, ad::cwise_mul(t, ad::matmul(t, behavior, p_s), social)));
  return {wb, ws};
}

IsolatedInterests isolate_interests(ad::Tape& t, ad::NodeId embeddings, ad::NodeId weights,
                                    Real gamma) {
  const Mat& w = t.value(weights);
  const Mat& e = t.value(embeddings);
  if (w.rows() != e.rows() || w.cols() != e.cols())
    throw Error(ErrorKind::Usage, "isolate_interests: weight/embedding shape mismatch");

  // hard threshold; the mask is recomputed each forward pass and carries no
  // gradient (stop-gradient through the comparison)
  Mat mask = (w.array() >= gamma).cast<Real>();
  ad::NodeId aligned = ad::mask_mul(t, embeddings, mask);
  ad::NodeId specific = ad::sub(t, embeddings, aligned);
  return {aligned, specific, std::move(mask)};
}

Mat raw_user_features(const Dataset& ds) {
  const auto train_deg = ds.train_degrees();
  const auto social_deg = ds.social_degrees();
  Mat fea(ds.num_users, 2);
  for (Index i = 0; i < ds.num_users; ++i) {
    fea(i, 0) = std::log1p(static_cast<Real>(train_deg[static_cast<std::size_t>(i)]));
    fea(i, 1) = std::log1p(static_cast<Real>(social_deg[static_cast<std::size_t>(i)]));
  }
  return fea;
}

Mat user_features(const Dataset& ds) {
  Mat fea = raw_user_features(ds);
  for (Index c = 0; c < fea.cols(); ++c) {
    Real mean = fea.col(c).mean();
    Real var = (fea.col(c).array() - mean).square().mean();
    if (var < 1e-24) {
      fea.col(c).setZero();  // degenerate column (all users identical)
    } else {
      fea.col(c) = (fea.col(c).array() - mean) / std::sqrt(var);
    }
  }
  return fea;
}

namespace {

// column c of a B x 6 gate as a B x 1 node, via a constant column mask
ad::NodeId gate_column(ad::Tape& t, ad::NodeId gate, Index col, Index cols) {
  const Mat& g = t.value(gate);
  Mat mask = Mat::Zero(g.rows(), cols);
  mask.col(col).setOnes();
  return ad::row_sum(t, ad::mask_mul(t, gate, std::move(mask)));
}

}  // namespace

FusionResult gated_fusion(ad::Tape& t, const InterestBundle& bundle, ad::NodeId features,
                          const AlignmentLeaves& leaves) {
  const Mat& fea = t.value(features);
  const Index batch = fea.rows();
  ad::NodeId ones = t.constant(Mat::Ones(batch, 1));

  ad::NodeId hidden = ad::tanh(
      t, ad::add(t, ad::matmul(t, features, leaves.gate_w1), ad::matmul(t, ones, leaves.gate_b1)));
  ad::NodeId logits =
      ad::add(t, ad::matmul(t, hidden, leaves.gate_w2), ad::matmul(t, ones, leaves.gate_b2));
  ad::NodeId gate = ad::row_softmax(t, logits);  // B x 6

  const ad::NodeId parts[6] = {bundle.behavior,        bundle.behavior_aligned,
                               bundle.behavior_specific, bundle.social,
                               bundle.social_aligned,   bundle.social_specific};
  ad::NodeId fused = ad::kNoNode;
  for (Index c = 0; c < 6; ++c) {
    ad::NodeId weighted = ad::row_scale(t, parts[c], gate_column(t, gate, c, 6));
    fused = (c == 0) ? weighted : ad::add(t, fused, weighted);
  }
  return {fused, gate};
}

ad::NodeId predict_scores(ad::Tape& t, ad::NodeId user_rows, ad::NodeId item_table,
                          std::vector<Index> items) {
  const Mat& u = t.value(user_rows);
  if (static_cast<std::size_t>(u.rows()) != items.size())
    throw Error(ErrorKind::Usage, "predict_scores: one item per user row required");
  ad::NodeId item_rows = ad::row_gather(t, item_table, std::move(items));
  return ad::row_sum(t, ad::cwise_mul(t, user_rows, item_rows));
}

}  // namespace clsrec
