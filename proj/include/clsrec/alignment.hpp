#pragma once

#include <vector>

#include "clsrec/dataset.hpp"
#include "clsrec/tape.hpp"
#include "clsrec/types.hpp"

namespace clsrec {

// Trainable weights of the interest-inconsistency alignment stage: the two
// co-attention bilinear matrices and the 2 -> hidden -> 6 gate MLP.
struct AlignmentLeaves {
  ad::NodeId p_b = ad::kNoNode;  // d x d
  ad::NodeId p_s = ad::kNoNode;  // d x d
  ad::NodeId gate_w1 = ad::kNoNode;  // 2 x h
  ad::NodeId gate_b1 = ad::kNoNode;  // 1 x h
  ad::NodeId gate_w2 = ad::kNoNode;  // h x 6
  ad::NodeId gate_b2 = ad::kNoNode;  // 1 x 6
};

struct CoAttentionWeights {
  ad::NodeId w_b;  // per-user softmax over the d coordinates (rows sum to 1)
  ad::NodeId w_s;
};

// w_b[i] = softmax_d(tanh((e_hat_i P_b) .* e_i)),
// w_s[i] = softmax_d(tanh((e_i P_s) .* e_hat_i)).
CoAttentionWeights coattention_weights(ad::Tape& t, ad::NodeId behavior, ad::NodeId social,
                                       ad::NodeId p_b, ad::NodeId p_s);

struct IsolatedInterests {
  ad::NodeId aligned;   // coordinates with weight >= gamma
  ad::NodeId specific;  // the rest; aligned + specific == original exactly
  Mat mask;             // the {0,1} threshold mask used (constant in backward)
};

IsolatedInterests isolate_interests(ad::Tape& t, ad::NodeId embeddings, ad::NodeId weights,
                                    Real gamma);

// The six disentangled representations, in gate column order.
struct InterestBundle {
  ad::NodeId behavior, behavior_aligned, behavior_specific;
  ad::NodeId social, social_aligned, social_specific;
};

// [ln(1 + train degree), ln(1 + social degree)] per user, each column
// standardized to zero mean / unit variance over users.
Mat user_features(const Dataset& ds);
Mat raw_user_features(const Dataset& ds);  // before standardization

struct FusionResult {
  ad::NodeId fused;  // B x d
  ad::NodeId gate;   // B x 6 softmax rows
};

// G = softmax(MLP(user_fea)); fused row = sum_c G[:,c] * bundle_c row.
FusionResult gated_fusion(ad::Tape& t, const InterestBundle& bundle, ad::NodeId features,
                          const AlignmentLeaves& leaves);

// Dot-product scores for (row r of user_rows, items[r]) pairs; B x 1 node.
ad::NodeId predict_scores(ad::Tape& t, ad::NodeId user_rows, ad::NodeId item_table,
                          std::vector<Index> items);

}  // namespace clsrec
