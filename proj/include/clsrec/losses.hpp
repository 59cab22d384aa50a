#pragma once

#include "clsrec/tape.hpp"
#include "clsrec/types.hpp"

namespace clsrec {

// InfoNCE over two aligned views (row i of each side is the same user).
// L = sum_i -log( exp(cos(a_i, b_i)/tau) / sum_j exp(cos(a_i, b_j)/tau) ),
// denominator over the rows provided. Zero-norm rows give cosine 0 and are
// reported on stderr rather than producing NaN.
ad::NodeId info_nce(ad::Tape& t, ad::NodeId view_a, ad::NodeId view_b, Real tau);

// -sum ln sigma(pos - neg) + lambda * (||E_u0||^2 + ||E_v0||^2). Pass the
// full layer-0 tables, or batch-row gathers when reg_batch_rows is set.
ad::NodeId bpr_loss(ad::Tape& t, ad::NodeId pos_scores, ad::NodeId neg_scores,
                    ad::NodeId user_emb0, ad::NodeId item_emb0, Real lambda);

// L = L_bpr + alpha * L_cl
ad::NodeId total_loss(ad::Tape& t, ad::NodeId bpr, ad::NodeId cl, Real alpha);

}  // namespace clsrec
