#pragma once

#include "clsrec/tape.hpp"
#include "clsrec/types.hpp"

namespace clsrec {

// Symmetrically normalized interaction graph: user_to_item[i,j] =
// A[i,j] / sqrt(deg_u(i) * deg_v(j)); item_to_user is the exact transpose.
// Rows or columns with zero degree normalize to zero.
struct BipartiteNorm {
  SpMat user_to_item;  // M x N
  SpMat item_to_user;  // N x M
};

BipartiteNorm normalize_bipartite(const SpMat& a);

// S must be symmetric, binary, with an empty diagonal. Output is
// S[i,j] / sqrt(deg(i) * deg(j)), symmetric to bit exactness.
SpMat normalize_social(const SpMat& s);

struct PropagationConfig {
  int layers = 3;
  int dim = 64;
};

struct InteractionTowers {
  ad::NodeId users;  // M x d layer mean
  ad::NodeId items;  // N x d layer mean
};

// Alternating propagation across the bipartite graph followed by the layer
// mean over l = 0..L. Differentiable w.r.t. the layer-0 embeddings.
InteractionTowers propagate_interaction(ad::Tape& t, const BipartiteNorm& g, ad::NodeId user_emb0,
                                        ad::NodeId item_emb0, int layers);

// Social tower seeded from the shared base user embeddings.
ad::NodeId propagate_social(ad::Tape& t, const SpMat& s_norm, ad::NodeId user_emb0, int layers);

}  // namespace clsrec
