#pragma once

#include <string>
#include <utility>
#include <vector>

#include "clsrec/alignment.hpp"
#include "clsrec/config.hpp"
#include "clsrec/dataset.hpp"
#include "clsrec/graph.hpp"
#include "clsrec/sampling.hpp"
#include "clsrec/svd.hpp"
#include "clsrec/tape.hpp"
#include "clsrec/types.hpp"

namespace clsrec {

// All trainable tensors. Initialization order is fixed so runs are
// bit-reproducible given the seed.
struct ModelParams {
  Mat user_emb;  // M x d layer-0
  Mat item_emb;  // N x d layer-0
  Mat p_b, p_s;  // d x d co-attention
  Mat gate_w1, gate_b1, gate_w2, gate_b2;

  static ModelParams init(Index users, Index items, const RunConfig& cfg);

  std::vector<std::pair<std::string, Mat*>> named_tensors();
  std::vector<std::pair<std::string, const Mat*>> named_tensors() const;
  bool all_finite() const;
};

// Dataset-derived constants of a run: normalized adjacencies, SVD factors of
// the interaction matrix, and the standardized gate features.
struct GraphInputs {
  BipartiteNorm interaction;
  SpMat social_norm;
  SvdFactors svd;
  Mat user_fea;  // M x 2 standardized; 0x0 when alignment is unused
};

GraphInputs build_graph_inputs(const Dataset& ds, const RunConfig& cfg);

// Node handles of one forward pass (towers plus per-batch fusion).
struct ForwardNodes {
  ad::NodeId user_emb0 = ad::kNoNode;
  ad::NodeId item_emb0 = ad::kNoNode;
  AlignmentLeaves align;

  ad::NodeId user_tower = ad::kNoNode;    // E_u, M x d
  ad::NodeId item_tower = ad::kNoNode;    // E_v, N x d
  ad::NodeId social_tower = ad::kNoNode;  // social view (clsrec)
  ad::NodeId recon_tower = ad::kNoNode;   // reconstructed view (clsrec)

  ad::NodeId fused_users = ad::kNoNode;   // B x d rows for the requested users
  ad::NodeId gate = ad::kNoNode;          // B x 6 (when alignment is active)
  ad::NodeId att_b = ad::kNoNode;         // B x d co-attention weights
  ad::NodeId att_s = ad::kNoNode;
  Mat mask_b, mask_s;                     // batch isolation masks
};

// Builds the towers and fusion on an existing tape from existing parameter
// leaves (alignment leaves may be kNoNode for variants that skip them).
ForwardNodes build_forward_on(ad::Tape& t, const GraphInputs& g, ad::NodeId user_emb0,
                              ad::NodeId item_emb0, const AlignmentLeaves& align,
                              const RunConfig& cfg, const std::vector<Index>& users);

// Convenience wrapper owning the tape; creates leaves from `p`.
struct Forward {
  ad::Tape tape;
  ForwardNodes nodes;
};

Forward build_forward(const GraphInputs& g, const ModelParams& p, const RunConfig& cfg,
                      std::vector<Index> users);

// One training step's loss over sampled triples: BPR (+ regularizer), the
// contrastive term over the batch's users when the model has a social view,
// and their weighted total.
struct StepLoss {
  ForwardNodes fwd;
  ad::NodeId loss_bpr = ad::kNoNode;
  ad::NodeId loss_cl = ad::kNoNode;  // kNoNode for bpr/lightgcn
  ad::NodeId total = ad::kNoNode;
};

StepLoss build_step_loss(ad::Tape& t, const GraphInputs& g, ad::NodeId user_emb0,
                         ad::NodeId item_emb0, const AlignmentLeaves& align,
                         const RunConfig& cfg, const std::vector<BprTriple>& triples);

// Final representations for ranking: (fused user embeddings for all users,
// item embeddings), plus gate/mask diagnostics when alignment is active.
struct EvalTensors {
  Mat user_emb;  // M x d
  Mat item_emb;  // N x d
  Mat gate;      // M x 6 or empty
  Mat mask_b, mask_s;
};

EvalTensors materialize(const GraphInputs& g, const ModelParams& p, const RunConfig& cfg);

}  // namespace clsrec
