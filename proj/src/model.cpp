#include "clsrec/model.hpp"

#include <algorithm>
#include <numeric>

#include "clsrec/losses.hpp"

namespace clsrec {

ModelParams ModelParams::init(Index users, Index items, const RunConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0x1417));
  ModelParams p;
  p.user_emb = rng.gaussian_matrix(users, cfg.dim, cfg.init_std);
  p.item_emb = rng.gaussian_matrix(items, cfg.dim, cfg.init_std);
  p.p_b = rng.gaussian_matrix(cfg.dim, cfg.dim, cfg.init_std);
  p.p_s = rng.gaussian_matrix(cfg.dim, cfg.dim, cfg.init_std);
  p.gate_w1 = rng.gaussian_matrix(2, cfg.gate_hidden, cfg.init_std);
  p.gate_b1 = Mat::Zero(1, cfg.gate_hidden);
  p.gate_w2 = rng.gaussian_matrix(cfg.gate_hidden, 6, cfg.init_std);
  p.gate_b2 = Mat::Zero(1, 6);
  return p;
}

std::vector<std::pair<std::string, Mat*>> ModelParams::named_tensors() {
  return {{"user_emb", &user_emb}, {"item_emb", &item_emb}, {"p_b", &p_b},
          {"p_s", &p_s},           {"gate_w1", &gate_w1},   {"gate_b1", &gate_b1},
          {"gate_w2", &gate_w2},   {"gate_b2", &gate_b2}};
}

std::vector<std::pair<std::string, const Mat*>> ModelParams::named_tensors() const {
  return {{"user_emb", &user_emb}, {"item_emb", &item_emb}, {"p_b", &p_b},
          {"p_s", &p_s},           {"gate_w1", &gate_w1},   {"gate_b1", &gate_b1},
          {"gate_w2", &gate_w2},   {"gate_b2", &gate_b2}};
}

bool ModelParams::all_finite() const {
  for (const auto& [name, m] : named_tensors())
    if (!m->allFinite()) return false;
  return true;
}

GraphInputs build_graph_inputs(const Dataset& ds, const RunConfig& cfg) {
  GraphInputs g;
  SpMat a = ds.train_matrix();
  if (cfg.model != ModelKind::Bpr) g.interaction = normalize_bipartite(a);
  if (cfg.uses_social()) {
    g.social_norm = normalize_social(ds.social_matrix());
    const SpMat& svd_input = cfg.svd_on_raw ? a : g.interaction.user_to_item;
    g.svd = truncated_svd(svd_input, cfg.svd_rank, cfg.svd_oversample, cfg.svd_power_iters,
                          derive_seed(cfg.seed, 0x51D));
  }
  if (cfg.uses_alignment()) g.user_fea = user_features(ds);
  return g;
}

namespace {

ad::NodeId fuse_batch(ad::Tape& t, ForwardNodes& f, const GraphInputs& g, const RunConfig& cfg,
                      const std::vector<Index>& users) {
  if (cfg.model != ModelKind::ClsRec) return ad::row_gather(t, f.user_tower, users);

  ad::NodeId behavior = ad::row_gather(t, f.user_tower, users);
  ad::NodeId social = ad::row_gather(t, f.social_tower, users);

  if (cfg.ablation == Ablation::NoClIia)
    return ad::scalar_mul(t, ad::add(t, behavior, social), 0.5);

  CoAttentionWeights weights =
      coattention_weights(t, behavior, social, f.align.p_b, f.align.p_s);
  f.att_b = weights.w_b;
  f.att_s = weights.w_s;
  IsolatedInterests beh = isolate_interests(t, behavior, weights.w_b, cfg.resolved_gamma_i());
  IsolatedInterests soc = isolate_interests(t, social, weights.w_s, cfg.resolved_gamma_s());
  f.mask_b = beh.mask;
  f.mask_s = soc.mask;

  InterestBundle bundle{behavior, beh.aligned, beh.specific, social, soc.aligned, soc.specific};

  Mat fea_rows(static_cast<Index>(users.size()), 2);
  for (std::size_t r = 0; r < users.size(); ++r)
    fea_rows.row(static_cast<Index>(r)) = g.user_fea.row(users[r]);
  ad::NodeId features = t.constant(std::move(fea_rows));

  FusionResult fusion = gated_fusion(t, bundle, features, f.align);
  f.gate = fusion.gate;
  return fusion.fused;
}

}  // namespace

ForwardNodes build_forward_on(ad::Tape& t, const GraphInputs& g, ad::NodeId user_emb0,
                              ad::NodeId item_emb0, const AlignmentLeaves& align,
                              const RunConfig& cfg, const std::vector<Index>& users) {
  ForwardNodes f;
  f.user_emb0 = user_emb0;
  f.item_emb0 = item_emb0;
  f.align = align;

  if (cfg.model == ModelKind::Bpr) {
    f.user_tower = user_emb0;
    f.item_tower = item_emb0;
  } else {
    InteractionTowers towers =
        propagate_interaction(t, g.interaction, user_emb0, item_emb0, cfg.layers);
    f.user_tower = towers.users;
    f.item_tower = towers.items;
  }

  if (cfg.uses_social()) {
    f.social_tower = propagate_social(t, g.social_norm, user_emb0, cfg.layers);
    f.recon_tower = propagate_reconstructed(t, g.svd, user_emb0, cfg.layers);
  }

  f.fused_users = fuse_batch(t, f, g, cfg, users);
  return f;
}

Forward build_forward(const GraphInputs& g, const ModelParams& p, const RunConfig& cfg,
                      std::vector<Index> users) {
  Forward fwd;
  ad::Tape& t = fwd.tape;
  ad::NodeId ue = t.leaf(p.user_emb);
  ad::NodeId ie = t.leaf(p.item_emb);
  AlignmentLeaves align;
  if (cfg.uses_alignment()) {
    align.p_b = t.leaf(p.p_b);
    align.p_s = t.leaf(p.p_s);
    align.gate_w1 = t.leaf(p.gate_w1);
    align.gate_b1 = t.leaf(p.gate_b1);
    align.gate_w2 = t.leaf(p.gate_w2);
    align.gate_b2 = t.leaf(p.gate_b2);
  }
  fwd.nodes = build_forward_on(t, g, ue, ie, align, cfg, users);
  return fwd;
}

StepLoss build_step_loss(ad::Tape& t, const GraphInputs& g, ad::NodeId user_emb0,
                         ad::NodeId item_emb0, const AlignmentLeaves& align,
                         const RunConfig& cfg, const std::vector<BprTriple>& triples) {
  std::vector<Index> users, pos_items, neg_items;
  users.reserve(triples.size());
  pos_items.reserve(triples.size());
  neg_items.reserve(triples.size());
  for (const BprTriple& tr : triples) {
    users.push_back(tr.user);
    pos_items.push_back(tr.pos);
    neg_items.push_back(tr.neg);
  }

  StepLoss out;
  out.fwd = build_forward_on(t, g, user_emb0, item_emb0, align, cfg, users);

  ad::NodeId pos = predict_scores(t, out.fwd.fused_users, out.fwd.item_tower, std::move(pos_items));
  ad::NodeId neg = predict_scores(t, out.fwd.fused_users, out.fwd.item_tower, std::move(neg_items));

  ad::NodeId reg_user = user_emb0, reg_item = item_emb0;
  if (cfg.reg_batch_rows) {
    reg_user = ad::row_gather(t, user_emb0, users);
    std::vector<Index> batch_items;
    batch_items.reserve(triples.size() * 2);
    for (const BprTriple& tr : triples) {
      batch_items.push_back(tr.pos);
      batch_items.push_back(tr.neg);
    }
    reg_item = ad::row_gather(t, item_emb0, std::move(batch_items));
  }
  out.loss_bpr = bpr_loss(t, pos, neg, reg_user, reg_item, cfg.lambda);

  out.total = out.loss_bpr;
  if (cfg.uses_social()) {
    ad::NodeId view_social, view_recon;
    if (cfg.cl_full_batch) {
      view_social = out.fwd.social_tower;
      view_recon = out.fwd.recon_tower;
    } else {
      std::vector<Index> cl_users = users;
      std::sort(cl_users.begin(), cl_users.end());
      cl_users.erase(std::unique(cl_users.begin(), cl_users.end()), cl_users.end());
      view_social = ad::row_gather(t, out.fwd.social_tower, cl_users);
      view_recon = ad::row_gather(t, out.fwd.recon_tower, std::move(cl_users));
    }
    out.loss_cl = info_nce(t, view_social, view_recon, cfg.tau);
    out.total = total_loss(t, out.loss_bpr, out.loss_cl, cfg.effective_alpha());
  }
  return out;
}

EvalTensors materialize(const GraphInputs& g, const ModelParams& p, const RunConfig& cfg) {
  std::vector<Index> all(static_cast<std::size_t>(p.user_emb.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  Forward f = build_forward(g, p, cfg, std::move(all));

  EvalTensors out;
  out.user_emb = f.tape.value(f.nodes.fused_users);
  out.item_emb = f.tape.value(f.nodes.item_tower);
  if (f.nodes.gate != ad::kNoNode) out.gate = f.tape.value(f.nodes.gate);
  out.mask_b = std::move(f.nodes.mask_b);
  out.mask_s = std::move(f.nodes.mask_s);
  return out;
}

}  // namespace clsrec
