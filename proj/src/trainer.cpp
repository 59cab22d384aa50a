#include "clsrec/trainer.hpp"

#include <ostream>

#include "clsrec/metrics.hpp"

namespace clsrec {

EpochStats train_epoch(const GraphInputs& g, ModelParams& params, const RunConfig& cfg,
                       const TripleSampler& sampler, Adam& opt, Rng& rng,
                       std::size_t train_size) {
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t steps = (train_size + batch - 1) / batch;

  EpochStats stats;
  stats.steps = steps;
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<BprTriple> triples = sampler.sample(batch, rng);

    ad::Tape t;
    ad::NodeId ue = t.leaf(params.user_emb);
    ad::NodeId ie = t.leaf(params.item_emb);
    AlignmentLeaves align;
    if (cfg.uses_alignment()) {
      align.p_b = t.leaf(params.p_b);
      align.p_s = t.leaf(params.p_s);
      align.gate_w1 = t.leaf(params.gate_w1);
      align.gate_b1 = t.leaf(params.gate_b1);
      align.gate_w2 = t.leaf(params.gate_w2);
      align.gate_b2 = t.leaf(params.gate_b2);
    }

    StepLoss step = build_step_loss(t, g, ue, ie, align, cfg, triples);
    stats.mean_bpr += t.value(step.loss_bpr)(0, 0);
    if (step.loss_cl != ad::kNoNode) stats.mean_cl += t.value(step.loss_cl)(0, 0);

    ad::Gradients grads = t.backward(step.total);

    const ad::NodeId leaf_ids[8] = {ue,
                                    ie,
                                    align.p_b,
                                    align.p_s,
                                    align.gate_w1,
                                    align.gate_b1,
                                    align.gate_w2,
                                    align.gate_b2};
    std::vector<Mat*> tensors;
    for (auto& [name, m] : params.named_tensors()) tensors.push_back(m);
    std::vector<Mat> grad_store(8);
    std::vector<const Mat*> grad_ptrs(8, nullptr);
    for (int i = 0; i < 8; ++i) {
      if (leaf_ids[i] != ad::kNoNode && grads.has(leaf_ids[i])) {
        grad_store[i] = grads.at(leaf_ids[i]);
        grad_ptrs[i] = &grad_store[i];
      }
    }
    opt.step(tensors, grad_ptrs);
  }

  stats.mean_bpr /= static_cast<Real>(steps);
  stats.mean_cl /= static_cast<Real>(steps);
  return stats;
}

Checkpoint fit(const Dataset& ds, const RunConfig& cfg, std::ostream& log) {
  GraphInputs graph = build_graph_inputs(ds, cfg);
  ModelParams params = ModelParams::init(ds.num_users, ds.num_items, cfg);
  TripleSampler sampler(ds);
  Adam opt(cfg.lr);
  Rng rng(derive_seed(cfg.seed, 0x5A3));

  Checkpoint best;
  best.config = cfg;
  best.dataset_fingerprint = ds.fingerprint();
  best.svd = graph.svd;
  best.user_fea = graph.user_fea;
  best.params = params;
  best.best_epoch = 0;
  best.best_val_recall20 = -1.0;

  int evals_without_improvement = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochStats stats = train_epoch(graph, params, cfg, sampler, opt, rng, ds.train.size());
    if (!params.all_finite())
      throw Error(ErrorKind::Numeric,
                  "non-finite parameter after epoch " + std::to_string(epoch));

    if (epoch % cfg.eval_every != 0 && epoch != cfg.epochs) continue;

    EvalTensors eval = materialize(graph, params, cfg);
    MetricsReport rep =
        evaluate_embeddings(eval.user_emb, eval.item_emb, ds, Split::Val, {20}, cfg.cold_threshold);
    const Real recall20 = rep.recall_at(20);
    best.val_history.emplace_back(epoch, recall20);
    log << "epoch=" << epoch << " loss_bpr=" << stats.mean_bpr << " loss_cl=" << stats.mean_cl
        << " val_recall20=" << recall20 << "\n";
    log.flush();

    if (recall20 > best.best_val_recall20) {
      best.best_val_recall20 = recall20;
      best.best_epoch = epoch;
      best.params = params;
      evals_without_improvement = 0;
    } else {
      ++evals_without_improvement;
      if (evals_without_improvement >= cfg.patience) break;
    }
  }
  return best;
}

}  // namespace clsrec
