#pragma once

#include <iosfwd>

#include "clsrec/adam.hpp"
#include "clsrec/checkpoint.hpp"
#include "clsrec/config.hpp"
#include "clsrec/dataset.hpp"
#include "clsrec/model.hpp"
#include "clsrec/sampling.hpp"

namespace clsrec {

struct EpochStats {
  Real mean_bpr = 0.0;
  Real mean_cl = 0.0;
  std::size_t steps = 0;
};

// One pass of ceil(|train| / batch) steps; each step builds a fresh tape,
// propagates the towers, fuses, scores the sampled triples and applies Adam.
EpochStats train_epoch(const GraphInputs& g, ModelParams& params, const RunConfig& cfg,
                       const TripleSampler& sampler, Adam& opt, Rng& rng,
                       std::size_t train_size);

// Full training run with validation-based early stopping on Recall@20.
// Logs `epoch=<n> loss_bpr=<f> loss_cl=<f> val_recall20=<f>` per evaluation.
Checkpoint fit(const Dataset& ds, const RunConfig& cfg, std::ostream& log);

}  // namespace clsrec
