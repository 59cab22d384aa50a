#pragma once

#include <string>
#include <utility>
#include <vector>

#include "clsrec/config.hpp"
#include "clsrec/model.hpp"
#include "clsrec/svd.hpp"
#include "clsrec/types.hpp"

namespace clsrec {

// Self-describing training artifact: every trainable tensor, the SVD factors
// (so evaluation never refactorizes), gate features, the config snapshot and
// the validation history.
struct Checkpoint {
  RunConfig config;
  std::string dataset_fingerprint;
  ModelParams params;
  SvdFactors svd;  // empty unless the model uses the reconstructed view
  Mat user_fea;    // empty unless alignment is active
  int best_epoch = 0;
  Real best_val_recall20 = 0.0;
  std::vector<std::pair<int, Real>> val_history;  // (epoch, recall@20)
};

// Binary format: magic "CLSR", format version, a table of named little-endian
// float64 arrays with shapes, then a UTF-8 JSON metadata block. Round-trips
// every tensor bit-exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Rebuilds the run constants for evaluation: adjacencies from the dataset,
// SVD factors and gate features from the checkpoint (never refactorized).
GraphInputs rebuild_graph_inputs(const Dataset& ds, const Checkpoint& ckpt);

}  // namespace clsrec
