#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clsrec/types.hpp"

namespace clsrec {

enum class ModelKind { Bpr, LightGcn, ClsRec };
enum class Ablation { None, NoCl, NoClIia };

ModelKind parse_model(const std::string& name);
Ablation parse_ablation(const std::string& name);
const char* model_name(ModelKind m);
const char* ablation_name(Ablation a);

struct RunConfig {
  ModelKind model = ModelKind::ClsRec;
  Ablation ablation = Ablation::None;

  int dim = 64;
  int layers = 3;

  int svd_rank = 5;
  int svd_oversample = 10;
  int svd_power_iters = 4;
  bool svd_on_raw = false;

  Real tau = 0.2;
  Real alpha = 0.1;
  Real lambda = 1e-4;
  Real gamma_i = -1.0;  // < 0 means the 1/dim default
  Real gamma_s = -1.0;

  Real lr = 1e-3;
  int batch_size = 2048;
  int epochs = 1000;
  int patience = 10;
  int eval_every = 5;
  Real init_std = 0.1;
  int gate_hidden = 16;

  bool cl_full_batch = false;
  bool reg_batch_rows = false;

  int cold_threshold = 20;
  std::uint64_t seed = 42;

  Real resolved_gamma_i() const { return gamma_i < 0.0 ? 1.0 / dim : gamma_i; }
  Real resolved_gamma_s() const { return gamma_s < 0.0 ? 1.0 / dim : gamma_s; }

  bool uses_social() const { return model == ModelKind::ClsRec; }
  bool uses_alignment() const {
    return model == ModelKind::ClsRec && ablation != Ablation::NoClIia;
  }
  Real effective_alpha() const {
    return (model == ModelKind::ClsRec && ablation == Ablation::None) ? alpha : 0.0;
  }

  // Applies the model-variant constraints and checks value ranges.
  void normalize_and_check();

  std::string to_json() const;
  static RunConfig from_json(const std::string& json_text);
};

// Plain-text `key = value` lines; '#' starts a comment. Unknown keys are
// rejected listing the valid set.
void apply_config_file(RunConfig& cfg, const std::string& path);
void apply_override(RunConfig& cfg, const std::string& key_value);  // "key=value"

}  // namespace clsrec
