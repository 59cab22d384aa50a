#include "clsrec/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace clsrec {

ModelKind parse_model(const std::string& name) {
  if (name == "bpr") return ModelKind::Bpr;
  if (name == "lightgcn") return ModelKind::LightGcn;
  if (name == "clsrec") return ModelKind::ClsRec;
  throw Error(ErrorKind::Usage, "unknown model '" + name + "' (expected bpr|lightgcn|clsrec)");
}

Ablation parse_ablation(const std::string& name) {
  if (name == "none") return Ablation::None;
  if (name == "no-cl") return Ablation::NoCl;
  if (name == "no-cl-iia") return Ablation::NoClIia;
  throw Error(ErrorKind::Usage,
              "unknown ablation '" + name + "' (expected none|no-cl|no-cl-iia)");
}

const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::Bpr: return "bpr";
    case ModelKind::LightGcn: return "lightgcn";
    default: return "clsrec";
  }
}

const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::NoCl: return "no-cl";
    default: return "no-cl-iia";
  }
}

void RunConfig::normalize_and_check() {
  if (ablation != Ablation::None && model != ModelKind::ClsRec)
    throw Error(ErrorKind::Usage, "--ablation is only valid with --model clsrec");
  if (model == ModelKind::Bpr) layers = 0;  // pure matrix factorization
  if (dim < 1) throw Error(ErrorKind::Usage, "dim must be >= 1");
  if (layers < 0) throw Error(ErrorKind::Usage, "layers must be >= 0");
  if (tau <= 0.0) throw Error(ErrorKind::Usage, "tau must be > 0");
  if (alpha < 0.0) throw Error(ErrorKind::Usage, "alpha must be >= 0");
  if (lambda < 0.0) throw Error(ErrorKind::Usage, "lambda must be >= 0");
  if (batch_size < 1) throw Error(ErrorKind::Usage, "batch_size must be >= 1");
  if (effective_alpha() > 0.0 && batch_size < 2)
    throw Error(ErrorKind::Usage, "batch_size must be >= 2 when the contrastive term is active");
  if (epochs < 1) throw Error(ErrorKind::Usage, "epochs must be >= 1");
  if (patience < 1) throw Error(ErrorKind::Usage, "patience must be >= 1");
  if (eval_every < 1) throw Error(ErrorKind::Usage, "eval_every must be >= 1");
  if (gate_hidden < 1) throw Error(ErrorKind::Usage, "gate_hidden must be >= 1");
  if (svd_rank < 1) throw Error(ErrorKind::Usage, "svd_rank must be >= 1");
  if (svd_oversample < 0 || svd_power_iters < 0)
    throw Error(ErrorKind::Usage, "svd_oversample and svd_power_iters must be >= 0");
  if (init_std <= 0.0) throw Error(ErrorKind::Usage, "init_std must be > 0");
  if (cold_threshold < 0) throw Error(ErrorKind::Usage, "cold_threshold must be >= 0");
}

namespace {

struct KeyHandler {
  std::function<void(RunConfig&, const std::string&)> set;
};

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1") { out = true; return true; }
  if (v == "false" || v == "0") { out = false; return true; }
  return false;
}

template <typename T>
bool parse_num(const std::string& v, T& out) {
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  return ec == std::errc() && p == v.data() + v.size();
}

const std::map<std::string, KeyHandler>& handlers() {
  auto num = [](auto member) {
    return KeyHandler{[member](RunConfig& c, const std::string& v) {
      if (!parse_num(v, c.*member))
        throw Error(ErrorKind::Usage, "invalid numeric value '" + v + "'");
    }};
  };
  auto boolean = [](auto member) {
    return KeyHandler{[member](RunConfig& c, const std::string& v) {
      if (!parse_bool(v, c.*member))
        throw Error(ErrorKind::Usage, "invalid boolean value '" + v + "' (expected true|false)");
    }};
  };
  static const std::map<std::string, KeyHandler> table = {
      {"dim", num(&RunConfig::dim)},
      {"layers", num(&RunConfig::layers)},
      {"svd_rank", num(&RunConfig::svd_rank)},
      {"svd_oversample", num(&RunConfig::svd_oversample)},
      {"svd_power_iters", num(&RunConfig::svd_power_iters)},
      {"svd_on_raw", boolean(&RunConfig::svd_on_raw)},
      {"tau", num(&RunConfig::tau)},
      {"alpha", num(&RunConfig::alpha)},
      {"lambda", num(&RunConfig::lambda)},
      {"gamma_i", num(&RunConfig::gamma_i)},
      {"gamma_s", num(&RunConfig::gamma_s)},
      {"lr", num(&RunConfig::lr)},
      {"batch_size", num(&RunConfig::batch_size)},
      {"epochs", num(&RunConfig::epochs)},
      {"patience", num(&RunConfig::patience)},
      {"eval_every", num(&RunConfig::eval_every)},
      {"init_std", num(&RunConfig::init_std)},
      {"gate_hidden", num(&RunConfig::gate_hidden)},
      {"cl_full_batch", boolean(&RunConfig::cl_full_batch)},
      {"reg_batch_rows", boolean(&RunConfig::reg_batch_rows)},
      {"cold_threshold", num(&RunConfig::cold_threshold)},
  };
  return table;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto it = handlers().find(key);
  if (it == handlers().end()) {
    std::string known;
    for (const auto& [k, _] : handlers()) known += (known.empty() ? "" : ", ") + k;
    throw Error(ErrorKind::Usage, "unknown config key '" + key + "' (valid keys: " + known + ")");
  }
  try {
    it->second.set(cfg, value);
  } catch (const Error& e) {
    throw Error(ErrorKind::Usage, "config key '" + key + "': " + e.what());
  }
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Usage, "cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Usage,
                  path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_override(RunConfig& cfg, const std::string& key_value) {
  std::size_t eq = key_value.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorKind::Usage, "--set expects key=value, got '" + key_value + "'");
  set_key(cfg, trim(key_value.substr(0, eq)), trim(key_value.substr(eq + 1)));
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["model"] = model_name(model);
  j["ablation"] = ablation_name(ablation);
  j["dim"] = dim;
  j["layers"] = layers;
  j["svd_rank"] = svd_rank;
  j["svd_oversample"] = svd_oversample;
  j["svd_power_iters"] = svd_power_iters;
  j["svd_on_raw"] = svd_on_raw;
  j["tau"] = tau;
  j["alpha"] = alpha;
  j["lambda"] = lambda;
  j["gamma_i"] = gamma_i;
  j["gamma_s"] = gamma_s;
  j["lr"] = lr;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["patience"] = patience;
  j["eval_every"] = eval_every;
  j["init_std"] = init_std;
  j["gate_hidden"] = gate_hidden;
  j["cl_full_batch"] = cl_full_batch;
  j["reg_batch_rows"] = reg_batch_rows;
  j["cold_threshold"] = cold_threshold;
  j["seed"] = seed;
  return j.dump();
}

RunConfig RunConfig::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  RunConfig c;
  c.model = parse_model(j.at("model").get<std::string>());
  c.ablation = parse_ablation(j.at("ablation").get<std::string>());
  c.dim = j.at("dim").get<int>();
  c.layers = j.at("layers").get<int>();
  c.svd_rank = j.at("svd_rank").get<int>();
  c.svd_oversample = j.at("svd_oversample").get<int>();
  c.svd_power_iters = j.at("svd_power_iters").get<int>();
  c.svd_on_raw = j.at("svd_on_raw").get<bool>();
  c.tau = j.at("tau").get<Real>();
  c.alpha = j.at("alpha").get<Real>();
  c.lambda = j.at("lambda").get<Real>();
  c.gamma_i = j.at("gamma_i").get<Real>();
  c.gamma_s = j.at("gamma_s").get<Real>();
  c.lr = j.at("lr").get<Real>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.patience = j.at("patience").get<int>();
  c.eval_every = j.at("eval_every").get<int>();
  c.init_std = j.at("init_std").get<Real>();
  c.gate_hidden = j.at("gate_hidden").get<int>();
  c.cl_full_batch = j.at("cl_full_batch").get<bool>();
  c.reg_batch_rows = j.at("reg_batch_rows").get<bool>();
  c.cold_threshold = j.at("cold_threshold").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace clsrec
