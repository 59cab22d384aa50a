#include "clsrec/checkpoint.hpp"

#include <cstring>
#include <map>

#include <json.hpp>

#include "clsrec/io_util.hpp"

namespace clsrec {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'S', 'R'};
constexpr std::uint32_t kVersion = 1;

void write_tensor(io::Writer& w, const std::string& name, const Mat& m) {
  w.str(name);
  w.u32(2);
  w.u64(static_cast<std::uint64_t>(m.rows()));
  w.u64(static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
}

Mat read_tensor(io::Reader& r) {
  std::uint32_t ndim = r.u32();
  if (ndim != 2) throw Error(ErrorKind::Data, "checkpoint: unsupported tensor rank");
  Index rows = static_cast<Index>(r.u64());
  Index cols = static_cast<Index>(r.u64());
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = r.f64();
  return m;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  io::Writer w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);

  std::vector<std::pair<std::string, const Mat*>> tensors = ckpt.params.named_tensors();
  Mat svd_s;
  if (!ckpt.svd.empty()) {
    svd_s = ckpt.svd.s;
    tensors.emplace_back("svd_u", &ckpt.svd.u);
    tensors.emplace_back("svd_s", &svd_s);
    tensors.emplace_back("svd_v", &ckpt.svd.v);
  }
  if (ckpt.user_fea.size() > 0) tensors.emplace_back("user_fea", &ckpt.user_fea);

  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, m] : tensors) write_tensor(w, name, *m);

  nlohmann::json meta;
  meta["config"] = nlohmann::json::parse(ckpt.config.to_json());
  meta["dataset_fingerprint"] = ckpt.dataset_fingerprint;
  meta["best_epoch"] = ckpt.best_epoch;
  meta["best_val_recall20"] = ckpt.best_val_recall20;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [epoch, recall] : ckpt.val_history)
    hist.push_back({{"epoch", epoch}, {"recall20", recall}});
  meta["val_history"] = hist;
  std::string meta_str = meta.dump();
  w.u64(meta_str.size());
  w.bytes(meta_str.data(), meta_str.size());

  w.save(path);
}

Checkpoint load_checkpoint(const std::string& path) {
  io::Reader r = io::Reader::from_file(path);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw Error(ErrorKind::Data, path + ": bad magic bytes (not a checkpoint)");
  std::uint32_t version = r.u32();
  if (version != kVersion)
    throw Error(ErrorKind::Data, path + ": unsupported checkpoint version " +
                                     std::to_string(version));

  std::uint32_t count = r.u32();
  std::map<std::string, Mat> table;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    table[name] = read_tensor(r);
  }

  std::uint64_t meta_len = r.u64();
  if (meta_len > r.remaining())
    throw Error(ErrorKind::Data, path + ": truncated metadata block");
  std::string meta_str(meta_len, '\0');
  r.raw(meta_str.data(), meta_len);

  Checkpoint ckpt;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_str);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Data, path + ": corrupt metadata JSON: " + e.what());
  }
  ckpt.config = RunConfig::from_json(meta.at("config").dump());
  ckpt.dataset_fingerprint = meta.at("dataset_fingerprint").get<std::string>();
  ckpt.best_epoch = meta.at("best_epoch").get<int>();
  ckpt.best_val_recall20 = meta.at("best_val_recall20").get<Real>();
  for (const auto& h : meta.at("val_history"))
    ckpt.val_history.emplace_back(h.at("epoch").get<int>(), h.at("recall20").get<Real>());

  auto take = [&](const std::string& name) {
    auto it = table.find(name);
    if (it == table.end())
      throw Error(ErrorKind::Data, path + ": missing tensor '" + name + "'");
    return std::move(it->second);
  };
  ckpt.params.user_emb = take("user_emb");
  ckpt.params.item_emb = take("item_emb");
  ckpt.params.p_b = take("p_b");
  ckpt.params.p_s = take("p_s");
  ckpt.params.gate_w1 = take("gate_w1");
  ckpt.params.gate_b1 = take("gate_b1");
  ckpt.params.gate_w2 = take("gate_w2");
  ckpt.params.gate_b2 = take("gate_b2");
  if (table.count("svd_u")) {
    ckpt.svd.u = take("svd_u");
    Mat s = take("svd_s");
    ckpt.svd.s = s.col(0);
    ckpt.svd.v = take("svd_v");
  }
  if (table.count("user_fea")) ckpt.user_fea = take("user_fea");
  return ckpt;
}

GraphInputs rebuild_graph_inputs(const Dataset& ds, const Checkpoint& ckpt) {
  const RunConfig& cfg = ckpt.config;
  GraphInputs g;
  if (cfg.model != ModelKind::Bpr) g.interaction = normalize_bipartite(ds.train_matrix());
  if (cfg.uses_social()) {
    g.social_norm = normalize_social(ds.social_matrix());
    if (ckpt.svd.empty())
      throw Error(ErrorKind::Data, "checkpoint lacks the SVD factors its config requires");
    g.svd = ckpt.svd;
  }
  if (cfg.uses_alignment())
    g.user_fea = ckpt.user_fea.size() > 0 ? ckpt.user_fea : user_features(ds);
  return g;
}

}  // namespace clsrec
