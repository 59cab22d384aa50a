#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "clsrec/checkpoint.hpp"
#include "clsrec/config.hpp"
#include "clsrec/dataset.hpp"
#include "clsrec/metrics.hpp"
#include "clsrec/model.hpp"
#include "clsrec/trainer.hpp"

namespace {

using namespace clsrec;

std::vector<int> parse_k_list(const std::string& s) {
  std::vector<int> ks;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) {
      try {
        ks.push_back(std::stoi(tok));
      } catch (...) {
        throw Error(ErrorKind::Usage, "invalid K value '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (ks.empty()) throw Error(ErrorKind::Usage, "--k requires at least one value");
  for (int k : ks)
    if (k < 1) throw Error(ErrorKind::Usage, "K values must be >= 1");
  return ks;
}

int cmd_prepare_data(const std::string& dataset, const std::string& input,
                     const std::string& output, std::uint64_t seed, Real positive_threshold) {
  Dataset ds;
  if (dataset == "lastfm") {
    ds = load_lastfm(input, seed);
  } else if (dataset == "ciao") {
    ds = load_ciao(input, seed, positive_threshold);
  } else {
    throw Error(ErrorKind::Usage, "unknown dataset '" + dataset + "' (expected lastfm|ciao)");
  }
  save_dataset(ds, output);
  std::string summary = dataset_summary_json(ds);
  std::ofstream summary_out(output + ".json");
  summary_out << summary << "\n";
  std::cout << summary << "\n";
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& model,
              const std::string& ablation, const std::string& config_path,
              const std::vector<std::string>& overrides, const std::string& out_path,
              std::uint64_t seed) {
  RunConfig cfg;
  cfg.model = parse_model(model);
  cfg.ablation = parse_ablation(ablation);
  if (!config_path.empty()) apply_config_file(cfg, config_path);
  for (const std::string& kv : overrides) apply_override(cfg, kv);
  cfg.seed = seed;
  cfg.normalize_and_check();

  Dataset ds = load_dataset(data_path);
  Checkpoint ckpt = fit(ds, cfg, std::cout);
  save_checkpoint(ckpt, out_path);

  EvalTensors eval = materialize(rebuild_graph_inputs(ds, ckpt), ckpt.params, cfg);
  MetricsReport rep = evaluate_embeddings(eval.user_emb, eval.item_emb, ds, Split::Val, {10, 20},
                                          cfg.cold_threshold);
  std::cout << "final validation metrics (best epoch " << ckpt.best_epoch << "):\n"
            << rep.to_tsv();
  return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& data_path,
                 const std::string& split_str, const std::string& k_list, int cold_threshold,
                 const std::string& format, const std::string& dump_gates_path,
                 bool allow_mismatch) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  Dataset ds = load_dataset(data_path);
  if (ds.fingerprint() != ckpt.dataset_fingerprint) {
    if (!allow_mismatch)
      throw Error(ErrorKind::Data,
                  "dataset fingerprint mismatch: checkpoint was trained on " +
                      ckpt.dataset_fingerprint + " but --data has " + ds.fingerprint() +
                      " (pass --allow-fingerprint-mismatch to override)");
    std::cerr << "warning: evaluating despite dataset fingerprint mismatch\n";
  }

  GraphInputs g = rebuild_graph_inputs(ds, ckpt);
  EvalTensors eval = materialize(g, ckpt.params, ckpt.config);
  MetricsReport rep = evaluate_embeddings(eval.user_emb, eval.item_emb, ds,
                                          parse_split(split_str), parse_k_list(k_list),
                                          cold_threshold);
  if (format == "tsv") {
    std::cout << rep.to_tsv();
  } else if (format == "json") {
    std::cout << rep.to_json() << "\n";
  } else {
    throw Error(ErrorKind::Usage, "unknown format '" + format + "' (expected json|tsv)");
  }

  if (!dump_gates_path.empty()) {
    if (eval.gate.size() == 0)
      throw Error(ErrorKind::Usage,
                  "--dump-gates requires a checkpoint trained with interest alignment");
    std::ofstream out(dump_gates_path);
    if (!out) throw Error(ErrorKind::Data, "cannot open " + dump_gates_path + " for writing");
    out << "user_raw_id";
    for (int c = 1; c <= 6; ++c) out << "\tgate" << c;
    out << "\taligned_coords_behavior\taligned_coords_social\n";
    for (Index u = 0; u < ds.num_users; ++u) {
      out << ds.user_raw_ids[static_cast<std::size_t>(u)];
      for (Index c = 0; c < 6; ++c) out << "\t" << eval.gate(u, c);
      out << "\t" << static_cast<std::int64_t>(eval.mask_b.row(u).sum()) << "\t"
          << static_cast<std::int64_t>(eval.mask_s.row(u).sum()) << "\n";
    }
  }
  return 0;
}

int cmd_recommend(const std::string& ckpt_path, const std::string& data_path,
                  std::int64_t raw_user, int k) {
  if (k < 1) throw Error(ErrorKind::Usage, "--k must be >= 1");
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  Dataset ds = load_dataset(data_path);
  if (ds.fingerprint() != ckpt.dataset_fingerprint)
    throw Error(ErrorKind::Data, "dataset fingerprint mismatch between checkpoint and --data");

  auto it = std::lower_bound(ds.user_raw_ids.begin(), ds.user_raw_ids.end(), raw_user);
  if (it == ds.user_raw_ids.end() || *it != raw_user)
    throw Error(ErrorKind::Data, "unknown user id " + std::to_string(raw_user));
  const Index user = static_cast<Index>(it - ds.user_raw_ids.begin());

  GraphInputs g = rebuild_graph_inputs(ds, ckpt);
  EvalTensors eval = materialize(g, ckpt.params, ckpt.config);
  Vec scores = (eval.user_emb.row(user) * eval.item_emb.transpose()).transpose();
  const auto train_items = ds.items_by_user(Split::Train);
  std::vector<Index> topk = rank_topk(scores, train_items[static_cast<std::size_t>(user)], k);
  if (static_cast<int>(topk.size()) < k)
    std::cerr << "warning: only " << topk.size() << " items available after exclusions\n";
  for (Index item : topk)
    std::cout << ds.item_raw_ids[static_cast<std::size_t>(item)] << "\t" << scores(item) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"social-graph-augmented implicit-feedback recommender"};
  app.require_subcommand(1);

  // prepare-data
  auto* prep = app.add_subcommand("prepare-data", "ingest a raw dataset and cache the splits");
  std::string prep_dataset, prep_input, prep_output;
  std::uint64_t prep_seed = 42;
  Real prep_threshold = 0.0;
  prep->add_option("--dataset", prep_dataset, "lastfm|ciao")->required();
  prep->add_option("--input", prep_input, "directory with the raw files")->required();
  prep->add_option("--output", prep_output, "cache file to write")->required();
  prep->add_option("--seed", prep_seed, "split seed");
  prep->add_option("--positive-threshold", prep_threshold, "minimum rating for a positive (ciao)");

  // train
  auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
  std::string train_data, train_model = "clsrec", train_ablation = "none", train_config,
              train_out;
  std::vector<std::string> train_sets;
  std::uint64_t train_seed = 42;
  train->add_option("--data", train_data, "prepared dataset cache")->required();
  train->add_option("--model", train_model, "bpr|lightgcn|clsrec");
  train->add_option("--ablation", train_ablation, "none|no-cl|no-cl-iia");
  train->add_option("--config", train_config, "key = value config file");
  train->add_option("--set", train_sets, "key=value override (repeatable)");
  train->add_option("--out", train_out, "checkpoint file to write")->required();
  train->add_option("--seed", train_seed, "run seed");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score a checkpoint on a split");
  std::string eval_ckpt, eval_data, eval_split = "test", eval_k = "10,20",
              eval_format = "json", eval_dump_gates;
  int eval_cold = 20;
  bool eval_allow_mismatch = false;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--data", eval_data, "prepared dataset cache")->required();
  eval->add_option("--split", eval_split, "val|test");
  eval->add_option("--k", eval_k, "comma-separated K list");
  eval->add_option("--cold-threshold", eval_cold, "cold-user training-degree threshold");
  eval->add_option("--format", eval_format, "json|tsv");
  eval->add_option("--dump-gates", eval_dump_gates, "write per-user gate weights TSV");
  eval->add_flag("--allow-fingerprint-mismatch", eval_allow_mismatch);

  // recommend
  auto* rec = app.add_subcommand("recommend", "top-K items for one user");
  std::string rec_ckpt, rec_data;
  std::int64_t rec_user = 0;
  int rec_k = 10;
  rec->add_option("--checkpoint", rec_ckpt, "checkpoint file")->required();
  rec->add_option("--data", rec_data, "prepared dataset cache")->required();
  rec->add_option("--user", rec_user, "raw user id")->required();
  rec->add_option("--k", rec_k, "list length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (prep->parsed())
      return cmd_prepare_data(prep_dataset, prep_input, prep_output, prep_seed, prep_threshold);
    if (train->parsed())
      return cmd_train(train_data, train_model, train_ablation, train_config, train_sets,
                       train_out, train_seed);
    if (eval->parsed())
      return cmd_evaluate(eval_ckpt, eval_data, eval_split, eval_k, eval_cold, eval_format,
                          eval_dump_gates, eval_allow_mismatch);
    if (rec->parsed()) return cmd_recommend(rec_ckpt, rec_data, rec_user, rec_k);
  } catch (const clsrec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
