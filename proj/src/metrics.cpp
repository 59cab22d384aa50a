#include "clsrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace clsrec {

std::vector<Index> rank_topk(Eigen::Ref<const Vec> scores,
                             const std::vector<std::uint32_t>& exclude, int k) {
  const Index n = scores.size();
  std::vector<Index> candidates;
  candidates.reserve(static_cast<std::size_t>(n) - exclude.size());
  std::size_t e = 0;  // exclude is sorted: one synchronized sweep
  for (Index i = 0; i < n; ++i) {
    if (e < exclude.size() && static_cast<Index>(exclude[e]) == i) {
      ++e;
      continue;
    }
    candidates.push_back(i);
  }

  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
  auto better = [&](Index a, Index b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  };
  if (take < candidates.size())
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                     candidates.end(), better);
  candidates.resize(take);
  std::sort(candidates.begin(), candidates.end(), better);
  return candidates;
}

KMetrics metrics_at_k(const std::vector<Index>& topk, const std::vector<std::uint32_t>& truth,
                      int k) {
  if (truth.empty()) throw Error(ErrorKind::Usage, "metrics_at_k: empty ground truth");
  KMetrics m;
  int hits = 0;
  Real dcg = 0.0;
  for (std::size_t rank = 0; rank < topk.size(); ++rank) {
    if (std::binary_search(truth.begin(), truth.end(),
                           static_cast<std::uint32_t>(topk[rank]))) {
      ++hits;
      dcg += 1.0 / std::log2(static_cast<Real>(rank) + 2.0);
    }
  }
  Real idcg = 0.0;
  const std::size_t ideal = std::min<std::size_t>(static_cast<std::size_t>(k), truth.size());
  for (std::size_t rank = 0; rank < ideal; ++rank)
    idcg += 1.0 / std::log2(static_cast<Real>(rank) + 2.0);

  m.precision = static_cast<Real>(hits) / static_cast<Real>(k);
  m.recall = static_cast<Real>(hits) / static_cast<Real>(truth.size());
  m.ndcg = idcg > 0.0 ? dcg / idcg : 0.0;
  return m;
}

std::vector<bool> cold_user_mask(const Dataset& ds, int threshold) {
  const auto deg = ds.train_degrees();
  std::vector<bool> cold(deg.size());
  for (std::size_t u = 0; u < deg.size(); ++u) cold[u] = deg[u] < threshold;
  return cold;
}

Real MetricsReport::recall_at(int k) const {
  for (const MetricsRow& r : all)
    if (r.k == k) return r.recall;
  throw Error(ErrorKind::Usage, "recall@" + std::to_string(k) + " not in report");
}

Real MetricsReport::precision_at(int k, bool cold_slice) const {
  for (const MetricsRow& r : cold_slice ? cold : all)
    if (r.k == k) return r.precision;
  throw Error(ErrorKind::Usage, "precision@" + std::to_string(k) + " not in report");
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  auto rows = [](const std::vector<MetricsRow>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (const MetricsRow& r : v)
      out.push_back({{"k", r.k}, {"precision", r.precision}, {"recall", r.recall}, {"ndcg", r.ndcg}});
    return out;
  };
  j["all_users"] = rows(all);
  j["cold_users"] = rows(cold);
  j["counts"] = {{"evaluated", evaluated_users},
                 {"cold_evaluated", cold_evaluated_users},
                 {"skipped_empty_truth", skipped_users}};
  return j.dump(2);
}

std::string MetricsReport::to_tsv() const {
  std::ostringstream os;
  os << "metric\tK\tall_users\tcold_users\n";
  os.precision(6);
  os << std::fixed;
  for (std::size_t i = 0; i < all.size(); ++i) {
    os << "Precision\t" << all[i].k << "\t" << all[i].precision << "\t" << cold[i].precision << "\n";
    os << "Recall\t" << all[i].k << "\t" << all[i].recall << "\t" << cold[i].recall << "\n";
    os << "NDCG\t" << all[i].k << "\t" << all[i].ndcg << "\t" << cold[i].ndcg << "\n";
  }
  return os.str();
}

MetricsReport evaluate_embeddings(const Mat& user_emb, const Mat& item_emb, const Dataset& ds,
                                  Split split, const std::vector<int>& ks, int cold_threshold) {
  if (user_emb.rows() != ds.num_users || item_emb.rows() != ds.num_items)
    throw Error(ErrorKind::Usage, "evaluate: embedding shapes do not match dataset");

  const auto truth = ds.items_by_user(split);
  const auto train_items = ds.items_by_user(Split::Train);
  const auto cold = cold_user_mask(ds, cold_threshold);

  MetricsReport rep;
  rep.all.resize(ks.size());
  rep.cold.resize(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) rep.all[i].k = rep.cold[i].k = ks[i];

  const int max_k = *std::max_element(ks.begin(), ks.end());
  const Index block = 256;

  std::vector<KMetrics> sums_all(ks.size()), sums_cold(ks.size());
  for (Index start = 0; start < ds.num_users; start += block) {
    const Index count = std::min<Index>(block, ds.num_users - start);
    Mat scores = user_emb.middleRows(start, count) * item_emb.transpose();
    for (Index r = 0; r < count; ++r) {
      const Index u = start + r;
      const auto& gt = truth[static_cast<std::size_t>(u)];
      if (gt.empty()) {
        ++rep.skipped_users;
        continue;
      }
      std::vector<Index> topk =
          rank_topk(scores.row(r).transpose(), train_items[static_cast<std::size_t>(u)], max_k);
      ++rep.evaluated_users;
      const bool is_cold = cold[static_cast<std::size_t>(u)];
      if (is_cold) ++rep.cold_evaluated_users;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        std::vector<Index> head(
            topk.begin(),
            topk.begin() + std::min<std::ptrdiff_t>(ks[i], static_cast<std::ptrdiff_t>(topk.size())));
        KMetrics m = metrics_at_k(head, gt, ks[i]);
        sums_all[i].precision += m.precision;
        sums_all[i].recall += m.recall;
        sums_all[i].ndcg += m.ndcg;
        if (is_cold) {
          sums_cold[i].precision += m.precision;
          sums_cold[i].recall += m.recall;
          sums_cold[i].ndcg += m.ndcg;
        }
      }
    }
  }

  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (rep.evaluated_users > 0) {
      rep.all[i].precision = sums_all[i].precision / static_cast<Real>(rep.evaluated_users);
      rep.all[i].recall = sums_all[i].recall / static_cast<Real>(rep.evaluated_users);
      rep.all[i].ndcg = sums_all[i].ndcg / static_cast<Real>(rep.evaluated_users);
    }
    if (rep.cold_evaluated_users > 0) {
      rep.cold[i].precision = sums_cold[i].precision / static_cast<Real>(rep.cold_evaluated_users);
      rep.cold[i].recall = sums_cold[i].recall / static_cast<Real>(rep.cold_evaluated_users);
      rep.cold[i].ndcg = sums_cold[i].ndcg / static_cast<Real>(rep.cold_evaluated_users);
    }
  }
  return rep;
}

}  // namespace clsrec
