#pragma once

#include <string>
#include <vector>

#include "clsrec/dataset.hpp"
#include "clsrec/types.hpp"

namespace clsrec {

// Top-k item ids by score, excluded items removed before ranking, ties broken
// by ascending item id. If fewer than k items remain the list is truncated
// (callers may warn). `exclude` must be sorted.
std::vector<Index> rank_topk(Eigen::Ref<const Vec> scores,
                             const std::vector<std::uint32_t>& exclude, int k);

struct KMetrics {
  Real precision = 0.0;
  Real recall = 0.0;
  Real ndcg = 0.0;
};

// Binary gains; DCG discount 1/log2(rank+1); IDCG over min(k, |truth|) ideal
// hits. `truth` must be sorted and non-empty.
KMetrics metrics_at_k(const std::vector<Index>& topk, const std::vector<std::uint32_t>& truth,
                      int k);

// Users whose training interaction count is strictly below the threshold.
std::vector<bool> cold_user_mask(const Dataset& ds, int threshold);

struct MetricsRow {
  int k = 0;
  Real precision = 0.0, recall = 0.0, ndcg = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> all, cold;
  std::size_t evaluated_users = 0;
  std::size_t cold_evaluated_users = 0;
  std::size_t skipped_users = 0;  // empty ground truth in the split

  Real recall_at(int k) const;
  Real precision_at(int k, bool cold_slice) const;
  std::string to_json() const;
  std::string to_tsv() const;  // columns: metric, K, all_users, cold_users
};

// Ranks every user with non-empty ground truth in `split` over the full item
// set minus the user's training items; averages per-user metrics. The cold
// slice is computed from the identical rankings.
MetricsReport evaluate_embeddings(const Mat& user_emb, const Mat& item_emb, const Dataset& ds,
                                  Split split, const std::vector<int>& ks, int cold_threshold);

}  // namespace clsrec
