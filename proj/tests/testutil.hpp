#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "clsrec/dataset.hpp"
#include "clsrec/types.hpp"

namespace clsrec::testutil {

// 6 users / 8 items / 4 friendships, every user with three training items.
inline Dataset toy_dataset() {
  Dataset ds;
  ds.num_users = 6;
  ds.num_items = 8;
  for (std::int64_t u = 0; u < 6; ++u) ds.user_raw_ids.push_back(u);
  for (std::int64_t i = 0; i < 8; ++i) ds.item_raw_ids.push_back(i);

  ds.train = {{0, 0}, {0, 2}, {0, 5}, {1, 1}, {1, 3}, {1, 6}, {2, 2}, {2, 4}, {2, 7},
              {3, 3}, {3, 5}, {3, 0}, {4, 4}, {4, 6}, {4, 1}, {5, 5}, {5, 7}, {5, 2}};
  ds.val = {{1, 4}, {3, 6}};
  ds.test = {{0, 1}, {2, 0}, {4, 3}, {5, 0}};
  ds.social_edges = {{0, 1}, {1, 2}, {2, 5}, {3, 4}};
  validate_dataset(ds);
  return ds;
}

inline Mat dense(const SpMat& s) {
  Mat out = Mat::Zero(s.rows(), s.cols());
  for (int k = 0; k < s.outerSize(); ++k)
    for (SpMat::InnerIterator it(s, k); it; ++it) out(it.row(), it.col()) = it.value();
  return out;
}

inline SpMat sparse_from_dense(const Mat& d) {
  std::vector<Eigen::Triplet<Real>> tri;
  for (Index i = 0; i < d.rows(); ++i)
    for (Index j = 0; j < d.cols(); ++j)
      if (d(i, j) != 0.0) tri.emplace_back(static_cast<int>(i), static_cast<int>(j), d(i, j));
  SpMat s(d.rows(), d.cols());
  s.setFromTriplets(tri.begin(), tri.end());
  return s;
}

inline SpMat random_binary_bipartite(Index rows, Index cols, Real density, Rng& rng) {
  Mat d = Mat::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (rng.uniform() < density) d(i, j) = 1.0;
  return sparse_from_dense(d);
}

inline SpMat random_binary_social(Index n, Real density, Rng& rng) {
  Mat d = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (rng.uniform() < density) d(i, j) = d(j, i) = 1.0;
  return sparse_from_dense(d);
}

// Synthetic dataset with group structure: users mostly interact with their
// group's items and befriend their group's members, so the social graph
// genuinely carries preference signal. Written in the HetRec file layout so
// the loaders and the CLI can ingest it. Raw ids are offset to exercise the
// id maps.
inline void write_synth_lastfm(const std::string& dir, std::uint64_t seed) {
  const int groups = 4, users_per_group = 15, items_per_group = 30;
  Rng rng(seed);
  std::ofstream ua(dir + "/user_artists.dat");
  std::ofstream uf(dir + "/user_friends.dat");
  ua << "userID\tartistID\tweight\n";
  uf << "userID\tfriendID\n";

  auto raw_user = [](int u) { return 100 + u; };
  auto raw_item = [](int i) { return 1000 + i; };

  for (int g = 0; g < groups; ++g) {
    for (int k = 0; k < users_per_group; ++k) {
      int u = g * users_per_group + k;
      const bool cold = (k >= users_per_group - 5);
      const int own = cold ? 3 : 12;
      const int other = cold ? 1 : 2;
      std::set<int> items;
      while (static_cast<int>(items.size()) < own)
        items.insert(g * items_per_group + static_cast<int>(rng.below(items_per_group)));
      while (static_cast<int>(items.size()) < own + other)
        items.insert(static_cast<int>(rng.below(groups * items_per_group)));
      for (int item : items)
        ua << raw_user(u) << "\t" << raw_item(item) << "\t" << (1 + rng.below(500)) << "\n";
    }
  }
  const int total_users = groups * users_per_group;
  for (int a = 0; a < total_users; ++a) {
    for (int b = a + 1; b < total_users; ++b) {
      const bool same_group = (a / users_per_group) == (b / users_per_group);
      const Real p = same_group ? 0.30 : 0.01;
      if (rng.uniform() < p) uf << raw_user(a) << "\t" << raw_user(b) << "\n";
    }
  }
}

}  // namespace clsrec::testutil
