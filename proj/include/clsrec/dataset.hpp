#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clsrec/types.hpp"

namespace clsrec {

using IdPair = std::pair<std::uint32_t, std::uint32_t>;  // (user, item) dense ids

enum class Split { Train, Val, Test };

Split parse_split(const std::string& name);
const char* split_name(Split s);

struct Dataset {
  std::int64_t num_users = 0;
  std::int64_t num_items = 0;
  std::vector<IdPair> train, val, test;
  std::vector<IdPair> social_edges;  // canonical (low, high), deduplicated
  std::vector<std::int64_t> user_raw_ids;  // dense id -> raw id, ascending
  std::vector<std::int64_t> item_raw_ids;

  const std::vector<IdPair>& split(Split s) const {
    switch (s) {
      case Split::Train: return train;
      case Split::Val: return val;
      default: return test;
    }
  }

  std::size_t num_interactions() const { return train.size() + val.size() + test.size(); }

  SpMat train_matrix() const;   // M x N binary
  SpMat social_matrix() const;  // M x M binary symmetric, empty diagonal

  // per-user sorted item lists for one split
  std::vector<std::vector<std::uint32_t>> items_by_user(Split s) const;
  std::vector<std::int64_t> train_degrees() const;
  std::vector<std::int64_t> social_degrees() const;

  std::string fingerprint() const;  // content hash over ids, splits, edges
};

// HetRec LastFM dump: user_artists.dat (userID, artistID, weight) and
// user_friends.dat (userID, friendID), tab separated with a header line.
// Every (user, artist) row counts as one implicit positive.
Dataset load_lastfm(const std::string& dir, std::uint64_t split_seed);

// Ciao: ratings.txt rows (userID, productID, ..., rating) and trust.txt rows
// (truster, trustee). Ratings >= positive_threshold become positives; trust
// edges are symmetrized.
Dataset load_ciao(const std::string& dir, std::uint64_t split_seed, Real positive_threshold = 0.0);

// Uniform shuffle under seed; first 80% provisional train, last 20% test;
// a seeded 10% of the provisional train becomes validation (72/8/20 overall).
void split_interactions(Dataset& ds, std::vector<IdPair> pairs, std::uint64_t seed);

// Checks dedup across splits, id validity and social edge canonicality;
// throws listing offending entries.
void validate_dataset(const Dataset& ds);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);
std::string dataset_summary_json(const Dataset& ds);  // users/items/splits/fingerprint

}  // namespace clsrec
