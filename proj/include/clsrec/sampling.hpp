#pragma once

#include <vector>

#include "clsrec/dataset.hpp"
#include "clsrec/types.hpp"

namespace clsrec {

struct BprTriple {
  Index user;
  Index pos;
  Index neg;
};

// Uniform BPR triple sampling over training interactions: user uniform over
// users with at least one training item, positive uniform over the user's
// items, negative rejection-sampled outside them. Users who interacted with
// every item cannot yield a negative and are excluded (warned once).
class TripleSampler {
 public:
  explicit TripleSampler(const Dataset& ds);

  std::vector<BprTriple> sample(std::size_t batch, Rng& rng) const;
  const std::vector<Index>& eligible_users() const { return eligible_; }

 private:
  Index num_items_;
  std::vector<std::vector<std::uint32_t>> train_items_;  // sorted per user
  std::vector<Index> eligible_;
};

}  // namespace clsrec
