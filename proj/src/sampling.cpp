#include "clsrec/sampling.hpp"

#include <algorithm>
#include <iostream>

namespace clsrec {

TripleSampler::TripleSampler(const Dataset& ds)
    : num_items_(ds.num_items), train_items_(ds.items_by_user(Split::Train)) {
  std::size_t saturated = 0;
  for (Index u = 0; u < ds.num_users; ++u) {
    const auto& items = train_items_[static_cast<std::size_t>(u)];
    if (items.empty()) continue;
    if (static_cast<Index>(items.size()) >= num_items_) {
      ++saturated;  // no negative item exists for this user
      continue;
    }
    eligible_.push_back(u);
  }
  if (saturated > 0)
    std::cerr << "warning: excluded " << saturated
              << " user(s) with interactions on every item from BPR sampling\n";
  if (eligible_.empty())
    throw Error(ErrorKind::Data, "no users eligible for BPR sampling (empty training split?)");
}

std::vector<BprTriple> TripleSampler::sample(std::size_t batch, Rng& rng) const {
  std::vector<BprTriple> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    Index u = eligible_[rng.below(eligible_.size())];
    const auto& items = train_items_[static_cast<std::size_t>(u)];
    Index pos = items[rng.below(items.size())];
    Index neg;
    for (;;) {
      neg = static_cast<Index>(rng.below(static_cast<std::uint64_t>(num_items_)));
      if (!std::binary_search(items.begin(), items.end(), static_cast<std::uint32_t>(neg))) break;
    }
    out.push_back({u, pos, neg});
  }
  return out;
}

}  // namespace clsrec
