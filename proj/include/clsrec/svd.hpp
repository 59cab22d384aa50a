#pragma once

#include "clsrec/tape.hpp"
#include "clsrec/types.hpp"

namespace clsrec {

struct SvdFactors {
  Mat u;   // M x k, orthonormal columns
  Vec s;   // k singular values, non-increasing
  Mat v;   // N x k, orthonormal columns
  int rank() const { return static_cast<int>(s.size()); }
  bool empty() const { return s.size() == 0; }
};

// Randomized range-finder factorization (Gaussian test matrix, q rounds of
// power iteration with re-orthonormalization, exact SVD of the projected
// matrix, truncation to k). Deterministic given the seed.
SvdFactors truncated_svd(const SpMat& a, int k, int oversampling, int power_iters,
                         std::uint64_t seed);

// Layer propagation over the factored reconstructed view A^S = U S U^T.
// Each layer is computed as U * (S .* (U^T * E)); the M x M matrix is never
// materialized. Factors are constants; differentiable w.r.t. user_emb0.
ad::NodeId propagate_reconstructed(ad::Tape& t, const SvdFactors& f, ad::NodeId user_emb0,
                                   int layers);

}  // namespace clsrec
