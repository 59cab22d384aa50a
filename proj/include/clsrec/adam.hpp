#pragma once

#include <vector>

#include "clsrec/types.hpp"

namespace clsrec {

// Bias-corrected adaptive-moment optimizer. One instance drives a fixed list
// of tensors; slot order must stay constant across steps.
class Adam {
 public:
  explicit Adam(Real lr, Real beta1 = 0.9, Real beta2 = 0.999, Real eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // grads[i] may be null (parameter untouched by the step's loss).
  void step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads);

  int steps_taken() const { return t_; }

 private:
  struct Moments {
    Mat m, v;
  };
  Real lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Moments> state_;
};

}  // namespace clsrec
