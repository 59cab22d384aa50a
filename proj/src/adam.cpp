#include "clsrec/adam.hpp"

#include <cmath>

namespace clsrec {

void Adam::step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads) {
  if (params.size() != grads.size())
    throw Error(ErrorKind::Usage, "adam: params/grads size mismatch");
  if (state_.empty()) {
    state_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state_[i].m = Mat::Zero(params[i]->rows(), params[i]->cols());
      state_[i].v = Mat::Zero(params[i]->rows(), params[i]->cols());
    }
  }
  if (state_.size() != params.size())
    throw Error(ErrorKind::Usage, "adam: parameter count changed between steps");

  for (std::size_t i = 0; i < params.size(); ++i)
    if (grads[i] && !grads[i]->allFinite())
      throw Error(ErrorKind::Numeric, "adam: non-finite gradient in tensor slot " +
                                          std::to_string(i) + "; step aborted");

  ++t_;
  const Real bc1 = 1.0 - std::pow(beta1_, t_);
  const Real bc2 = 1.0 - std::pow(beta2_, t_);
  const Real inv_bc1 = 1.0 / bc1;
  const Real inv_sqrt_bc2 = 1.0 / std::sqrt(bc2);
  using ArrayMap = Eigen::Map<Eigen::Array<Real, Eigen::Dynamic, 1>>;
  using ConstArrayMap = Eigen::Map<const Eigen::Array<Real, Eigen::Dynamic, 1>>;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Moments& s = state_[i];
    const Index n = params[i]->size();
    ArrayMap m(s.m.data(), n);
    ArrayMap v(s.v.data(), n);
    ArrayMap p(params[i]->data(), n);
    if (grads[i]) {
      ConstArrayMap g(grads[i]->data(), n);
      m = beta1_ * m + (1.0 - beta1_) * g;
      v = beta2_ * v + (1.0 - beta2_) * g * g;
    } else {
      m *= beta1_;
      v *= beta2_;
    }
    p -= lr_ * (m * inv_bc1) / (v.sqrt() * inv_sqrt_bc2 + eps_);
  }
}

}  // namespace clsrec
