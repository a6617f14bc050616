#pragma once

#include "ravnet/ops.hpp"
#include "ravnet/tensor.hpp"

namespace ravnet {

/// Soft Dice similarity with +1 smoothing in numerator and denominator:
/// (2*sum(p*t) + 1) / (sum(p) + sum(t) + 1). Smoothing keeps the empty/empty
/// case defined (score 1) and the result differentiable everywhere.
template <typename T>
Tensor<T> soft_dice(const Tensor<T>& pred, const Tensor<T>& truth) {
  detail::require_same_dims(pred.dims(), truth.dims(), "soft_dice");
  Tensor<T> inter = reduce_sum(mul(pred, truth));
  Tensor<T> num = add_scalar(scale(inter, T(2)), T(1));
  Tensor<T> den = add_scalar(add(reduce_sum(pred), reduce_sum(truth)), T(1));
  return div(num, den);
}

/// dice_loss = 1 - soft_dice. In [0, 1); 0 exactly when pred == truth on
/// binary masks (including the all-zeros pair, where smoothing gives 1/1).
template <typename T>
Tensor<T> dice_loss(const Tensor<T>& pred, const Tensor<T>& truth) {
  return add_scalar(scale(soft_dice(pred, truth), T(-1)), T(1));
}

/// Mean binary cross-entropy, -[t*log(p) + (1-t)*log(1-p)] averaged over all
/// elements. Predictions are clamped to [1e-7, 1-1e-7] before the logs.
template <typename T>
Tensor<T> bce_loss(const Tensor<T>& pred, const Tensor<T>& truth) {
  detail::require_same_dims(pred.dims(), truth.dims(), "bce_loss");
  const T eps = T(1e-7);
  Tensor<T> p = clamp(pred, eps, T(1) - eps);
  Tensor<T> pos = mul(truth, log(p));
  Tensor<T> one_minus_t = add_scalar(scale(truth, T(-1)), T(1));
  Tensor<T> one_minus_p = add_scalar(scale(p, T(-1)), T(1));
  Tensor<T> neg = mul(one_minus_t, log(one_minus_p));
  return scale(reduce_mean(add(pos, neg)), T(-1));
}

}  // namespace ravnet
