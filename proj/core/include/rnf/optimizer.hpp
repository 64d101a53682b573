#pragma once

#include "rnf/params.hpp"

namespace rnf {

/// Adam accumulators, one pair of moment tensors per parameter.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState init(const ParamStore& store);
};

/// Scales the whole gradient down to `max_norm` when its global L2 norm
/// exceeds it. Returns the pre-clip norm; throws on non-finite gradients.
double clip_global_norm(Gradients& grads, double max_norm);

/// Global-norm clip followed by a bias-corrected Adam update.
void optimize_step(ParamStore& params, Gradients grads, AdamState& adam, double learning_rate,
                   double max_norm);

}  // namespace rnf
