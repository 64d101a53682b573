#include "rnf/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace rnf {

AdamState AdamState::init(const ParamStore& store) {
  AdamState s;
  s.m.reserve(store.count());
  s.v.reserve(store.count());
  for (ParamId id = 0; id < store.count(); ++id) {
    s.m.push_back(Tensor::zeros_like(store.value(id)));
    s.v.push_back(Tensor::zeros_like(store.value(id)));
  }
  return s;
}

double clip_global_norm(Gradients& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip_global_norm: max_norm must be positive");
  if (!grads.all_finite()) throw std::runtime_error("clip_global_norm: non-finite gradient");
  const double norm = grads.global_norm();
  if (norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

void optimize_step(ParamStore& params, Gradients grads, AdamState& adam, double learning_rate,
                   double max_norm) {
  if (grads.slots.size() != params.count() || adam.m.size() != params.count()) {
    throw std::invalid_argument("optimize_step: gradient/optimiser state size mismatch");
  }
  clip_global_norm(grads, max_norm);

  adam.step += 1;
  const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));

  for (ParamId id = 0; id < params.count(); ++id) {
    auto theta = params.value(id).values();
    auto g = grads[id].values();
    auto m = adam.m[id].values();
    auto v = adam.v[id].values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * g[i];
      v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + adam.epsilon);
    }
  }
}

}  // namespace rnf
