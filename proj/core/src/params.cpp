#include "rnf/params.hpp"

#include <cmath>
#include <stdexcept>

namespace rnf {

ParamId ParamStore::add(std::string name, Tensor value) {
  if (index_.contains(name)) {
    throw std::invalid_argument("ParamStore: duplicate parameter name '" + name + "'");
  }
  const ParamId id = static_cast<ParamId>(values_.size());
  index_.emplace(name, id);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return id;
}

std::size_t ParamStore::total_elements() const {
  std::size_t n = 0;
  for (const Tensor& t : values_) n += t.size();
  return n;
}

std::optional<ParamId> ParamStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Gradients Gradients::zeros_for(const ParamStore& store) {
  Gradients g;
  g.slots.reserve(store.count());
  for (ParamId id = 0; id < store.count(); ++id) {
    g.slots.push_back(Tensor::zeros_like(store.value(id)));
  }
  return g;
}

void Gradients::accumulate(const Gradients& other) {
  if (other.slots.size() != slots.size()) {
    throw std::invalid_argument("Gradients::accumulate: mismatched stores");
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto dst = slots[i].values();
    auto src = other.slots[i].values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

void Gradients::scale(double k) {
  for (Tensor& t : slots) {
    for (double& v : t.values()) v *= k;
  }
}

double Gradients::global_norm() const {
  double sq = 0.0;
  for (const Tensor& t : slots) {
    for (double v : t.values()) sq += v * v;
  }
  return std::sqrt(sq);
}

bool Gradients::all_finite() const {
  for (const Tensor& t : slots) {
    if (!t.all_finite()) return false;
  }
  return true;
}

}  // namespace rnf
