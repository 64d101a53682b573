#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rnf/tensor.hpp"

namespace rnf {

using ParamId = std::uint32_t;

/// Owns every learnable tensor of a model, addressed by a stable dense id.
/// Names are unique and used for checkpointing and diagnostics.
class ParamStore {
 public:
  ParamId add(std::string name, Tensor value);

  std::size_t count() const { return values_.size(); }
  std::size_t total_elements() const;

  const std::string& name(ParamId id) const { return names_.at(id); }
  Tensor& value(ParamId id) { return values_.at(id); }
  const Tensor& value(ParamId id) const { return values_.at(id); }

  std::optional<ParamId> find(std::string_view name) const;

 private:
  std::vector<Tensor> values_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, ParamId> index_;
};

/// One gradient slot per parameter id; slots start as zero tensors so
/// parameters never reached by a backward pass read as zero gradients.
struct Gradients {
  std::vector<Tensor> slots;

  static Gradients zeros_for(const ParamStore& store);

  Tensor& operator[](ParamId id) { return slots[id]; }
  const Tensor& operator[](ParamId id) const { return slots[id]; }

  void accumulate(const Gradients& other);
  void scale(double k);
  double global_norm() const;
  bool all_finite() const;
};

}  // namespace rnf
