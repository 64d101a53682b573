#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rnf/params.hpp"
#include "rnf/tensor.hpp"

namespace rnf {

using VarId = std::uint32_t;

enum class Op : std::uint8_t {
  Constant,
  Param,
  MatMul,
  Add,
  Sub,
  Hadamard,
  Div,
  Concat,
  Scale,
  Square,
  Log,
  Sum,
  Sigmoid,
  Tanh,
  Elu,
  Softplus,
};

/// Define-by-run reverse-mode tape. A forward pass appends nodes in
/// topological order; backward() replays them once in reverse and fills a
/// gradient slot for every parameter bound via param() (zeros when a
/// parameter is not reachable from the root).
///
/// Every primitive validates operand shapes and rejects non-finite results
/// immediately, so a NaN can never propagate silently through a sequence
/// model unroll. Tapes are single-threaded; run one tape per thread.
class Tape {
 public:
  VarId constant(Tensor value);
  VarId constant_scalar(double v) { return constant(Tensor::scalar(v)); }

  /// Copies the parameter value onto the tape and registers it for backward().
  /// Binding the same parameter twice returns the original node.
  VarId param(const ParamStore& store, ParamId id);

  const Tensor& value(VarId id) const { return nodes_[id].value; }
  std::size_t node_count() const { return nodes_.size(); }

  // Primitives. matmul accepts (m,k)x(k,n) and (m,k)x(k) operands;
  // elementwise ops require identical shapes; concat joins two vectors.
  VarId matmul(VarId a, VarId b);
  VarId add(VarId a, VarId b);
  VarId sub(VarId a, VarId b);
  VarId hadamard(VarId a, VarId b);
  VarId div(VarId a, VarId b);
  VarId concat(VarId a, VarId b);
  VarId scale(VarId a, double k);
  VarId square(VarId a);
  VarId log(VarId a);
  VarId sum(VarId a);
  VarId sigmoid(VarId a);
  VarId tanh(VarId a);
  VarId elu(VarId a);
  VarId softplus(VarId a);

  /// Generic dispatcher over the primitive set; unary/binary arity is
  /// checked against the kind.
  VarId primitive(Op kind, std::span<const VarId> operands, double k = 0.0);

  /// Reverse pass from a scalar root. Returns one gradient per parameter in
  /// the store, in parameter-id order.
  Gradients backward(VarId root, const ParamStore& store) const;

 private:
  struct Node {
    Op op;
    VarId a = 0;
    VarId b = 0;
    double k = 0.0;
    ParamId param = 0;
    Tensor value;
  };

  VarId push(Node node, const char* op_name);
  const Tensor& operand(VarId id) const { return nodes_[id].value; }

  std::vector<Node> nodes_;
  std::vector<std::pair<ParamId, VarId>> bound_params_;
};

}  // namespace rnf
