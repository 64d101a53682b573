#include "rnf/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "rnf/activations.hpp"

namespace rnf {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  }
}

}  // namespace

VarId Tape::push(Node node, const char* op_name) {
  if (!node.value.all_finite()) {
    throw std::runtime_error(std::string(op_name) + ": non-finite result");
  }
  nodes_.push_back(std::move(node));
  return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::constant(Tensor value) {
  return push({Op::Constant, 0, 0, 0.0, 0, std::move(value)}, "constant");
}

VarId Tape::param(const ParamStore& store, ParamId id) {
  for (const auto& [pid, vid] : bound_params_) {
    if (pid == id) return vid;
  }
  VarId vid = push({Op::Param, 0, 0, 0.0, id, store.value(id)}, "param");
  bound_params_.emplace_back(id, vid);
  return vid;
}

VarId Tape::matmul(VarId a, VarId b) {
  const Tensor& A = operand(a);
  const Tensor& B = operand(b);
  require(A.rank() == 2, "matmul: left operand must be rank-2, got " + shape_str(A.shape()));
  if (B.rank() == 1) {
    require(A.cols() == B.size(), "matmul: inner dims " + shape_str(A.shape()) + " x " +
                                      shape_str(B.shape()));
    Tensor out({A.rows()});
    for (std::size_t i = 0; i < A.rows(); ++i) {
      double acc = 0.0;
      const double* row = A.data() + i * A.cols();
      for (std::size_t k = 0; k < A.cols(); ++k) acc += row[k] * B[k];
      out[i] = acc;
    }
    return push({Op::MatMul, a, b, 0.0, 0, std::move(out)}, "matmul");
  }
  require(B.rank() == 2 && A.cols() == B.rows(),
          "matmul: inner dims " + shape_str(A.shape()) + " x " + shape_str(B.shape()));
  Tensor out({A.rows(), B.cols()});
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const double aik = A.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = B.data() + k * B.cols();
      double* orow = out.data() + i * B.cols();
      for (std::size_t j = 0; j < B.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return push({Op::MatMul, a, b, 0.0, 0, std::move(out)}, "matmul");
}

VarId Tape::add(VarId a, VarId b) {
  const Tensor& A = operand(a);
  const Tensor& B = operand(b);
  require_same_shape(A, B, "add");
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] + B[i];
  return push({Op::Add, a, b, 0.0, 0, std::move(out)}, "add");
}

VarId Tape::sub(VarId a, VarId b) {
  const Tensor& A = operand(a);
  const Tensor& B = operand(b);
  require_same_shape(A, B, "sub");
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] - B[i];
  return push({Op::Sub, a, b, 0.0, 0, std::move(out)}, "sub");
}

VarId Tape::hadamard(VarId a, VarId b) {
  const Tensor& A = operand(a);
  const Tensor& B = operand(b);
  require_same_shape(A, B, "hadamard");
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] * B[i];
  return push({Op::Hadamard, a, b, 0.0, 0, std::move(out)}, "hadamard");
}

VarId Tape::div(VarId a, VarId b) {
  const Tensor& A = operand(a);
  const Tensor& B = operand(b);
  require_same_shape(A, B, "div");
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] / B[i];
  return push({Op::Div, a, b, 0.0, 0, std::move(out)}, "div");
}

VarId Tape::concat(VarId a, VarId b) {
  const Tensor& A = operand(a);
  const Tensor& B = operand(b);
  require(A.rank() == 1 && B.rank() == 1, "concat: both operands must be vectors");
  std::vector<double> v;
  v.reserve(A.size() + B.size());
  v.insert(v.end(), A.values().begin(), A.values().end());
  v.insert(v.end(), B.values().begin(), B.values().end());
  return push({Op::Concat, a, b, 0.0, 0, Tensor::vec(std::move(v))}, "concat");
}

VarId Tape::scale(VarId a, double k) {
  const Tensor& A = operand(a);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = k * A[i];
  return push({Op::Scale, a, 0, k, 0, std::move(out)}, "scale");
}

VarId Tape::square(VarId a) {
  const Tensor& A = operand(a);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] * A[i];
  return push({Op::Square, a, 0, 0.0, 0, std::move(out)}, "square");
}

VarId Tape::log(VarId a) {
  const Tensor& A = operand(a);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = std::log(A[i]);
  return push({Op::Log, a, 0, 0.0, 0, std::move(out)}, "log");
}

VarId Tape::sum(VarId a) {
  const Tensor& A = operand(a);
  double acc = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) acc += A[i];
  return push({Op::Sum, a, 0, 0.0, 0, Tensor::scalar(acc)}, "sum");
}

VarId Tape::sigmoid(VarId a) {
  const Tensor& A = operand(a);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = act::sigmoid(A[i]);
  return push({Op::Sigmoid, a, 0, 0.0, 0, std::move(out)}, "sigmoid");
}

VarId Tape::tanh(VarId a) {
  const Tensor& A = operand(a);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = std::tanh(A[i]);
  return push({Op::Tanh, a, 0, 0.0, 0, std::move(out)}, "tanh");
}

VarId Tape::elu(VarId a) {
  const Tensor& A = operand(a);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = act::elu(A[i]);
  return push({Op::Elu, a, 0, 0.0, 0, std::move(out)}, "elu");
}

VarId Tape::softplus(VarId a) {
  const Tensor& A = operand(a);
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = act::softplus(A[i]);
  return push({Op::Softplus, a, 0, 0.0, 0, std::move(out)}, "softplus");
}

VarId Tape::primitive(Op kind, std::span<const VarId> operands, double k) {
  auto unary = [&](VarId (Tape::*fn)(VarId)) {
    require(operands.size() == 1, "primitive: expected one operand");
    return (this->*fn)(operands[0]);
  };
  auto binary = [&](VarId (Tape::*fn)(VarId, VarId)) {
    require(operands.size() == 2, "primitive: expected two operands");
    return (this->*fn)(operands[0], operands[1]);
  };
  switch (kind) {
    case Op::MatMul: return binary(&Tape::matmul);
    case Op::Add: return binary(&Tape::add);
    case Op::Sub: return binary(&Tape::sub);
    case Op::Hadamard: return binary(&Tape::hadamard);
    case Op::Div: return binary(&Tape::div);
    case Op::Concat: return binary(&Tape::concat);
    case Op::Scale:
      require(operands.size() == 1, "primitive: expected one operand");
      return scale(operands[0], k);
    case Op::Square: return unary(&Tape::square);
    case Op::Log: return unary(&Tape::log);
    case Op::Sum: return unary(&Tape::sum);
    case Op::Sigmoid: return unary(&Tape::sigmoid);
    case Op::Tanh: return unary(&Tape::tanh);
    case Op::Elu: return unary(&Tape::elu);
    case Op::Softplus: return unary(&Tape::softplus);
    case Op::Constant:
    case Op::Param:
      break;
  }
  throw std::invalid_argument("primitive: kind is not a computable primitive");
}

Gradients Tape::backward(VarId root, const ParamStore& store) const {
  if (root >= nodes_.size()) throw std::invalid_argument("backward: root not on tape");
  if (nodes_[root].value.size() != 1) {
    throw std::invalid_argument("backward: root must be scalar, got shape " +
                                shape_str(nodes_[root].value.shape()));
  }

  // Adjoints are allocated lazily; an empty tensor stands for zero.
  std::vector<Tensor> adj(nodes_.size());
  auto bump = [&](VarId id) -> Tensor& {
    if (adj[id].size() == 0) adj[id] = Tensor::zeros_like(nodes_[id].value);
    return adj[id];
  };
  bump(root)[0] = 1.0;

  for (VarId id = root + 1; id-- > 0;) {
    if (adj[id].size() == 0) continue;  // unreached
    const Node& n = nodes_[id];
    const Tensor& g = adj[id];
    switch (n.op) {
      case Op::Constant:
      case Op::Param:
        break;
      case Op::MatMul: {
        const Tensor& A = nodes_[n.a].value;
        const Tensor& B = nodes_[n.b].value;
        Tensor& ga = bump(n.a);
        Tensor& gb = bump(n.b);
        if (B.rank() == 1) {
          // y = A x:  dA = g x^T, dx = A^T g
          for (std::size_t i = 0; i < A.rows(); ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            double* garow = ga.data() + i * A.cols();
            const double* arow = A.data() + i * A.cols();
            for (std::size_t k = 0; k < A.cols(); ++k) {
              garow[k] += gi * B[k];
              gb[k] += gi * arow[k];
            }
          }
        } else {
          for (std::size_t i = 0; i < A.rows(); ++i) {
            for (std::size_t j = 0; j < B.cols(); ++j) {
              const double gij = g[i * B.cols() + j];
              if (gij == 0.0) continue;
              for (std::size_t k = 0; k < A.cols(); ++k) {
                ga[i * A.cols() + k] += gij * B[k * B.cols() + j];
                gb[k * B.cols() + j] += gij * A[i * A.cols() + k];
              }
            }
          }
        }
        break;
      }
      case Op::Add: {
        Tensor& ga = bump(n.a);
        Tensor& gb = bump(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::Sub: {
        Tensor& ga = bump(n.a);
        Tensor& gb = bump(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::Hadamard: {
        const Tensor& A = nodes_[n.a].value;
        const Tensor& B = nodes_[n.b].value;
        Tensor& ga = bump(n.a);
        Tensor& gb = bump(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * B[i];
          gb[i] += g[i] * A[i];
        }
        break;
      }
      case Op::Div: {
        const Tensor& B = nodes_[n.b].value;
        Tensor& ga = bump(n.a);
        Tensor& gb = bump(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] / B[i];
          gb[i] -= g[i] * n.value[i] / B[i];
        }
        break;
      }
      case Op::Concat: {
        const std::size_t na = nodes_[n.a].value.size();
        Tensor& ga = bump(n.a);
        Tensor& gb = bump(n.b);
        for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
        for (std::size_t i = na; i < g.size(); ++i) gb[i - na] += g[i];
        break;
      }
      case Op::Scale: {
        Tensor& ga = bump(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += n.k * g[i];
        break;
      }
      case Op::Square: {
        const Tensor& A = nodes_[n.a].value;
        Tensor& ga = bump(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * A[i] * g[i];
        break;
      }
      case Op::Log: {
        const Tensor& A = nodes_[n.a].value;
        Tensor& ga = bump(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / A[i];
        break;
      }
      case Op::Sum: {
        Tensor& ga = bump(n.a);
        const double g0 = g[0];
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g0;
        break;
      }
      case Op::Sigmoid: {
        Tensor& ga = bump(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double s = n.value[i];
          ga[i] += g[i] * s * (1.0 - s);
        }
        break;
      }
      case Op::Tanh: {
        Tensor& ga = bump(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double t = n.value[i];
          ga[i] += g[i] * (1.0 - t * t);
        }
        break;
      }
      case Op::Elu: {
        const Tensor& A = nodes_[n.a].value;
        Tensor& ga = bump(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * act::elu_grad_from_value(A[i], n.value[i]);
        }
        break;
      }
      case Op::Softplus: {
        const Tensor& A = nodes_[n.a].value;
        Tensor& ga = bump(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * act::sigmoid(A[i]);
        break;
      }
    }
  }

  Gradients grads = Gradients::zeros_for(store);
  for (const auto& [pid, vid] : bound_params_) {
    if (adj[vid].size() != 0) grads[pid] = std::move(adj[vid]);
  }
  return grads;
}

}  // namespace rnf
