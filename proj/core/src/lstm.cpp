#include "rnf/lstm.hpp"

#include <cmath>
#include <stdexcept>

#include "rnf/activations.hpp"

namespace rnf {

namespace {

const char* gate_name(std::size_t g) {
  switch (g) {
    case kGateInput: return "i";
    case kGateForget: return "f";
    case kGateOutput: return "o";
    default: return "g";
  }
}

Tensor uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Tensor t({rows, cols});
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

// pre = (W x + R s) + b, accumulated in the same order as the taped graph
// so plain and taped forward passes agree bit for bit.
std::vector<double> gate_preactivation(const ParamStore& store, const LstmParamIds& p,
                                       std::size_t g, const LstmState& prev,
                                       std::span<const double> input) {
  const std::size_t J = p.state_size;
  const Tensor& W = store.value(p.W[g]);
  const Tensor& R = store.value(p.R[g]);
  const Tensor& b = store.value(p.b[g]);
  std::vector<double> wx(J), rs(J), pre(J);
  for (std::size_t i = 0; i < J; ++i) {
    double acc = 0.0;
    const double* row = W.data() + i * p.input_dim;
    for (std::size_t k = 0; k < p.input_dim; ++k) acc += row[k] * input[k];
    wx[i] = acc;
  }
  for (std::size_t i = 0; i < J; ++i) {
    double acc = 0.0;
    const double* row = R.data() + i * J;
    for (std::size_t k = 0; k < J; ++k) acc += row[k] * prev.s[k];
    rs[i] = acc;
  }
  for (std::size_t i = 0; i < J; ++i) pre[i] = (wx[i] + rs[i]) + b[i];
  return pre;
}

}  // namespace

LstmParamIds make_lstm(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                       std::size_t state_size, Rng& rng) {
  if (state_size == 0) throw std::invalid_argument("make_lstm: state size must be >= 1");
  if (input_dim == 0) throw std::invalid_argument("make_lstm: input dim must be >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(state_size));
  LstmParamIds p;
  p.input_dim = input_dim;
  p.state_size = state_size;
  for (std::size_t g = 0; g < 4; ++g) {
    p.W[g] = store.add(prefix + ".W_" + gate_name(g), uniform_matrix(state_size, input_dim, bound, rng));
    p.R[g] = store.add(prefix + ".R_" + gate_name(g), uniform_matrix(state_size, state_size, bound, rng));
    Tensor bias({state_size});
    if (g == kGateForget) {
      for (double& v : bias.values()) v = 1.0;
    }
    p.b[g] = store.add(prefix + ".b_" + gate_name(g), std::move(bias));
  }
  return p;
}

LstmState lstm_init_state(std::size_t state_size) {
  if (state_size == 0) throw std::invalid_argument("lstm_init_state: state size must be >= 1");
  return LstmState{std::vector<double>(state_size, 0.0), std::vector<double>(state_size, 0.0)};
}

LstmState lstm_step(const ParamStore& store, const LstmParamIds& p, const LstmState& prev,
                    std::span<const double> input) {
  const std::size_t J = p.state_size;
  if (input.size() != p.input_dim) {
    throw std::invalid_argument("lstm_step: input size " + std::to_string(input.size()) +
                                " does not match cell input dim " + std::to_string(p.input_dim));
  }
  if (prev.s.size() != J || prev.c.size() != J) {
    throw std::invalid_argument("lstm_step: state size mismatch");
  }

  const auto pre_i = gate_preactivation(store, p, kGateInput, prev, input);
  const auto pre_f = gate_preactivation(store, p, kGateForget, prev, input);
  const auto pre_o = gate_preactivation(store, p, kGateOutput, prev, input);
  const auto pre_g = gate_preactivation(store, p, kGateCandidate, prev, input);

  LstmState next{std::vector<double>(J), std::vector<double>(J)};
  for (std::size_t j = 0; j < J; ++j) {
    const double gi = act::sigmoid(pre_i[j]);
    const double gf = act::sigmoid(pre_f[j]);
    const double go = act::sigmoid(pre_o[j]);
    const double cand = act::elu(pre_g[j]);
    const double c = gf * prev.c[j] + gi * cand;
    next.c[j] = c;
    next.s[j] = go * act::elu(c);
  }
  return next;
}

LstmState memory_dropout(const LstmState& state, double rate, Rng& rng) {
  const DropoutMask mask = make_dropout_mask(state.s.size(), rate, rng);
  return apply_dropout_mask(state, mask);
}

DropoutMask make_dropout_mask(std::size_t state_size, double rate, Rng& rng) {
  if (rate < 0.0 || rate > 1.0) {
    throw std::invalid_argument("dropout rate must be in [0,1], got " + std::to_string(rate));
  }
  DropoutMask mask{std::vector<double>(state_size, 1.0), std::vector<double>(state_size, 1.0)};
  if (rate == 0.0) return mask;
  if (rate == 1.0) {
    std::fill(mask.s.begin(), mask.s.end(), 0.0);
    std::fill(mask.c.begin(), mask.c.end(), 0.0);
    return mask;
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& v : mask.s) v = rng.bernoulli(rate) ? 0.0 : keep_scale;
  for (double& v : mask.c) v = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return mask;
}

LstmState apply_dropout_mask(const LstmState& state, const DropoutMask& mask) {
  LstmState out = state;
  for (std::size_t j = 0; j < out.s.size(); ++j) out.s[j] *= mask.s[j];
  for (std::size_t j = 0; j < out.c.size(); ++j) out.c[j] *= mask.c[j];
  return out;
}

BoundLstm bind_lstm(Tape& tape, const ParamStore& store, const LstmParamIds& params) {
  BoundLstm bound;
  for (std::size_t g = 0; g < 4; ++g) {
    bound.W[g] = tape.param(store, params.W[g]);
    bound.R[g] = tape.param(store, params.R[g]);
    bound.b[g] = tape.param(store, params.b[g]);
  }
  return bound;
}

TapedLstmState taped_lstm_init(Tape& tape, std::size_t state_size) {
  const VarId zero = tape.constant(Tensor({state_size}));
  return TapedLstmState{zero, zero};
}

TapedLstmState taped_lstm_step(Tape& tape, const BoundLstm& cell, const TapedLstmState& prev,
                               VarId input) {
  auto pre = [&](std::size_t g) {
    return tape.add(tape.add(tape.matmul(cell.W[g], input), tape.matmul(cell.R[g], prev.s)),
                    cell.b[g]);
  };
  const VarId gi = tape.sigmoid(pre(kGateInput));
  const VarId gf = tape.sigmoid(pre(kGateForget));
  const VarId go = tape.sigmoid(pre(kGateOutput));
  const VarId cand = tape.elu(pre(kGateCandidate));
  const VarId c = tape.add(tape.hadamard(gf, prev.c), tape.hadamard(gi, cand));
  const VarId s = tape.hadamard(go, tape.elu(c));
  return TapedLstmState{s, c};
}

TapedLstmState taped_dropout(Tape& tape, const TapedLstmState& state, const DropoutMask& mask) {
  const VarId ms = tape.constant(Tensor::vec(std::vector<double>(mask.s)));
  const VarId mc = tape.constant(Tensor::vec(std::vector<double>(mask.c)));
  return TapedLstmState{tape.hadamard(state.s, ms), tape.hadamard(state.c, mc)};
}

}  // namespace rnf
