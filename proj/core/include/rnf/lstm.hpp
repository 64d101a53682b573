#pragma once

#include <array>
#include <span>
#include <string>

#include "rnf/params.hpp"
#include "rnf/rng.hpp"
#include "rnf/tape.hpp"

namespace rnf {

/// Gate index order used throughout: input, forget, output, candidate.
enum LstmGate : std::size_t { kGateInput = 0, kGateForget = 1, kGateOutput = 2, kGateCandidate = 3 };

/// Handles of one LSTM cell's parameters inside a ParamStore: per gate an
/// input weight matrix (J x input_dim), a recurrent weight matrix (J x J)
/// and a bias vector (J). The candidate and the cell-output nonlinearity
/// are ELU; the three gates stay sigmoid.
struct LstmParamIds {
  std::array<ParamId, 4> W{};
  std::array<ParamId, 4> R{};
  std::array<ParamId, 4> b{};
  std::size_t input_dim = 0;
  std::size_t state_size = 0;
};

/// Memory carried between steps: cell output s and cell state c, both length J.
struct LstmState {
  std::vector<double> s;
  std::vector<double> c;
};

/// Weights uniform in +-1/sqrt(J); forget-gate bias 1, other biases 0.
LstmParamIds make_lstm(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                       std::size_t state_size, Rng& rng);

LstmState lstm_init_state(std::size_t state_size);

LstmState lstm_step(const ParamStore& store, const LstmParamIds& params, const LstmState& prev,
                    std::span<const double> input);

/// Inverted dropout over both s and c: kept elements are scaled by
/// 1/(1-rate); rate 1 zeroes the state. Training-time only.
LstmState memory_dropout(const LstmState& state, double rate, Rng& rng);

/// A dropout mask sampled once and reused for every step of a segment.
/// Entries are 0 or 1/(1-rate).
struct DropoutMask {
  std::vector<double> s;
  std::vector<double> c;
};

DropoutMask make_dropout_mask(std::size_t state_size, double rate, Rng& rng);
LstmState apply_dropout_mask(const LstmState& state, const DropoutMask& mask);

// --- taped counterparts used when building training graphs ---

struct BoundLstm {
  std::array<VarId, 4> W{};
  std::array<VarId, 4> R{};
  std::array<VarId, 4> b{};
};

struct TapedLstmState {
  VarId s = 0;
  VarId c = 0;
};

BoundLstm bind_lstm(Tape& tape, const ParamStore& store, const LstmParamIds& params);

TapedLstmState taped_lstm_init(Tape& tape, std::size_t state_size);

TapedLstmState taped_lstm_step(Tape& tape, const BoundLstm& cell, const TapedLstmState& prev,
                               VarId input);

TapedLstmState taped_dropout(Tape& tape, const TapedLstmState& state, const DropoutMask& mask);

}  // namespace rnf
