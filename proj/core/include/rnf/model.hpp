#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rnf/lstm.hpp"
#include "rnf/params.hpp"
#include "rnf/rng.hpp"

namespace rnf {

enum class Variant { Rnf, VrnfKf, VrnfNn };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);
bool is_variational(Variant v);

enum class ObservationFamily { Gaussian, Bernoulli };

/// The three recurrent encoders. The propagation cell has no exogenous
/// signal, so it is fed a constant scalar 1 and evolves purely through its
/// recurrent state; the input-dynamics cell consumes u_t and the
/// error-correction cell consumes y_t.
struct EncoderStack {
  LstmParamIds propagation;       // input dim 1
  LstmParamIds input_dynamics;    // input dim I
  LstmParamIds error_correction;  // input dim O
  std::size_t state_size = 0;
  std::size_t input_dim = 0;
  std::size_t obs_dim = 0;
};

/// Affine mean head plus softplus deviation head over an encoder output.
struct VariationalHeadIds {
  ParamId W_mean = 0, b_mean = 0;
  ParamId W_sigma = 0, b_sigma = 0;
};

/// Shared emission decoder: one ELU hidden layer of width J feeding either
/// a Gaussian head (mean and softplus deviation read the same hidden
/// layer) or a Bernoulli logit head.
struct DecoderIds {
  ObservationFamily family = ObservationFamily::Gaussian;
  ParamId W_hidden = 0, b_hidden = 0;
  ParamId W_mean = 0, b_mean = 0;
  ParamId W_sigma = 0, b_sigma = 0;  // Gaussian only
  ParamId W_logit = 0, b_logit = 0;  // Bernoulli only
};

struct KfPriorIds {
  ParamId raw_transition = 0;   // a  (softplus, length J)
  ParamId drift = 0;            // c' (free, length J)
  ParamId raw_noise_prop = 0;   // q' (softplus, length J)
  ParamId input_matrix = 0;     // B  (free, J x I)
  ParamId raw_noise_input = 0;  // q  (softplus, length J)
  ParamId raw_gain_keep = 0;    // k' (softplus, length J)
  ParamId obs_matrix = 0;       // H' (free, J x O)
};

struct MlpIds {
  ParamId W1 = 0, b1 = 0;
  ParamId W2 = 0, b2 = 0;
};

struct NnPriorIds {
  MlpIds prop_mean, prop_var;
  MlpIds input_mean, input_var;
  MlpIds corr_mean, corr_var;
};

/// All learnable state of one model plus its dimension tags.
struct RnfModel {
  Variant variant = Variant::Rnf;
  ObservationFamily family = ObservationFamily::Gaussian;
  std::size_t state_size = 0;  // J
  std::size_t input_dim = 0;   // I
  std::size_t obs_dim = 0;     // O
  ParamStore params;
  EncoderStack encoders;
  DecoderIds decoder;
  std::optional<VariationalHeadIds> head;     // variational variants only
  std::optional<KfPriorIds> kf_prior;         // VrnfKf
  std::optional<NnPriorIds> nn_prior;         // VrnfNn
};

RnfModel make_model(Variant variant, std::size_t state_size, std::size_t input_dim,
                    std::size_t obs_dim, std::uint64_t seed,
                    ObservationFamily family = ObservationFamily::Gaussian);

/// Per-step belief: the memory of each encoder stage that ran plus flags
/// saying which ones did. The terminal memory (error correction when an
/// observation arrived, else input dynamics, else propagation) seeds the
/// next step's propagation.
struct BeliefState {
  LstmState propagation;
  LstmState input_dynamics;
  LstmState error_correction;
  bool has_input_stage = false;
  bool has_correction_stage = false;

  const LstmState& terminal() const {
    if (has_correction_stage) return error_correction;
    if (has_input_stage) return input_dynamics;
    return propagation;
  }
};

BeliefState initial_belief(std::size_t state_size);

LstmState propagate(const ParamStore& store, const EncoderStack& enc, const BeliefState& prev);
LstmState apply_input(const ParamStore& store, const EncoderStack& enc, const LstmState& prop_state,
                      std::span<const double> input);
LstmState correct(const ParamStore& store, const EncoderStack& enc, const LstmState& latest_state,
                  std::span<const double> observation);

struct LatentStats {
  std::vector<double> mean;
  std::vector<double> sigma;  // strictly positive (softplus)
};

LatentStats latent_stats(const ParamStore& store, const VariationalHeadIds& head,
                         std::span<const double> encoder_output);

/// Reparameterised draw x = mean + sigma .* noise.
std::vector<double> draw_latent(const LatentStats& stats, std::span<const double> noise);

/// Decoder input selection: the encoder output itself for the standard
/// variant, the latent sample for variational ones.
std::span<const double> select_z(Variant variant, std::span<const double> encoder_output,
                                 const std::vector<double>* latent_sample);

struct GaussianPrediction {
  std::vector<double> mean;
  std::vector<double> sigma;  // per-dimension deviation, strictly positive
};

GaussianPrediction emit_gaussian(const ParamStore& store, const DecoderIds& dec,
                                 std::span<const double> z);
std::vector<double> emit_bernoulli(const ParamStore& store, const DecoderIds& dec,
                                   std::span<const double> z);

// --- taped counterparts ---

struct BoundDecoder {
  VarId W_hidden = 0, b_hidden = 0;
  VarId W_mean = 0, b_mean = 0;
  VarId W_sigma = 0, b_sigma = 0;
};

struct BoundHead {
  VarId W_mean = 0, b_mean = 0;
  VarId W_sigma = 0, b_sigma = 0;
};

BoundDecoder bind_decoder(Tape& tape, const ParamStore& store, const DecoderIds& dec);
BoundHead bind_head(Tape& tape, const ParamStore& store, const VariationalHeadIds& head);

struct TapedGaussian {
  VarId mean = 0;
  VarId sigma = 0;
};

TapedGaussian taped_emit_gaussian(Tape& tape, const BoundDecoder& dec, VarId z);
TapedGaussian taped_latent_stats(Tape& tape, const BoundHead& head, VarId encoder_output);
VarId taped_draw_latent(Tape& tape, const TapedGaussian& stats, VarId noise);

}  // namespace rnf
