#pragma once

#include <cstdint>
#include <cstddef>

#include "rnf/model.hpp"

namespace rnf {

/// Everything that shapes a training run. alpha_x / alpha_y weight the
/// propagation and error-correction reconstruction terms next to the
/// input-dynamics term; missing_rate drives encoder skip-training.
struct TrainConfig {
  double alpha_x = 1.0;
  double alpha_y = 1.0;
  double missing_rate = 0.0;   // r in [0,1]
  double dropout = 0.0;        // memory-state dropout rate
  std::size_t state_size = 10; // J
  double learning_rate = 1e-3;
  double max_grad_norm = 1.0;
  std::size_t minibatch = 256;       // segments per optimiser step
  std::size_t segment_length = 50;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;         // epochs without validation improvement
  Variant variant = Variant::Rnf;
  std::size_t train_samples = 1;     // L during training
  std::size_t val_samples = 30;      // L for validation NLL
  std::size_t test_samples = 100;    // L at prediction time
  bool kl_all_stages = false;        // sum stage KLs instead of the deepest stage's
  std::size_t threads = 0;           // 0 = hardware concurrency
  std::uint64_t seed = 1;

  void validate() const;
};

}  // namespace rnf
