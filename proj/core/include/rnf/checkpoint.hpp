#pragma once

#include <filesystem>
#include <optional>

#include "rnf/dataset.hpp"
#include "rnf/model.hpp"

namespace rnf {

/// Checkpoints are versioned JSON documents: format version, variant,
/// dimensions, every named parameter tensor with its shape and values as
/// decimal text at full double round-trip precision, plus the
/// normalisation constants attached to the training data. Byte-identical
/// across save/load/save.
void save_checkpoint(const RnfModel& model, const std::optional<NormStats>& norm,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  RnfModel model;
  std::optional<NormStats> norm;
};

/// Reconstructs the model and verifies every stored tensor against the
/// architecture's expected name and shape; mismatches name the offending
/// tensor.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rnf
