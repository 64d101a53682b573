#pragma once

#include <functional>
#include <string>

#include "rnf/params.hpp"
#include "rnf/tape.hpp"

namespace rnf {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares the tape gradient of a scalar loss against central finite
/// differences, element by element over every parameter in the store.
///
/// `build` must construct the loss on the given tape from the current
/// parameter values and be deterministic: any sampling inside it has to come
/// from a source reseeded per call. Non-determinism is detected by
/// evaluating the base point twice and throws.
///
/// The relative error uses max(|analytic|, |numeric|, 1) as denominator so
/// near-zero gradients are judged on absolute error.
GradCheckReport gradient_check(const std::function<VarId(Tape&)>& build, ParamStore& params,
                               double eps);

}  // namespace rnf
