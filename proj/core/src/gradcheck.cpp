#include "rnf/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rnf {

namespace {
double evaluate(const std::function<VarId(Tape&)>& build, Tape& tape) {
  const VarId root = build(tape);
  if (tape.value(root).size() != 1) {
    throw std::invalid_argument("gradient_check: loss must be scalar");
  }
  return tape.value(root)[0];
}
}  // namespace

GradCheckReport gradient_check(const std::function<VarId(Tape&)>& build, ParamStore& params,
                               double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("gradient_check: eps must be positive");

  Tape tape;
  const VarId root = build(tape);
  const double base = tape.value(root)[0];
  const Gradients analytic = tape.backward(root, params);

  {
    Tape repeat;
    if (evaluate(build, repeat) != base) {
      throw std::runtime_error("gradient_check: loss is not deterministic under fixed inputs");
    }
  }

  GradCheckReport report;
  for (ParamId id = 0; id < params.count(); ++id) {
    Tensor& value = params.value(id);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + eps;
      Tape plus;
      const double f_plus = evaluate(build, plus);
      value[i] = saved - eps;
      Tape minus;
      const double f_minus = evaluate(build, minus);
      value[i] = saved;

      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double a = analytic[id][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1.0});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = params.name(id);
        report.worst_element = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace rnf
