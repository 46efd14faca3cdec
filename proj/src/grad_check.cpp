#include "gbk/grad_check.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gbk {

double finite_difference_check(const LossFn& f, std::vector<Tensor> params,
                               const std::vector<Tensor>& analytic_grads,
                               double h) {
  if (h < 1e-6 || h > 1e-4)
    throw std::invalid_argument("finite_difference_check: h must be in [1e-6, 1e-4]");
  if (analytic_grads.size() != params.size())
    throw std::invalid_argument("finite_difference_check: grad/param count mismatch");

  double max_rel_err = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!analytic_grads[p].same_shape(params[p]))
      throw std::invalid_argument("finite_difference_check: grad shape mismatch at param " +
                                  std::to_string(p));
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double original = params[p].data[i];
      params[p].data[i] = original + h;
      const double f_plus = f(params);
      params[p].data[i] = original - h;
      const double f_minus = f(params);
      params[p].data[i] = original;
      if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
        throw std::runtime_error("finite_difference_check: non-finite loss");
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double analytic = analytic_grads[p].data[i];
      const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
      max_rel_err = std::max(max_rel_err, rel);
    }
  }
  return max_rel_err;
}

}  // namespace gbk
