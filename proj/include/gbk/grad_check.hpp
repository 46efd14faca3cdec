#pragma once

#include <functional>
#include <vector>

#include "gbk/tensor.hpp"

namespace gbk {

/// Scalar loss as a pure function of a parameter list.
using LossFn = std::function<double(const std::vector<Tensor>&)>;

/// Central-difference gradient verification. Perturbs every coordinate of
/// every parameter by +-h, recomputes f, and returns
///   max over coordinates of |analytic - (f+ - f-)/(2h)| / max(1, |analytic|).
/// The function is evaluated 2 * (#coordinates) times; keep the instances
/// small. h must lie in [1e-6, 1e-4]; non-finite f evaluations throw.
double finite_difference_check(const LossFn& f, std::vector<Tensor> params,
                               const std::vector<Tensor>& analytic_grads,
                               double h = 1e-5);

}  // namespace gbk
