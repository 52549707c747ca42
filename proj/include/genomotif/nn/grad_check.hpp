#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "genomotif/nn/tensor.hpp"

namespace genomotif::nn {

/// A tensor to perturb and the analytic gradient of the loss with respect to it.
struct GradPair {
  std::string name;
  Tensor<double>* value;
  Tensor<double> analytic;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst;  // "name[index]"
  Index checked = 0;

  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

/// Central differences, one element at a time. `loss` must be a pure function of the
/// current tensor values.
template <typename LossFn>
GradCheckResult grad_check(LossFn&& loss, std::vector<GradPair>& pairs, double step = 1e-5) {
  GradCheckResult result;
  for (auto& pair : pairs) {
    auto& values = pair.value->values();
    require_shape(pair.analytic, pair.value->shape(), "grad_check analytic gradient");
    for (Index i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      // Divide by the step actually represented, not the nominal 2h.
      const double up = saved + step, down = saved - step;
      values[i] = up;
      const double plus = loss();
      values[i] = down;
      const double minus = loss();
      values[i] = saved;
      const double numeric = (plus - minus) / (up - down);
      const double err = relative_error(pair.analytic[i], numeric);
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst = pair.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

}  // namespace genomotif::nn
