#pragma once

#include <vector>

#include "genomotif/nn/layers.hpp"

namespace genomotif::nn {

struct RmsPropConfig {
  double learning_rate = 0.001;
  double rho = 0.9;
  double epsilon = 1e-8;
};

/// v <- rho v + (1 - rho) g^2;  p <- p - lr g / (sqrt(v) + eps)
template <typename Scalar>
void rmsprop_step(Tensor<Scalar>& param, const Tensor<Scalar>& grad, Tensor<Scalar>& v,
                  const RmsPropConfig& cfg) {
  require_shape(grad, param.shape(), "rmsprop gradient");
  require_shape(v, param.shape(), "rmsprop state");
  const auto rho = static_cast<Scalar>(cfg.rho);
  const auto lr = static_cast<Scalar>(cfg.learning_rate);
  const auto eps = static_cast<Scalar>(cfg.epsilon);
  v.values() = rho * v.values() + (Scalar(1) - rho) * grad.values().cwiseAbs2();
  param.values().array() -= lr * grad.values().array() / (v.values().array().sqrt() + eps);
}

template <typename Scalar>
class RmsProp {
 public:
  RmsProp(const ParamList<Scalar>& params, RmsPropConfig cfg) : cfg_(cfg) {
    state_.reserve(params.size());
    for (const auto& p : params) state_.emplace_back(p.value->shape());
  }

  void step(const ParamList<Scalar>& params) {
    if (params.size() != state_.size())
      throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match the parameter list");
    for (std::size_t i = 0; i < params.size(); ++i) rmsprop_step(*params[i].value, *params[i].grad, state_[i], cfg_);
  }

  const RmsPropConfig& config() const { return cfg_; }
  std::vector<Tensor<Scalar>>& state() { return state_; }
  const std::vector<Tensor<Scalar>>& state() const { return state_; }

 private:
  RmsPropConfig cfg_;
  std::vector<Tensor<Scalar>> state_;
};

}  // namespace genomotif::nn
