#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "genomotif/nn/network.hpp"
#include "genomotif/nn/optim.hpp"

namespace genomotif::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingState {
  std::uint64_t model_seed = 0;
  std::uint64_t step = 0;    // optimizer steps taken so far
  std::uint32_t epoch = 0;   // completed epochs
  float best_val_accuracy = 0.0f;
  RmsPropConfig optimizer;
};

/// On-disk layout, all little-endian:
///   "GMNN" u32 version
///   spec: u32 in_c, in_h, in_w, stem_c, stem_k, stem_stride, n_blocks, (u32 L, u32 k) * n,
///         f32 compression, f32 dropout, u32 classes
///   state: u64 model_seed, u64 step, u32 epoch, f32 best_val_acc, f32 lr, f32 rho, f32 eps
///   u32 count, then per parameter u32 numel + f32 values     (declaration order)
///   u32 count, then per buffer    u32 numel + f32 values     (running statistics)
///   u32 count, then per optimizer slot u32 numel + f32 values (0 slots = no optimizer)
struct Checkpoint {
  NetworkSpec spec;
  TrainingState state;
  std::vector<std::vector<float>> params;
  std::vector<std::vector<float>> buffers;
  std::vector<std::vector<float>> optimizer;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::string& path);

namespace detail {

template <typename Scalar>
std::vector<float> to_floats(const Tensor<Scalar>& t) {
  std::vector<float> v(static_cast<std::size_t>(t.size()));
  for (Index i = 0; i < t.size(); ++i) v[static_cast<std::size_t>(i)] = static_cast<float>(t[i]);
  return v;
}

template <typename Scalar>
void from_floats(const std::vector<float>& v, Tensor<Scalar>& t, const std::string& name) {
  if (static_cast<Index>(v.size()) != t.size())
    throw Error(ErrorCode::ShapeMismatch, "checkpoint tensor '" + name + "' has " + std::to_string(v.size()) +
                                              " values, model expects " + std::to_string(t.size()));
  for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<Scalar>(v[static_cast<std::size_t>(i)]);
}

}  // namespace detail

template <typename Scalar>
Checkpoint capture(MiniDenseNet<Scalar>& model, const RmsProp<Scalar>* optimizer, const TrainingState& state) {
  Checkpoint c;
  c.spec = model.spec();
  c.state = state;
  c.state.model_seed = model.seed();
  for (const auto& p : model.params()) c.params.push_back(detail::to_floats(*p.value));
  for (const auto& b : model.buffers()) c.buffers.push_back(detail::to_floats(*b.value));
  if (optimizer) {
    c.state.optimizer = optimizer->config();
    for (const auto& s : optimizer->state()) c.optimizer.push_back(detail::to_floats(s));
  }
  return c;
}

/// Copies parameters, buffers and (if both sides have one) optimizer state into a model
/// built from `ckpt.spec`. Every tensor size is validated.
template <typename Scalar>
void restore(const Checkpoint& ckpt, MiniDenseNet<Scalar>& model, RmsProp<Scalar>* optimizer) {
  if (!(ckpt.spec == model.spec()))
    throw Error(ErrorCode::ShapeMismatch, "checkpoint network spec differs from the model");
  auto params = model.params();
  auto buffers = model.buffers();
  if (ckpt.params.size() != params.size() || ckpt.buffers.size() != buffers.size())
    throw Error(ErrorCode::ShapeMismatch, "checkpoint tensor count differs from the model");
  for (std::size_t i = 0; i < params.size(); ++i) detail::from_floats(ckpt.params[i], *params[i].value, params[i].name);
  for (std::size_t i = 0; i < buffers.size(); ++i)
    detail::from_floats(ckpt.buffers[i], *buffers[i].value, buffers[i].name);
  if (optimizer && !ckpt.optimizer.empty()) {
    auto& state = optimizer->state();
    if (state.size() != ckpt.optimizer.size())
      throw Error(ErrorCode::ShapeMismatch, "checkpoint optimizer state differs from the model");
    for (std::size_t i = 0; i < state.size(); ++i) detail::from_floats(ckpt.optimizer[i], state[i], params[i].name + ".v");
  }
}

}  // namespace genomotif::nn
