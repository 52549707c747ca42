#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genomotif/nn/layers.hpp"

namespace genomotif::nn {

struct BlockSpec {
  int layers = 4;
  int growth = 8;

  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// stem conv -> [dense block -> transition]* -> dense block -> global average pool ->
/// dropout -> fully connected -> (softmax in the loss).
struct NetworkSpec {
  int input_channels = 3;
  int input_height = 200;
  int input_width = 200;
  int stem_channels = 16;
  int stem_kernel = 3;
  int stem_stride = 2;
  std::vector<BlockSpec> blocks{{4, 8}, {4, 8}};
  double compression = 0.5;
  double dropout = 0.5;
  int classes = 4;

  /// Throws ShapeMismatch if the layers cannot be chained on the input size.
  void validate() const;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

inline void NetworkSpec::validate() const {
  if (input_channels < 1 || input_height < 1 || input_width < 1 || stem_channels < 1 ||
      stem_kernel < 1 || stem_stride < 1 || classes < 1 || blocks.empty())
    throw Error(ErrorCode::ShapeMismatch, "network spec has non-positive sizes or no blocks");
  if (!(compression > 0.0 && compression <= 1.0))
    throw Error(ErrorCode::ShapeMismatch, "compression must lie in (0, 1]");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::ShapeMismatch, "dropout must lie in [0, 1)");
  const Index pad = stem_kernel / 2;
  Index h = conv_output_size(input_height, stem_kernel, stem_stride, pad);
  Index w = conv_output_size(input_width, stem_kernel, stem_stride, pad);
  for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
    if (h % 2 != 0 || w % 2 != 0 || h < 2 || w < 2)
      throw Error(ErrorCode::ShapeMismatch, "transition " + std::to_string(b) + " sees odd spatial size " +
                                                std::to_string(h) + "x" + std::to_string(w));
    h /= 2;
    w /= 2;
  }
}

template <typename Scalar>
class MiniDenseNet {
 public:
  MiniDenseNet(const NetworkSpec& spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
    spec_.validate();
    // Feature maps produced for block b reach the head without normalisation only when b
    // is the last block; everywhere else a convolution bias would be cancelled by the
    // batch normalisation that consumes it.
    const std::size_t last = spec.blocks.size() - 1;
    const Index pad = spec.stem_kernel / 2;
    stem_ = Conv2d<Scalar>(spec.input_channels, spec.stem_channels, spec.stem_kernel, spec.stem_stride, pad,
                           last == 0);
    stem_.need_input_grad = false;
    Index channels = spec.stem_channels;
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
      blocks_.emplace_back(channels, spec.blocks[b].layers, spec.blocks[b].growth, b == last);
      channels = blocks_.back().out_channels();
      if (b + 1 < spec.blocks.size()) {
        transitions_.emplace_back(channels, spec.compression, b + 1 == last);
        channels = transitions_.back().out_channels();
      }
    }
    head_ = Linear<Scalar>(channels, spec.classes);

    Rng rng(mix_seed(seed, 0x1417));
    stem_.init(rng);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      blocks_[b].init(rng);
      if (b < transitions_.size()) transitions_[b].init(rng);
    }
    head_.init(rng);
  }

  const NetworkSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<DenseBlock<Scalar>>& blocks() const { return blocks_; }

  /// Logits [N, classes]. `step` selects the dropout mask so training is replayable.
  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode, std::uint64_t step = 0) {
    require_shape(x, {x.dim(0), spec_.input_channels, spec_.input_height, spec_.input_width}, "network input");
    auto h = stem_.forward(x);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      h = blocks_[b].forward(h, mode);
      if (b < transitions_.size()) h = transitions_[b].forward(h, mode);
    }
    pooled_shape_ = h.shape();
    h = global_avg_pool(h);
    h = dropout(h, spec_.dropout, mode, mix_seed(seed_, step), &dropout_mask_);
    return head_.forward(h);
  }

  /// Fills every parameter gradient for the last forward call.
  void backward(const Tensor<Scalar>& grad_logits) {
    auto g = head_.backward(grad_logits);
    g.values() = g.values().cwiseProduct(dropout_mask_.values());
    g = global_avg_pool_backward(g, pooled_shape_);
    for (std::size_t b = blocks_.size(); b-- > 0;) {
      if (b < transitions_.size()) g = transitions_[b].backward(g);
      g = blocks_[b].backward(g);
    }
    stem_.backward(g);
  }

  /// Trainable parameters in declaration order (the checkpoint order).
  ParamList<Scalar> params() {
    ParamList<Scalar> out;
    stem_.collect("stem", out);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      blocks_[b].collect("block" + std::to_string(b), out);
      if (b < transitions_.size()) transitions_[b].collect("transition" + std::to_string(b), out);
    }
    head_.collect("head", out);
    return out;
  }

  BufferList<Scalar> buffers() {
    BufferList<Scalar> out;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      blocks_[b].collect_buffers("block" + std::to_string(b), out);
      if (b < transitions_.size()) transitions_[b].collect_buffers("transition" + std::to_string(b), out);
    }
    return out;
  }

  Index parameter_count() {
    Index n = 0;
    for (const auto& p : params()) n += p.value->size();
    return n;
  }

 private:
  NetworkSpec spec_;
  std::uint64_t seed_;
  Conv2d<Scalar> stem_;
  std::vector<DenseBlock<Scalar>> blocks_;
  std::vector<Transition<Scalar>> transitions_;
  Linear<Scalar> head_;
  Tensor<Scalar> dropout_mask_;
  Shape pooled_shape_;
};

}  // namespace genomotif::nn
