#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "genomotif/nn/ops.hpp"

namespace genomotif::nn {

/// Trainable tensor with its gradient, named for checkpoints and diagnostics.
template <typename Scalar>
struct Param {
  std::string name;
  Tensor<Scalar>* value;
  Tensor<Scalar>* grad;
};

template <typename Scalar>
using ParamList = std::vector<Param<Scalar>>;

/// Non-trainable state (batch-norm running statistics).
template <typename Scalar>
struct Buffer {
  std::string name;
  Tensor<Scalar>* value;
};

template <typename Scalar>
using BufferList = std::vector<Buffer<Scalar>>;

template <typename Scalar>
void he_normal(Tensor<Scalar>& t, Index fan_in, Rng& rng) {
  const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<Scalar>(std_dev * rng.normal());
}

template <typename Scalar>
class Conv2d {
 public:
  Conv2d() = default;
  /// Without `bias` the bias stays zero and is not a parameter; used where every consumer
  /// batch-normalises the output, which would cancel it anyway.
  Conv2d(Index in_channels, Index out_channels, Index kernel, Index stride, Index pad, bool bias = true)
      : weight_({out_channels, in_channels, kernel, kernel}),
        bias_({out_channels}),
        dweight_(weight_.shape()),
        dbias_(bias_.shape()),
        stride_(stride),
        pad_(pad),
        has_bias_(bias) {}

  void init(Rng& rng) {
    he_normal(weight_, weight_.dim(1) * weight_.dim(2) * weight_.dim(3), rng);
    bias_.set_zero();
  }

  Tensor<Scalar> forward(Tensor<Scalar> x) {
    input_ = std::move(x);
    return conv2d(input_, weight_, bias_, stride_, pad_);
  }

  /// The input of the last forward call.
  const Tensor<Scalar>& input() const { return input_; }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) {
    auto g = conv2d_backward(input_, weight_, grad_out, stride_, pad_, need_input_grad);
    dweight_ = std::move(g.weights);
    dbias_ = std::move(g.bias);
    return std::move(g.input);
  }

  void collect(const std::string& prefix, ParamList<Scalar>& out) {
    out.push_back({prefix + ".weight", &weight_, &dweight_});
    if (has_bias_) out.push_back({prefix + ".bias", &bias_, &dbias_});
  }

  Index out_channels() const { return weight_.dim(0); }
  bool has_bias() const { return has_bias_; }
  Tensor<Scalar>& weight() { return weight_; }
  Tensor<Scalar>& bias() { return bias_; }

  bool need_input_grad = true;

 private:
  Tensor<Scalar> weight_, bias_, dweight_, dbias_;
  Index stride_ = 1, pad_ = 0;
  bool has_bias_ = true;
  Tensor<Scalar> input_;
};

template <typename Scalar>
class BatchNorm {
 public:
  static constexpr double kMomentum = 0.9;
  static constexpr double kEpsilon = 1e-5;

  BatchNorm() = default;
  explicit BatchNorm(Index channels)
      : gamma_({channels}, Scalar(1)),
        beta_({channels}),
        dgamma_({channels}),
        dbeta_({channels}),
        running_mean_({channels}),
        running_var_({channels}, Scalar(1)) {}

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    const auto eps = static_cast<Scalar>(kEpsilon);
    if (mode == Mode::Eval)
      return batchnorm_eval(x, gamma_, beta_, running_mean_, running_var_, eps);
    BatchStats<Scalar> stats;
    auto y = batchnorm_train(x, gamma_, beta_, eps, &cache_, &stats);
    const Scalar count = static_cast<Scalar>(x.dim(0) * x.dim(2) * x.dim(3));
    const auto m = static_cast<Scalar>(kMomentum);
    running_mean_.values() = m * running_mean_.values() + (Scalar(1) - m) * stats.mean;
    // Unbiased estimate for inference, matching common framework behaviour.
    running_var_.values() =
        m * running_var_.values() + (Scalar(1) - m) * stats.var * (count / (count - Scalar(1)));
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) {
    auto g = batchnorm_backward(grad_out, cache_, gamma_);
    dgamma_ = std::move(g.gamma);
    dbeta_ = std::move(g.beta);
    return std::move(g.input);
  }

  void collect(const std::string& prefix, ParamList<Scalar>& out) {
    out.push_back({prefix + ".gamma", &gamma_, &dgamma_});
    out.push_back({prefix + ".beta", &beta_, &dbeta_});
  }
  void collect_buffers(const std::string& prefix, BufferList<Scalar>& out) {
    out.push_back({prefix + ".running_mean", &running_mean_});
    out.push_back({prefix + ".running_var", &running_var_});
  }

  Tensor<Scalar>& gamma() { return gamma_; }
  Tensor<Scalar>& beta() { return beta_; }

 private:
  Tensor<Scalar> gamma_, beta_, dgamma_, dbeta_, running_mean_, running_var_;
  BatchNormCache<Scalar> cache_;
};

/// One layer of a dense block: BN -> ReLU -> 3x3 conv producing `growth` channels.
template <typename Scalar>
class DenseUnit {
 public:
  DenseUnit() = default;
  DenseUnit(Index in_channels, Index growth, bool bias = true)
      : bn_(in_channels), conv_(in_channels, growth, 3, 1, 1, bias) {}

  void init(Rng& rng) { conv_.init(rng); }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) { return conv_.forward(relu(bn_.forward(x, mode))); }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) {
    // The conv input is the ReLU output, positive exactly where the ReLU input was.
    auto g = relu_backward(conv_.input(), conv_.backward(grad_out));
    return bn_.backward(g);
  }

  void collect(const std::string& prefix, ParamList<Scalar>& out) {
    bn_.collect(prefix + ".bn", out);
    conv_.collect(prefix + ".conv", out);
  }
  void collect_buffers(const std::string& prefix, BufferList<Scalar>& out) {
    bn_.collect_buffers(prefix + ".bn", out);
  }

 private:
  BatchNorm<Scalar> bn_;
  Conv2d<Scalar> conv_;
};

/// Densely connected block: unit l consumes the channel concatenation of the block input
/// and the outputs of units 1..l-1; the block emits the concatenation of all of them.
template <typename Scalar>
class DenseBlock {
 public:
  /// (source, unit): source 0 is the block input, source j > 0 is unit j's output.
  struct Edge {
    int source;
    int unit;
  };

  DenseBlock() = default;
  DenseBlock(Index in_channels, int layers, Index growth, bool bias = true)
      : in_channels_(in_channels), growth_(growth) {
    if (layers < 1 || growth < 1) throw Error(ErrorCode::ShapeMismatch, "dense block needs L >= 1, k >= 1");
    for (int l = 0; l < layers; ++l) {
      units_.emplace_back(in_channels + l * growth, growth, bias);
      for (int s = 0; s <= l; ++s) edges_.push_back({s, l + 1});
    }
  }

  void init(Rng& rng) {
    for (auto& u : units_) u.init(rng);
  }

  Index in_channels() const { return in_channels_; }
  Index out_channels() const { return in_channels_ + static_cast<Index>(units_.size()) * growth_; }
  int layers() const { return static_cast<int>(units_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    if (x.rank() != 4 || x.dim(1) != in_channels_)
      throw Error(ErrorCode::ShapeMismatch, "dense block expects " + std::to_string(in_channels_) +
                                                " channels, got " + shape_string(x.shape()));
    outputs_.clear();
    outputs_.reserve(units_.size());
    std::vector<const Tensor<Scalar>*> sources{&x};
    for (auto& unit : units_) {
      const auto joined = concat_channels(sources);
      outputs_.push_back(unit.forward(joined, mode));
      sources.push_back(&outputs_.back());
    }
    input_shape_ = x.shape();
    return concat_channels(sources);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) {
    const int L = layers();
    // grads[0] is the block input, grads[j] unit j's output.
    std::vector<Tensor<Scalar>> grads;
    grads.emplace_back(input_shape_);
    for (int l = 0; l < L; ++l) grads.emplace_back(outputs_[l].shape());
    Index offset = 0;
    for (auto& g : grads) {
      accumulate_channel_slice(grad_out, offset, g);
      offset += g.dim(1);
    }
    for (int l = L - 1; l >= 0; --l) {
      const auto g_in = units_[l].backward(grads[l + 1]);
      Index off = 0;
      for (int s = 0; s <= l; ++s) {
        accumulate_channel_slice(g_in, off, grads[s]);
        off += grads[s].dim(1);
      }
    }
    return std::move(grads[0]);
  }

  void collect(const std::string& prefix, ParamList<Scalar>& out) {
    for (std::size_t l = 0; l < units_.size(); ++l) units_[l].collect(prefix + ".unit" + std::to_string(l), out);
  }
  void collect_buffers(const std::string& prefix, BufferList<Scalar>& out) {
    for (std::size_t l = 0; l < units_.size(); ++l)
      units_[l].collect_buffers(prefix + ".unit" + std::to_string(l), out);
  }

 private:
  Index in_channels_ = 0;
  Index growth_ = 0;
  std::vector<DenseUnit<Scalar>> units_;
  std::vector<Edge> edges_;
  std::vector<Tensor<Scalar>> outputs_;
  Shape input_shape_;
};

inline Index compressed_channels(Index in_channels, double compression) {
  return std::max<Index>(1, static_cast<Index>(std::floor(compression * static_cast<double>(in_channels))));
}

/// BN -> 1x1 conv (channels scaled by the compression factor) -> 2x2 average pool.
template <typename Scalar>
class Transition {
 public:
  Transition() = default;
  Transition(Index in_channels, double compression, bool bias = true)
      : bn_(in_channels), conv_(in_channels, compressed_channels(in_channels, compression), 1, 1, 0, bias) {}

  void init(Rng& rng) { conv_.init(rng); }
  Index out_channels() const { return conv_.out_channels(); }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    if (x.rank() == 4 && (x.dim(2) % 2 != 0 || x.dim(3) % 2 != 0))
      throw Error(ErrorCode::ShapeMismatch, "transition needs even spatial dims, got " + shape_string(x.shape()));
    auto y = conv_.forward(bn_.forward(x, mode));
    conv_shape_ = y.shape();
    return avg_pool2x2(y);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) {
    return bn_.backward(conv_.backward(avg_pool2x2_backward(grad_out, conv_shape_)));
  }

  void collect(const std::string& prefix, ParamList<Scalar>& out) {
    bn_.collect(prefix + ".bn", out);
    conv_.collect(prefix + ".conv", out);
  }
  void collect_buffers(const std::string& prefix, BufferList<Scalar>& out) {
    bn_.collect_buffers(prefix + ".bn", out);
  }

 private:
  BatchNorm<Scalar> bn_;
  Conv2d<Scalar> conv_;
  Shape conv_shape_;
};

template <typename Scalar>
class Linear {
 public:
  Linear() = default;
  Linear(Index in_features, Index out_features)
      : weight_({out_features, in_features}), bias_({out_features}), dweight_(weight_.shape()), dbias_(bias_.shape()) {}

  void init(Rng& rng) {
    const double std_dev = std::sqrt(1.0 / static_cast<double>(weight_.dim(1)));
    for (Index i = 0; i < weight_.size(); ++i) weight_[i] = static_cast<Scalar>(std_dev * rng.normal());
    bias_.set_zero();
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    input_ = x;
    return dense(x, weight_, bias_);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& grad_out) {
    auto g = dense_backward(input_, weight_, grad_out);
    dweight_ = std::move(g.weights);
    dbias_ = std::move(g.bias);
    return std::move(g.input);
  }

  void collect(const std::string& prefix, ParamList<Scalar>& out) {
    out.push_back({prefix + ".weight", &weight_, &dweight_});
    out.push_back({prefix + ".bias", &bias_, &dbias_});
  }

  Tensor<Scalar>& weight() { return weight_; }
  Tensor<Scalar>& bias() { return bias_; }

 private:
  Tensor<Scalar> weight_, bias_, dweight_, dbias_;
  Tensor<Scalar> input_;
};

}  // namespace genomotif::nn
