#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "genomotif/nn/random.hpp"
#include "genomotif/nn/tensor.hpp"

// Stateless forward/backward kernels. Layers in layers.hpp own parameters and caches and
// call into these.

namespace genomotif::nn {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Index conv_output_size(Index in, Index kernel, Index stride, Index pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

// ---------------------------------------------------------------------------
// Convolution (cross-correlation) via im2col + GEMM

namespace detail {

template <typename Scalar>
void im2col(const Scalar* src, Index channels, Index height, Index width, Index kernel,
            Index stride, Index pad, Index out_h, Index out_w, RowMat<Scalar>& col) {
  col.resize(channels * kernel * kernel, out_h * out_w);
  Index row = 0;
  for (Index c = 0; c < channels; ++c) {
    const Scalar* plane = src + c * height * width;
    for (Index ki = 0; ki < kernel; ++ki)
      for (Index kj = 0; kj < kernel; ++kj, ++row) {
        Scalar* dst = col.row(row).data();
        for (Index oh = 0; oh < out_h; ++oh) {
          const Index ih = oh * stride - pad + ki;
          Scalar* out = dst + oh * out_w;
          if (ih < 0 || ih >= height) {
            std::fill(out, out + out_w, Scalar(0));
            continue;
          }
          const Scalar* in_row = plane + ih * width;
          for (Index ow = 0; ow < out_w; ++ow) {
            const Index iw = ow * stride - pad + kj;
            out[ow] = (iw >= 0 && iw < width) ? in_row[iw] : Scalar(0);
          }
        }
      }
  }
}

template <typename Scalar>
void col2im(const RowMat<Scalar>& col, Index channels, Index height, Index width, Index kernel,
            Index stride, Index pad, Index out_h, Index out_w, Scalar* dst) {
  Index row = 0;
  for (Index c = 0; c < channels; ++c) {
    Scalar* plane = dst + c * height * width;
    for (Index ki = 0; ki < kernel; ++ki)
      for (Index kj = 0; kj < kernel; ++kj, ++row) {
        const Scalar* src = col.row(row).data();
        for (Index oh = 0; oh < out_h; ++oh) {
          const Index ih = oh * stride - pad + ki;
          if (ih < 0 || ih >= height) continue;
          Scalar* out_row = plane + ih * width;
          const Scalar* in = src + oh * out_w;
          for (Index ow = 0; ow < out_w; ++ow) {
            const Index iw = ow * stride - pad + kj;
            if (iw >= 0 && iw < width) out_row[iw] += in[ow];
          }
        }
      }
  }
}

inline bool is_pointwise(Index kernel, Index stride, Index pad) {
  return kernel == 1 && stride == 1 && pad == 0;
}

// Stride-1 convolutions skip im2col: on a zero-padded plane of row pitch Wp, tap (ki, kj)
// of every output pixel is the same contiguous range shifted by ki * Wp + kj, so the
// convolution is a sum of k*k GEMMs over shifted column blocks. Output is produced on a
// "virtual" grid of pitch Wp whose last k-1 columns per row are discarded.
struct ShiftedGeometry {
  Index padded_h, padded_w, out_h, out_w, virtual_len;

  ShiftedGeometry(Index h, Index w, Index kernel, Index pad)
      : padded_h(h + 2 * pad),
        padded_w(w + 2 * pad),
        out_h(padded_h - kernel + 1),
        out_w(padded_w - kernel + 1),
        virtual_len((out_h - 1) * padded_w + out_w) {}

  Index offset(Index ki, Index kj) const { return ki * padded_w + kj; }
};

template <typename Scalar>
void pad_planes(const Scalar* src, Index channels, Index h, Index w, Index pad, const ShiftedGeometry& g,
                RowMat<Scalar>& dst) {
  dst.setZero(channels, g.padded_h * g.padded_w);
  for (Index c = 0; c < channels; ++c)
    for (Index r = 0; r < h; ++r)
      std::copy_n(src + (c * h + r) * w, w, dst.data() + c * dst.cols() + (r + pad) * g.padded_w + pad);
}

template <typename Scalar>
using TapMap = Eigen::Map<const RowMat<Scalar>, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
template <typename Scalar>
using MutableTapMap = Eigen::Map<RowMat<Scalar>, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

}  // namespace detail

template <typename Scalar>
void check_conv_shapes(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                       const Tensor<Scalar>& bias, Index stride, Index pad) {
  require_rank(input, 4, "conv2d input");
  require_rank(weights, 4, "conv2d weights");
  if (weights.dim(1) != input.dim(1))
    throw Error(ErrorCode::ShapeMismatch, "conv2d: weights expect " + std::to_string(weights.dim(1)) +
                                              " input channels, got " + std::to_string(input.dim(1)));
  if (weights.dim(2) != weights.dim(3))
    throw Error(ErrorCode::ShapeMismatch, "conv2d: kernels must be square");
  require_shape(bias, {weights.dim(0)}, "conv2d bias");
  if (stride < 1 || pad < 0) throw Error(ErrorCode::ShapeMismatch, "conv2d: invalid stride/padding");
  if (input.dim(2) + 2 * pad < weights.dim(2) || input.dim(3) + 2 * pad < weights.dim(3))
    throw Error(ErrorCode::ShapeMismatch, "conv2d: kernel larger than padded input");
}

/// input [N, C, H, W], weights [O, C, k, k], bias [O] -> [N, O, H', W'].
template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                      const Tensor<Scalar>& bias, Index stride = 1, Index pad = 0) {
  check_conv_shapes(input, weights, bias, stride, pad);
  const Index n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const Index out_c = weights.dim(0), k = weights.dim(2);
  const Index oh = conv_output_size(h, k, stride, pad), ow = conv_output_size(w, k, stride, pad);
  Tensor<Scalar> out({n, out_c, oh, ow});
  const auto wm = weights.matrix();
  const auto& b = bias.values();
  const Index kk = k * k;
  const bool shifted = stride == 1 && !detail::is_pointwise(k, stride, pad);
  const detail::ShiftedGeometry geo(h, w, k, pad);
  RowMat<Scalar> col, virt;
  for (Index i = 0; i < n; ++i) {
    auto y = out.sample(i);
    if (detail::is_pointwise(k, stride, pad)) {
      y.noalias() = wm * input.sample(i);
    } else if (shifted) {
      detail::pad_planes(input.data() + i * c * h * w, c, h, w, pad, geo, col);
      virt.setZero(out_c, geo.virtual_len);
      for (Index t = 0; t < kk; ++t) {
        const detail::TapMap<Scalar> wt(weights.data() + t, out_c, c, {c * kk, kk});
        virt.noalias() += wt * col.middleCols(geo.offset(t / k, t % k), geo.virtual_len);
      }
      for (Index o = 0; o < out_c; ++o)
        for (Index r = 0; r < oh; ++r) std::copy_n(virt.row(o).data() + r * geo.padded_w, ow, y.row(o).data() + r * ow);
    } else {
      detail::im2col(input.data() + i * c * h * w, c, h, w, k, stride, pad, oh, ow, col);
      y.noalias() = wm * col;
    }
    y.colwise() += b;
  }
  return out;
}

template <typename Scalar>
struct ConvGrads {
  Tensor<Scalar> input;  // empty when not requested
  Tensor<Scalar> weights;
  Tensor<Scalar> bias;
};

template <typename Scalar>
ConvGrads<Scalar> conv2d_backward(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                                  const Tensor<Scalar>& grad_out, Index stride = 1,
                                  Index pad = 0, bool need_input_grad = true) {
  const Index n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const Index out_c = weights.dim(0), k = weights.dim(2);
  const Index oh = conv_output_size(h, k, stride, pad), ow = conv_output_size(w, k, stride, pad);
  require_shape(grad_out, {n, out_c, oh, ow}, "conv2d upstream gradient");

  ConvGrads<Scalar> g;
  g.weights = Tensor<Scalar>(weights.shape());
  g.bias = Tensor<Scalar>({out_c});
  if (need_input_grad) g.input = Tensor<Scalar>(input.shape());
  auto dw = g.weights.matrix();
  auto& db = g.bias.values();
  const auto wm = weights.matrix();
  const bool pointwise = detail::is_pointwise(k, stride, pad);
  const bool shifted = stride == 1 && !pointwise;
  const Index kk = k * k;
  const detail::ShiftedGeometry geo(h, w, k, pad);
  RowMat<Scalar> col, dcol, virt;
  if (shifted) virt.setZero(out_c, geo.virtual_len);
  for (Index i = 0; i < n; ++i) {
    const auto dy = grad_out.sample(i);
    db += dy.rowwise().sum();
    if (pointwise) {
      dw.noalias() += dy * input.sample(i).transpose();
      if (need_input_grad) g.input.sample(i).noalias() = wm.transpose() * dy;
      continue;
    }
    if (shifted) {
      // Columns past out_w in each virtual row stay zero.
      for (Index o = 0; o < out_c; ++o)
        for (Index r = 0; r < oh; ++r) std::copy_n(dy.row(o).data() + r * ow, ow, virt.row(o).data() + r * geo.padded_w);
      detail::pad_planes(input.data() + i * c * h * w, c, h, w, pad, geo, col);
      for (Index t = 0; t < kk; ++t) {
        detail::MutableTapMap<Scalar> dwt(dw.data() + t, out_c, c, {c * kk, kk});
        dwt.noalias() += virt * col.middleCols(geo.offset(t / k, t % k), geo.virtual_len).transpose();
      }
      if (need_input_grad) {
        dcol.setZero(c, geo.padded_h * geo.padded_w);
        for (Index t = 0; t < kk; ++t) {
          const detail::TapMap<Scalar> wt(weights.data() + t, out_c, c, {c * kk, kk});
          dcol.middleCols(geo.offset(t / k, t % k), geo.virtual_len).noalias() += wt.transpose() * virt;
        }
        Scalar* dst = g.input.data() + i * c * h * w;
        for (Index ch = 0; ch < c; ++ch)
          for (Index r = 0; r < h; ++r)
            std::copy_n(dcol.row(ch).data() + (r + pad) * geo.padded_w + pad, w, dst + (ch * h + r) * w);
      }
      continue;
    }
    detail::im2col(input.data() + i * c * h * w, c, h, w, k, stride, pad, oh, ow, col);
    dw.noalias() += dy * col.transpose();
    if (need_input_grad) {
      dcol.noalias() = wm.transpose() * dy;
      detail::col2im(dcol, c, h, w, k, stride, pad, oh, ow, g.input.data() + i * c * h * w);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Batch normalisation over (N, H, W) per channel

template <typename Scalar>
struct BatchNormCache {
  Tensor<Scalar> normalized;  // x_hat
  Vec<Scalar> inv_std;
};

template <typename Scalar>
struct BatchStats {
  Vec<Scalar> mean;
  Vec<Scalar> var;  // biased
};

template <typename Scalar>
Tensor<Scalar> batchnorm_train(const Tensor<Scalar>& x, const Tensor<Scalar>& gamma,
                               const Tensor<Scalar>& beta, Scalar eps,
                               BatchNormCache<Scalar>* cache = nullptr,
                               BatchStats<Scalar>* stats = nullptr) {
  require_rank(x, 4, "batchnorm input");
  const Index n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  require_shape(gamma, {c}, "batchnorm gamma");
  require_shape(beta, {c}, "batchnorm beta");
  if (n < 2)
    throw Error(ErrorCode::DegenerateBatch, "batch normalisation in training mode needs >= 2 samples");
  const Scalar count = static_cast<Scalar>(n * plane);
  using RowArray = Eigen::Array<Scalar, 1, Eigen::Dynamic>;
  auto row = [&](const Tensor<Scalar>& t, Index i, Index ch) {
    return Eigen::Map<const RowArray>(t.data() + (i * c + ch) * plane, plane);
  };

  // Two-pass moments per channel, accumulated sample by sample.
  Vec<Scalar> mean = Vec<Scalar>::Zero(c);
  Vec<Scalar> var = Vec<Scalar>::Zero(c);
  for (Index i = 0; i < n; ++i)
    for (Index ch = 0; ch < c; ++ch) mean[ch] += row(x, i, ch).sum();
  mean /= count;
  for (Index i = 0; i < n; ++i)
    for (Index ch = 0; ch < c; ++ch) var[ch] += (row(x, i, ch) - mean[ch]).square().sum();
  var /= count;
  Vec<Scalar> inv_std = (var.array() + eps).rsqrt().matrix();

  Tensor<Scalar> xhat(x.shape());
  Tensor<Scalar> y(x.shape());
  for (Index i = 0; i < n; ++i)
    for (Index ch = 0; ch < c; ++ch) {
      const Index off = (i * c + ch) * plane;
      Eigen::Map<RowArray> xh(xhat.data() + off, plane);
      xh = (row(x, i, ch) - mean[ch]) * inv_std[ch];
      Eigen::Map<RowArray>(y.data() + off, plane) = xh * gamma[ch] + beta[ch];
    }
  if (cache) *cache = {std::move(xhat), std::move(inv_std)};
  if (stats) *stats = {std::move(mean), std::move(var)};
  return y;
}

template <typename Scalar>
Tensor<Scalar> batchnorm_eval(const Tensor<Scalar>& x, const Tensor<Scalar>& gamma,
                              const Tensor<Scalar>& beta, const Tensor<Scalar>& running_mean,
                              const Tensor<Scalar>& running_var, Scalar eps) {
  require_rank(x, 4, "batchnorm input");
  const Index c = x.dim(1);
  require_shape(gamma, {c}, "batchnorm gamma");
  require_shape(running_mean, {c}, "batchnorm running mean");
  const Vec<Scalar> scale =
      (gamma.values().array() * (running_var.values().array() + eps).rsqrt()).matrix();
  const Vec<Scalar> shift =
      beta.values() - (scale.array() * running_mean.values().array()).matrix();
  Tensor<Scalar> y(x.shape());
  for (Index i = 0; i < x.dim(0); ++i)
    y.sample(i) = (scale.asDiagonal() * x.sample(i)).colwise() + shift;
  return y;
}

template <typename Scalar>
struct BatchNormGrads {
  Tensor<Scalar> input;
  Tensor<Scalar> gamma;
  Tensor<Scalar> beta;
};

template <typename Scalar>
BatchNormGrads<Scalar> batchnorm_backward(const Tensor<Scalar>& grad_out,
                                          const BatchNormCache<Scalar>& cache,
                                          const Tensor<Scalar>& gamma) {
  const auto& xhat = cache.normalized;
  require_shape(grad_out, xhat.shape(), "batchnorm upstream gradient");
  const Index n = xhat.dim(0), c = xhat.dim(1), plane = xhat.dim(2) * xhat.dim(3);
  const Scalar count = static_cast<Scalar>(n * plane);

  BatchNormGrads<Scalar> g{Tensor<Scalar>(xhat.shape()), Tensor<Scalar>({c}), Tensor<Scalar>({c})};
  auto& dbeta = g.beta.values();
  auto& dgamma = g.gamma.values();
  using RowArray = Eigen::Array<Scalar, 1, Eigen::Dynamic>;
  for (Index i = 0; i < n; ++i)
    for (Index ch = 0; ch < c; ++ch) {
      const Index off = (i * c + ch) * plane;
      const Eigen::Map<const RowArray> dy(grad_out.data() + off, plane), xh(xhat.data() + off, plane);
      dbeta[ch] += dy.sum();
      dgamma[ch] += (dy * xh).sum();
    }
  // dx = gamma * inv_std / M * (M dy - sum(dy) - xhat * sum(dy * xhat))
  for (Index i = 0; i < n; ++i)
    for (Index ch = 0; ch < c; ++ch) {
      const Index off = (i * c + ch) * plane;
      const Eigen::Map<const RowArray> dy(grad_out.data() + off, plane), xh(xhat.data() + off, plane);
      const Scalar scale = gamma[ch] * cache.inv_std[ch] / count;
      Eigen::Map<RowArray>(g.input.data() + off, plane) = scale * (count * dy - dbeta[ch] - dgamma[ch] * xh);
    }
  return g;
}

// ---------------------------------------------------------------------------
// Pooling

template <typename Scalar>
Tensor<Scalar> avg_pool2x2(const Tensor<Scalar>& x) {
  require_rank(x, 4, "avg_pool input");
  const Index n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 != 0 || w % 2 != 0)
    throw Error(ErrorCode::ShapeMismatch, "avg_pool 2x2 needs even spatial dims, got " + shape_string(x.shape()));
  Tensor<Scalar> y({n, c, h / 2, w / 2});
  const Scalar quarter = Scalar(0.25);
  for (Index p = 0; p < n * c; ++p) {
    const Scalar* in = x.data() + p * h * w;
    Scalar* out = y.data() + p * (h / 2) * (w / 2);
    for (Index i = 0; i < h / 2; ++i)
      for (Index j = 0; j < w / 2; ++j) {
        const Scalar* a = in + (2 * i) * w + 2 * j;
        out[i * (w / 2) + j] = quarter * (a[0] + a[1] + a[w] + a[w + 1]);
      }
  }
  return y;
}

template <typename Scalar>
Tensor<Scalar> avg_pool2x2_backward(const Tensor<Scalar>& grad_out, const Shape& input_shape) {
  const Index n = input_shape[0], c = input_shape[1], h = input_shape[2], w = input_shape[3];
  require_shape(grad_out, {n, c, h / 2, w / 2}, "avg_pool upstream gradient");
  Tensor<Scalar> dx(input_shape);
  const Scalar quarter = Scalar(0.25);
  for (Index p = 0; p < n * c; ++p) {
    const Scalar* g = grad_out.data() + p * (h / 2) * (w / 2);
    Scalar* out = dx.data() + p * h * w;
    for (Index i = 0; i < h / 2; ++i)
      for (Index j = 0; j < w / 2; ++j) {
        const Scalar v = quarter * g[i * (w / 2) + j];
        Scalar* a = out + (2 * i) * w + 2 * j;
        a[0] = v;
        a[1] = v;
        a[w] = v;
        a[w + 1] = v;
      }
  }
  return dx;
}

/// [N, C, H, W] -> [N, C]
template <typename Scalar>
Tensor<Scalar> global_avg_pool(const Tensor<Scalar>& x) {
  require_rank(x, 4, "global_avg_pool input");
  const Index n = x.dim(0), c = x.dim(1);
  Tensor<Scalar> y({n, c});
  const Scalar inv = Scalar(1) / static_cast<Scalar>(x.dim(2) * x.dim(3));
  for (Index i = 0; i < n; ++i) y.matrix().row(i) = x.sample(i).rowwise().sum().transpose() * inv;
  return y;
}

template <typename Scalar>
Tensor<Scalar> global_avg_pool_backward(const Tensor<Scalar>& grad_out, const Shape& input_shape) {
  const Index n = input_shape[0], c = input_shape[1];
  require_shape(grad_out, {n, c}, "global_avg_pool upstream gradient");
  const Index plane = input_shape[2] * input_shape[3];
  const Scalar inv = Scalar(1) / static_cast<Scalar>(plane);
  Tensor<Scalar> dx(input_shape);
  for (Index i = 0; i < n; ++i)
    dx.sample(i) = (grad_out.matrix().row(i).transpose() * inv).replicate(1, plane);
  return dx;
}

// ---------------------------------------------------------------------------
// Fully connected

/// x [N, D], W [O, D], b [O] -> [N, O]
template <typename Scalar>
Tensor<Scalar> dense(const Tensor<Scalar>& x, const Tensor<Scalar>& weights,
                     const Tensor<Scalar>& bias) {
  require_rank(x, 2, "dense input");
  require_rank(weights, 2, "dense weights");
  if (weights.dim(1) != x.dim(1))
    throw Error(ErrorCode::ShapeMismatch, "dense: weights expect " + std::to_string(weights.dim(1)) +
                                              " inputs, got " + std::to_string(x.dim(1)));
  require_shape(bias, {weights.dim(0)}, "dense bias");
  Tensor<Scalar> y({x.dim(0), weights.dim(0)});
  y.matrix().noalias() = x.matrix() * weights.matrix().transpose();
  y.matrix().rowwise() += bias.values().transpose();
  return y;
}

template <typename Scalar>
struct DenseGrads {
  Tensor<Scalar> input;
  Tensor<Scalar> weights;
  Tensor<Scalar> bias;
};

template <typename Scalar>
DenseGrads<Scalar> dense_backward(const Tensor<Scalar>& x, const Tensor<Scalar>& weights,
                                  const Tensor<Scalar>& grad_out) {
  require_shape(grad_out, {x.dim(0), weights.dim(0)}, "dense upstream gradient");
  DenseGrads<Scalar> g{Tensor<Scalar>(x.shape()), Tensor<Scalar>(weights.shape()),
                       Tensor<Scalar>({weights.dim(0)})};
  g.input.matrix().noalias() = grad_out.matrix() * weights.matrix();
  g.weights.matrix().noalias() = grad_out.matrix().transpose() * x.matrix();
  g.bias.values() = grad_out.matrix().colwise().sum().transpose();
  return g;
}

// ---------------------------------------------------------------------------
// Activations and dropout

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& x) {
  Tensor<Scalar> y(x.shape());
  y.values() = x.values().cwiseMax(Scalar(0));
  return y;
}

/// Gradient through ReLU given its input.
template <typename Scalar>
Tensor<Scalar> relu_backward(const Tensor<Scalar>& x, const Tensor<Scalar>& grad_out) {
  Tensor<Scalar> dx(x.shape());
  dx.values() = (x.values().array() > Scalar(0)).select(grad_out.values(), Scalar(0));
  return dx;
}

enum class Mode { Train, Eval };

/// Inverted dropout mask: 0 with probability `rate`, otherwise 1/(1 - rate).
template <typename Scalar>
Tensor<Scalar> dropout_mask(const Shape& shape, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::Usage, "dropout rate must lie in [0, 1)");
  Tensor<Scalar> mask(shape);
  const Scalar keep = static_cast<Scalar>(1.0 / (1.0 - rate));
  Rng rng(seed);
  for (Index i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < rate ? Scalar(0) : keep;
  return mask;
}

template <typename Scalar>
Tensor<Scalar> dropout(const Tensor<Scalar>& x, double rate, Mode mode, std::uint64_t seed,
                       Tensor<Scalar>* mask_out = nullptr) {
  if (mode == Mode::Eval || rate == 0.0) {
    if (mask_out) *mask_out = Tensor<Scalar>(x.shape(), Scalar(1));
    return x;
  }
  auto mask = dropout_mask<Scalar>(x.shape(), rate, seed);
  Tensor<Scalar> y(x.shape());
  y.values() = x.values().cwiseProduct(mask.values());
  if (mask_out) *mask_out = std::move(mask);
  return y;
}

// ---------------------------------------------------------------------------
// Softmax and categorical cross-entropy

/// Row-wise softmax of [N, K] logits, max-subtracted.
template <typename Scalar>
Tensor<Scalar> softmax(const Tensor<Scalar>& logits) {
  require_rank(logits, 2, "softmax input");
  if (!logits.all_finite()) throw Error(ErrorCode::NonFiniteInput, "softmax received non-finite logits");
  Tensor<Scalar> p(logits.shape());
  for (Index i = 0; i < logits.dim(0); ++i) {
    const auto row = logits.matrix().row(i);
    auto e = (row.array() - row.maxCoeff()).exp();
    p.matrix().row(i) = e / e.sum();
  }
  return p;
}

inline constexpr double kLogClamp = 1e-12;

/// Mean over samples of -sum_j t_ij log(p_ij), log argument clamped at 1e-12.
template <typename Scalar>
Scalar cross_entropy(const Tensor<Scalar>& probs, const Tensor<Scalar>& targets) {
  require_rank(probs, 2, "cross_entropy predictions");
  require_shape(targets, probs.shape(), "cross_entropy targets");
  const auto clamped = probs.values().array().max(static_cast<Scalar>(kLogClamp));
  const Scalar total = -(targets.values().array() * clamped.log()).sum();
  return total / static_cast<Scalar>(probs.dim(0));
}

/// d(loss)/d(logits) for softmax followed by mean cross-entropy: (p - t) / m.
template <typename Scalar>
Tensor<Scalar> softmax_cross_entropy_grad(const Tensor<Scalar>& probs, const Tensor<Scalar>& targets) {
  require_shape(targets, probs.shape(), "cross_entropy targets");
  Tensor<Scalar> g(probs.shape());
  g.values() = (probs.values() - targets.values()) / static_cast<Scalar>(probs.dim(0));
  return g;
}

template <typename Scalar>
Tensor<Scalar> one_hot(const std::vector<int>& labels, Index classes) {
  Tensor<Scalar> t({static_cast<Index>(labels.size()), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw Error(ErrorCode::ShapeMismatch, "label " + std::to_string(labels[i]) + " out of range");
    t.matrix()(static_cast<Index>(i), labels[i]) = Scalar(1);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Channel concatenation for dense connectivity

template <typename Scalar>
Tensor<Scalar> concat_channels(const std::vector<const Tensor<Scalar>*>& parts) {
  const auto& first = *parts.front();
  Index channels = 0;
  for (const auto* p : parts) {
    if (p->dim(0) != first.dim(0) || p->dim(2) != first.dim(2) || p->dim(3) != first.dim(3))
      throw Error(ErrorCode::ShapeMismatch, "concat: mismatched " + shape_string(p->shape()) +
                                                " vs " + shape_string(first.shape()));
    channels += p->dim(1);
  }
  Tensor<Scalar> out({first.dim(0), channels, first.dim(2), first.dim(3)});
  for (Index i = 0; i < first.dim(0); ++i) {
    Index offset = 0;
    for (const auto* p : parts) {
      out.sample(i).middleRows(offset, p->dim(1)) = p->sample(i);
      offset += p->dim(1);
    }
  }
  return out;
}

/// Adds channels [offset, offset + dst.C) of `src` into `dst`.
template <typename Scalar>
void accumulate_channel_slice(const Tensor<Scalar>& src, Index offset, Tensor<Scalar>& dst) {
  for (Index i = 0; i < src.dim(0); ++i) dst.sample(i) += src.sample(i).middleRows(offset, dst.dim(1));
}

}  // namespace genomotif::nn
