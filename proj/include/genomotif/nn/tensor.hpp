#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "genomotif/errors.hpp"

namespace genomotif::nn {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// Dense row-major N-d array. Rank-4 tensors are NCHW.
template <typename Scalar>
class Tensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<RowMatrix>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix>;

  Tensor() = default;
  explicit Tensor(Shape shape, Scalar fill = Scalar(0))
      : shape_(std::move(shape)), data_(Vector::Constant(shape_size(shape_), fill)) {
    for (auto d : shape_)
      if (d <= 0) throw Error(ErrorCode::ShapeMismatch, "non-positive dimension in " + shape_string(shape_));
  }
  Tensor(Shape shape, std::initializer_list<Scalar> values) : Tensor(std::move(shape)) {
    if (static_cast<Index>(values.size()) != data_.size())
      throw Error(ErrorCode::ShapeMismatch, "initializer does not match " + shape_string(shape_));
    std::copy(values.begin(), values.end(), data_.data());
  }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(std::size_t i) const { return shape_.at(i); }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  Vector& values() { return data_; }
  const Vector& values() const { return data_; }
  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  Scalar& operator()(Index n, Index c, Index h, Index w) { return data_[offset(n, c, h, w)]; }
  Scalar operator()(Index n, Index c, Index h, Index w) const { return data_[offset(n, c, h, w)]; }

  /// Rows = dim(0), columns = everything else.
  MatrixMap matrix() { return MatrixMap(data(), shape_.at(0), size() / shape_.at(0)); }
  ConstMatrixMap matrix() const { return ConstMatrixMap(data(), shape_.at(0), size() / shape_.at(0)); }

  /// Channel-by-pixel view of sample n of an NCHW tensor.
  MatrixMap sample(Index n) {
    const Index plane = shape_[2] * shape_[3];
    return MatrixMap(data() + n * shape_[1] * plane, shape_[1], plane);
  }
  ConstMatrixMap sample(Index n) const {
    const Index plane = shape_[2] * shape_[3];
    return ConstMatrixMap(data() + n * shape_[1] * plane, shape_[1], plane);
  }

  void reshape(Shape shape) {
    if (shape_size(shape) != size())
      throw Error(ErrorCode::ShapeMismatch,
                  "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    shape_ = std::move(shape);
  }

  void set_zero() { data_.setZero(); }
  bool all_finite() const { return data_.allFinite(); }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out(shape_);
    out.values() = data_.template cast<Other>();
    return out;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Index offset(Index n, Index c, Index h, Index w) const {
    return ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w;
  }

  Shape shape_;
  Vector data_;
};

template <typename Scalar>
void require_shape(const Tensor<Scalar>& t, const Shape& expected, const char* what) {
  if (t.shape() != expected)
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected " + shape_string(expected) +
                                              ", got " + shape_string(t.shape()));
}

template <typename Scalar>
void require_rank(const Tensor<Scalar>& t, Index rank, const char* what) {
  if (t.rank() != rank)
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected rank " +
                                              std::to_string(rank) + ", got " + shape_string(t.shape()));
}

}  // namespace genomotif::nn
