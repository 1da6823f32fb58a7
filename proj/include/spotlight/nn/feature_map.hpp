#pragma once

#include "spotlight/types.hpp"

#include <Eigen/Dense>

#include <string>

namespace spotlight::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  friend bool operator==(const Shape&, const Shape&) = default;
  std::string str() const {
    return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
  }
};

/// C x H x W activation tensor stored channel-major as a C x (H*W) matrix, so
/// pointwise convolutions and channel attention are plain matrix products.
template <typename Scalar>
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, int height, int width) : FeatureMap(Shape{channels, height, width}) {}
  explicit FeatureMap(Shape shape) : shape_(shape) {
    check_shape(shape_);
    data_ = Matrix<Scalar>::Zero(shape_.channels, static_cast<Eigen::Index>(shape_.height) * shape_.width);
  }
  FeatureMap(Shape shape, Matrix<Scalar> data) : shape_(shape), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.rows() != shape_.channels ||
        data_.cols() != static_cast<Eigen::Index>(shape_.height) * shape_.width) {
      throw ShapeError("FeatureMap: data is " + std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()) +
                       ", shape is " + shape_.str());
    }
  }

  const Shape& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  Eigen::Index plane_size() const { return static_cast<Eigen::Index>(shape_.height) * shape_.width; }

  Scalar& operator()(int c, int y, int x) { return data_(c, static_cast<Eigen::Index>(y) * shape_.width + x); }
  Scalar operator()(int c, int y, int x) const { return data_(c, static_cast<Eigen::Index>(y) * shape_.width + x); }

  Matrix<Scalar>& matrix() { return data_; }
  const Matrix<Scalar>& matrix() const { return data_; }

  /// One channel as an H x W plane (copy).
  Plane<Scalar> plane(int c) const {
    return Eigen::Map<const Plane<Scalar>>(data_.row(c).data(), shape_.height, shape_.width);
  }

  bool all_finite() const { return data_.allFinite(); }

 private:
  static void check_shape(const Shape& s) {
    if (s.channels < 1 || s.height < 1 || s.width < 1) throw ShapeError("FeatureMap: bad shape " + s.str());
  }

  Shape shape_{};
  Matrix<Scalar> data_;
};

}  // namespace spotlight::nn
