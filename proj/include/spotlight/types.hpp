#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spotlight {

/// Row-major 2-D plane; rows are image rows (y), columns are image columns (x).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when two maps or tensors that must agree in shape do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a value violates a domain invariant (range, binarity, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Pixel {
  int x = 0;  // column
  int y = 0;  // row

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// 2-D map with every element exactly 0 or 1.
class BinaryMask {
 public:
  BinaryMask(int width, int height);
  explicit BinaryMask(Plane<std::uint8_t> data);

  /// Binarizes an 8-bit grayscale image: values >= threshold become 1.
  static BinaryMask from_gray(const Plane<std::uint8_t>& gray, int threshold = 128);

  int width() const { return static_cast<int>(data_.cols()); }
  int height() const { return static_cast<int>(data_.rows()); }
  bool at(int x, int y) const { return data_(y, x) != 0; }
  void set(int x, int y, bool v) { data_(y, x) = v ? 1 : 0; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width() && y < height(); }

  const Plane<std::uint8_t>& data() const { return data_; }
  std::size_t count() const;
  bool any() const { return count() > 0; }

  template <typename Scalar>
  Plane<Scalar> as() const {
    return data_.template cast<Scalar>();
  }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           (a.data_ == b.data_).all();
  }

 private:
  Plane<std::uint8_t> data_;
};

/// Real-valued 2-D map with every element in [0,1]. Used for shadow maps and
/// predictions alike; the two aliases below only document intent.
class UnitMap {
 public:
  UnitMap(int width, int height);
  explicit UnitMap(Plane<double> data);

  int width() const { return static_cast<int>(data_.cols()); }
  int height() const { return static_cast<int>(data_.rows()); }
  double at(int x, int y) const { return data_(y, x); }
  const Plane<double>& data() const { return data_; }

  /// 8-bit export: round(255 * v).
  Plane<std::uint8_t> to_gray() const;
  /// 8-bit import: v / 255.
  static UnitMap from_gray(const Plane<std::uint8_t>& gray);

  friend bool operator==(const UnitMap& a, const UnitMap& b) {
    return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           (a.data_ == b.data_).all();
  }

 private:
  Plane<double> data_;
};

using ShadowMap = UnitMap;
using PredictionMap = UnitMap;

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const std::string& what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError(what + ": size mismatch (" + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()) + ")");
  }
}

}  // namespace spotlight
