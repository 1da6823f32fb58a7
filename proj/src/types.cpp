#include "spotlight/types.hpp"

#include <cmath>

namespace spotlight {

BinaryMask::BinaryMask(int width, int height) {
  if (width < 1 || height < 1) throw ShapeError("BinaryMask: dimensions must be >= 1");
  data_ = Plane<std::uint8_t>::Zero(height, width);
}

BinaryMask::BinaryMask(Plane<std::uint8_t> data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) throw ShapeError("BinaryMask: dimensions must be >= 1");
  if ((data_ > 1).any()) throw DomainError("BinaryMask: values must be 0 or 1");
}

BinaryMask BinaryMask::from_gray(const Plane<std::uint8_t>& gray, int threshold) {
  Plane<std::uint8_t> bin = (gray.cast<int>() >= threshold).cast<std::uint8_t>();
  return BinaryMask(std::move(bin));
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(data_.cast<std::size_t>().sum());
}

UnitMap::UnitMap(int width, int height) {
  if (width < 1 || height < 1) throw ShapeError("UnitMap: dimensions must be >= 1");
  data_ = Plane<double>::Zero(height, width);
}

UnitMap::UnitMap(Plane<double> data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) throw ShapeError("UnitMap: dimensions must be >= 1");
  if (!data_.allFinite() || (data_ < 0.0).any() || (data_ > 1.0).any()) {
    throw DomainError("UnitMap: values must lie in [0,1]");
  }
}

Plane<std::uint8_t> UnitMap::to_gray() const {
  return data_.unaryExpr([](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * v)); });
}

UnitMap UnitMap::from_gray(const Plane<std::uint8_t>& gray) {
  return UnitMap(gray.cast<double>() / 255.0);
}

}  // namespace spotlight
