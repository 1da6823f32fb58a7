#include "spotlight/image_io.hpp"

#include <png.h>

#include <cstring>

namespace spotlight {

Plane<std::uint8_t> read_gray_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;

  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError(path.string() + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_COLOR) {
    png_image_free(&image);
    throw IoError(path.string() + ": expected a single-channel grayscale PNG");
  }
  image.format = PNG_FORMAT_GRAY;

  Plane<std::uint8_t> pixels(static_cast<Eigen::Index>(image.height),
                             static_cast<Eigen::Index>(image.width));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError(path.string() + ": " + image.message);
  }
  return pixels;
}

void write_gray_png(const std::filesystem::path& path, const Plane<std::uint8_t>& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(pixels.cols());
  image.height = static_cast<png_uint_32>(pixels.rows());
  image.format = PNG_FORMAT_GRAY;

  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw IoError(path.string() + ": " + image.message);
  }
}

}  // namespace spotlight
