#pragma once

#include "spotlight/types.hpp"

#include <filesystem>
#include <stdexcept>

namespace spotlight {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a grayscale PNG as 8-bit samples. Color images are rejected.
Plane<std::uint8_t> read_gray_png(const std::filesystem::path& path);

/// Writes a single-channel 8-bit PNG. The byte stream depends only on the pixels.
void write_gray_png(const std::filesystem::path& path, const Plane<std::uint8_t>& image);

}  // namespace spotlight
