/*
 * Copyright 2026 The cxrprep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cxrprep {

// Single-channel 8- or 16-bit raster, row-major. Pixels are stored as
// uint16_t for both depths; every value is < 2^bit_depth.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, int bit_depth, std::uint16_t fill = 0);
  GrayImage(int width, int height, int bit_depth, std::vector<std::uint16_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int bit_depth() const { return bit_depth_; }
  std::uint32_t max_value() const { return (1u << bit_depth_) - 1u; }
  bool empty() const { return pixels_.empty(); }

  std::uint16_t at(int row, int col) const {
    return pixels_[static_cast<std::size_t>(row) * width_ + col];
  }
  std::uint16_t& at(int row, int col) {
    return pixels_[static_cast<std::size_t>(row) * width_ + col];
  }

  std::span<const std::uint16_t> row(int r) const {
    return {pixels_.data() + static_cast<std::size_t>(r) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<std::uint16_t> row(int r) {
    return {pixels_.data() + static_cast<std::size_t>(r) * width_,
            static_cast<std::size_t>(width_)};
  }

  std::span<const std::uint16_t> pixels() const { return pixels_; }
  std::span<std::uint16_t> pixels() { return pixels_; }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int bit_depth_ = 8;
  std::vector<std::uint16_t> pixels_;
};

struct Histogram {
  std::vector<std::uint64_t> bins;
  std::uint64_t total = 0;

  std::size_t size() const { return bins.size(); }
  bool operator==(const Histogram&) const = default;
};

// Bin of intensity v: floor(v * bins / 2^bit_depth).
inline std::size_t intensity_bin(std::uint32_t value, std::size_t bins, int bit_depth) {
  return static_cast<std::size_t>((static_cast<std::uint64_t>(value) * bins) >> bit_depth);
}

// Requires 2 <= bins <= 2^bit_depth; throws InvalidArgument otherwise.
Histogram histogram(const GrayImage& img, std::size_t bins = 256);

// Bilinear resize with pixel centres at half-integer coordinates and edge
// clamping. Output keeps the input bit depth; values round half up.
GrayImage downscale(const GrayImage& img, int target_width, int target_height);

// Linear min-max rescale of a 16-bit image to 0..255. 8-bit images pass
// through unchanged; a constant 16-bit image maps to 0.
GrayImage to_8bit(const GrayImage& img);

// PGM (P2/P5) and PNG, single channel, 8 or 16 bit. Format is chosen from
// the file signature on load and from the extension on save.
// Errors: FileNotFound, UnsupportedFormat, CorruptData, IoError.
GrayImage load_image(const std::filesystem::path& path);
void save_image(const GrayImage& img, const std::filesystem::path& path);

// Encoded bytes for save_image's format choice; save_image writes exactly these.
std::vector<std::uint8_t> encode_png(const GrayImage& img);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

}  // namespace cxrprep
