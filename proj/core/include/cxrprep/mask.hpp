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
#include <vector>

#include "cxrprep/image.hpp"

namespace cxrprep::mask {

// Lung segmentation raster. native_resolution is the side length at which
// margins are specified (1024 for CheXmask).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, int native_resolution = 1024);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits, int native_resolution = 1024);

  int width() const { return width_; }
  int height() const { return height_; }
  int native_resolution() const { return native_resolution_; }

  bool at(int row, int col) const { return bits_[index(row, col)] != 0; }
  void set(int row, int col, bool value = true) { bits_[index(row, col)] = value ? 1 : 0; }

  std::size_t count() const;
  bool any() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const BinaryMask& o) const {
    return width_ == o.width_ && height_ == o.height_ && bits_ == o.bits_;
  }

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  int native_resolution_ = 1024;
  std::vector<std::uint8_t> bits_;
};

// Inclusive pixel bounds.
struct BBox {
  int row_min = 0;
  int row_max = 0;
  int col_min = 0;
  int col_max = 0;

  int height() const { return row_max - row_min + 1; }
  int width() const { return col_max - col_min + 1; }
  bool operator==(const BBox&) const = default;
};

// Nonzero pixels are foreground.
BinaryMask from_image(const GrayImage& img, int native_resolution = 1024);

// Squared Euclidean distance from each pixel to the nearest set pixel
// (exact, linear time). Entries are INT64_MAX when the mask is empty.
std::vector<std::int64_t> squared_distance_transform(const BinaryMask& mask);

// Disk dilation: a pixel is set iff a set pixel lies within Euclidean
// distance <= radius.
BinaryMask dilate(const BinaryMask& mask, int radius);

// Nearest-neighbour resample: source index floor((2i + 1) * src / (2 * dst)).
BinaryMask resample_mask(const BinaryMask& mask, int target_width, int target_height);

// Margin in pixels at 'width' for a margin defined at native resolution,
// rounded to nearest (half up).
int scaled_margin(int margin_px, int native_resolution, int width);

// Keeps pixels under the mask, sets the rest to background.
// Throws DimensionMismatch, InvalidArgument if background exceeds bit depth.
GrayImage apply_mask(const GrayImage& img, const BinaryMask& mask, std::uint16_t background = 0);

// Minimal box around all set pixels. Throws EmptyMask.
BBox bounding_box(const BinaryMask& mask);

// Maps a box on a mask grid to the covering box on an image grid of a
// different resolution, clamped to the image.
BBox scale_box(const BBox& box, int from_width, int from_height, int to_width, int to_height);

// Throws OutOfBounds when the box is inverted or leaves the image.
GrayImage crop(const GrayImage& img, const BBox& box);

// Pads to a centred square with the background value.
GrayImage letterbox(const GrayImage& img, std::uint16_t background = 0);

}  // namespace cxrprep::mask
