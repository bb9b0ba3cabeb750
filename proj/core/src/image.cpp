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

#include "cxrprep/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cxrprep/error.hpp"

namespace cxrprep {

namespace {

void check_shape(int width, int height, int bit_depth) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::kInvalidArgument, "image dimensions must be >= 1, got " +
                                          std::to_string(width) + "x" + std::to_string(height));
  }
  if (bit_depth != 8 && bit_depth != 16) {
    fail(ErrorCode::kUnsupportedFormat, "unsupported bit depth " + std::to_string(bit_depth));
  }
}

}  // namespace

GrayImage::GrayImage(int width, int height, int bit_depth, std::uint16_t fill)
    : width_(width), height_(height), bit_depth_(bit_depth) {
  check_shape(width, height, bit_depth);
  if (fill > max_value()) fail(ErrorCode::kInvalidArgument, "fill value exceeds bit depth");
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, int bit_depth, std::vector<std::uint16_t> pixels)
    : width_(width), height_(height), bit_depth_(bit_depth), pixels_(std::move(pixels)) {
  check_shape(width, height, bit_depth);
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorCode::kInvalidArgument, "pixel buffer size does not match dimensions");
  }
  const std::uint32_t limit = max_value();
  if (std::any_of(pixels_.begin(), pixels_.end(), [&](std::uint16_t v) { return v > limit; })) {
    fail(ErrorCode::kInvalidArgument, "pixel value exceeds bit depth");
  }
}

Histogram histogram(const GrayImage& img, std::size_t bins) {
  if (bins < 2 || bins > (std::size_t{1} << img.bit_depth())) {
    fail(ErrorCode::kInvalidArgument, "histogram bins must be in [2, 2^bit_depth]");
  }
  Histogram h;
  h.bins.assign(bins, 0);
  for (std::uint16_t v : img.pixels()) ++h.bins[intensity_bin(v, bins, img.bit_depth())];
  h.total = img.pixels().size();
  return h;
}

GrayImage downscale(const GrayImage& img, int target_width, int target_height) {
  if (target_width < 1 || target_height < 1) {
    fail(ErrorCode::kInvalidArgument, "target size must be >= 1");
  }
  if (target_width == img.width() && target_height == img.height()) return img;

  // Per-axis source coordinate: (dst + 0.5) * src / dst - 0.5, clamped.
  struct Tap {
    int lo;
    int hi;
    double frac;
  };
  auto taps = [](int src, int dst) {
    std::vector<Tap> out(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
      double s = (i + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(src - 1));
      const int lo = static_cast<int>(std::floor(s));
      const int hi = std::min(lo + 1, src - 1);
      out[static_cast<std::size_t>(i)] = {lo, hi, s - lo};
    }
    return out;
  };
  const auto xs = taps(img.width(), target_width);
  const auto ys = taps(img.height(), target_height);

  GrayImage out(target_width, target_height, img.bit_depth());
  const double limit = img.max_value();
  for (int y = 0; y < target_height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    const auto r0 = img.row(ty.lo);
    const auto r1 = img.row(ty.hi);
    auto dst = out.row(y);
    for (int x = 0; x < target_width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      const double top = r0[tx.lo] + (r0[tx.hi] - static_cast<double>(r0[tx.lo])) * tx.frac;
      const double bottom = r1[tx.lo] + (r1[tx.hi] - static_cast<double>(r1[tx.lo])) * tx.frac;
      const double v = top + (bottom - top) * ty.frac;
      dst[x] = static_cast<std::uint16_t>(std::clamp(std::floor(v + 0.5), 0.0, limit));
    }
  }
  return out;
}

GrayImage to_8bit(const GrayImage& img) {
  if (img.bit_depth() == 8) return img;
  const auto [lo_it, hi_it] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const std::uint64_t lo = *lo_it;
  const std::uint64_t range = *hi_it - lo;
  GrayImage out(img.width(), img.height(), 8);
  auto dst = out.pixels();
  const auto src = img.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    // round((v - lo) * 255 / range), half up, in integers.
    dst[i] = range == 0 ? 0
                        : static_cast<std::uint16_t>(((src[i] - lo) * 255 * 2 + range) / (2 * range));
  }
  return out;
}

}  // namespace cxrprep
