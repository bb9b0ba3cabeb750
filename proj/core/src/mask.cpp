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

#include "cxrprep/mask.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "cxrprep/error.hpp"

namespace cxrprep::mask {

BinaryMask::BinaryMask(int width, int height, int native_resolution)
    : BinaryMask(width, height,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                           static_cast<std::size_t>(std::max(height, 0))),
                 native_resolution) {}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits,
                       int native_resolution)
    : width_(width), height_(height), native_resolution_(native_resolution), bits_(std::move(bits)) {
  if (width < 1 || height < 1) fail(ErrorCode::kInvalidArgument, "mask dimensions must be >= 1");
  if (native_resolution < 1) fail(ErrorCode::kInvalidArgument, "native resolution must be >= 1");
  if (bits_.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorCode::kInvalidArgument, "mask buffer size does not match dimensions");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool BinaryMask::any() const {
  return std::find(bits_.begin(), bits_.end(), std::uint8_t{1}) != bits_.end();
}

BinaryMask from_image(const GrayImage& img, int native_resolution) {
  std::vector<std::uint8_t> bits(img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), bits.begin(),
                 [](std::uint16_t v) { return static_cast<std::uint8_t>(v != 0); });
  return BinaryMask(img.width(), img.height(), std::move(bits), native_resolution);
}

std::vector<std::int64_t> squared_distance_transform(const BinaryMask& mask) {
  // Meijster, Roerdink & Hesselink: column pass then row lower envelope,
  // all in integers.
  const int w = mask.width();
  const int h = mask.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (!mask.any()) return std::vector<std::int64_t>(n, std::numeric_limits<std::int64_t>::max());

  const std::int64_t inf = static_cast<std::int64_t>(w) + h;
  std::vector<std::int64_t> g(n);
  for (int x = 0; x < w; ++x) {
    auto G = [&](int y) -> std::int64_t& { return g[static_cast<std::size_t>(y) * w + x]; };
    G(0) = mask.at(0, x) ? 0 : inf;
    for (int y = 1; y < h; ++y) G(y) = mask.at(y, x) ? 0 : std::min(inf, G(y - 1) + 1);
    for (int y = h - 2; y >= 0; --y) {
      if (G(y + 1) < G(y)) G(y) = G(y + 1) + 1;
    }
  }

  std::vector<std::int64_t> dt(n);
  std::vector<int> s(static_cast<std::size_t>(w));
  std::vector<std::int64_t> t(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    const std::int64_t* gr = g.data() + static_cast<std::size_t>(y) * w;
    auto f = [&](std::int64_t x, int i) { return (x - i) * (x - i) + gr[i] * gr[i]; };
    // First x at which parabola u is no worse than parabola i (i < u).
    auto sep = [&](int i, int u) -> std::int64_t {
      const std::int64_t num = static_cast<std::int64_t>(u) * u - static_cast<std::int64_t>(i) * i +
                               gr[u] * gr[u] - gr[i] * gr[i];
      const std::int64_t den = 2 * static_cast<std::int64_t>(u - i);
      std::int64_t q = num / den;
      if (num % den != 0 && num < 0) --q;
      return q;
    };
    int q = 0;
    s[0] = 0;
    t[0] = 0;
    for (int u = 1; u < w; ++u) {
      while (q >= 0 && f(t[static_cast<std::size_t>(q)], s[static_cast<std::size_t>(q)]) > f(t[static_cast<std::size_t>(q)], u)) --q;
      if (q < 0) {
        q = 0;
        s[0] = u;
      } else {
        const std::int64_t next = 1 + sep(s[static_cast<std::size_t>(q)], u);
        if (next < w) {
          ++q;
          s[static_cast<std::size_t>(q)] = u;
          t[static_cast<std::size_t>(q)] = next;
        }
      }
    }
    std::int64_t* out = dt.data() + static_cast<std::size_t>(y) * w;
    for (int u = w - 1; u >= 0; --u) {
      out[u] = f(u, s[static_cast<std::size_t>(q)]);
      if (u == t[static_cast<std::size_t>(q)]) --q;
    }
  }
  return dt;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius < 0) fail(ErrorCode::kInvalidArgument, "dilation radius must be >= 0");
  if (radius == 0 || !mask.any()) return mask;
  const auto dt = squared_distance_transform(mask);
  const std::int64_t r2 = static_cast<std::int64_t>(radius) * radius;
  std::vector<std::uint8_t> bits(dt.size());
  std::transform(dt.begin(), dt.end(), bits.begin(),
                 [r2](std::int64_t d) { return static_cast<std::uint8_t>(d <= r2); });
  return BinaryMask(mask.width(), mask.height(), std::move(bits), mask.native_resolution());
}

BinaryMask resample_mask(const BinaryMask& mask, int target_width, int target_height) {
  if (target_width < 1 || target_height < 1) {
    fail(ErrorCode::kInvalidArgument, "target size must be >= 1");
  }
  if (target_width == mask.width() && target_height == mask.height()) return mask;
  auto source = [](int i, int src, int dst) {
    return static_cast<int>(std::min<std::int64_t>(
        (2 * static_cast<std::int64_t>(i) + 1) * src / (2 * static_cast<std::int64_t>(dst)),
        src - 1));
  };
  BinaryMask out(target_width, target_height, mask.native_resolution());
  for (int y = 0; y < target_height; ++y) {
    const int sy = source(y, mask.height(), target_height);
    for (int x = 0; x < target_width; ++x) {
      out.set(y, x, mask.at(sy, source(x, mask.width(), target_width)));
    }
  }
  return out;
}

int scaled_margin(int margin_px, int native_resolution, int width) {
  if (margin_px < 0 || native_resolution < 1) {
    fail(ErrorCode::kInvalidArgument, "margin must be >= 0 and native resolution >= 1");
  }
  const std::int64_t num = static_cast<std::int64_t>(margin_px) * width;
  return static_cast<int>((2 * num + native_resolution) / (2 * static_cast<std::int64_t>(native_resolution)));
}

GrayImage apply_mask(const GrayImage& img, const BinaryMask& mask, std::uint16_t background) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    fail(ErrorCode::kDimensionMismatch,
         "mask " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
             " does not match image " + std::to_string(img.width()) + "x" +
             std::to_string(img.height()));
  }
  if (background > img.max_value()) {
    fail(ErrorCode::kInvalidArgument, "background value exceeds bit depth");
  }
  GrayImage out = img;
  auto px = out.pixels();
  const auto& bits = mask.bits();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!bits[i]) px[i] = background;
  }
  return out;
}

BBox bounding_box(const BinaryMask& mask) {
  BBox box{mask.height(), -1, mask.width(), -1};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(y, x)) continue;
      box.row_min = std::min(box.row_min, y);
      box.row_max = std::max(box.row_max, y);
      box.col_min = std::min(box.col_min, x);
      box.col_max = std::max(box.col_max, x);
    }
  }
  if (box.row_max < 0) fail(ErrorCode::kEmptyMask, "mask has no foreground pixels");
  return box;
}

BBox scale_box(const BBox& box, int from_width, int from_height, int to_width, int to_height) {
  if (from_width == to_width && from_height == to_height) return box;
  auto lo = [](int v, int from, int to) {
    return static_cast<int>(static_cast<std::int64_t>(v) * to / from);
  };
  // Last destination pixel whose extent overlaps source pixel v.
  auto hi = [](int v, int from, int to) {
    const std::int64_t end = (static_cast<std::int64_t>(v) + 1) * to;
    return static_cast<int>((end + from - 1) / from - 1);
  };
  BBox out;
  out.row_min = std::clamp(lo(box.row_min, from_height, to_height), 0, to_height - 1);
  out.row_max = std::clamp(hi(box.row_max, from_height, to_height), out.row_min, to_height - 1);
  out.col_min = std::clamp(lo(box.col_min, from_width, to_width), 0, to_width - 1);
  out.col_max = std::clamp(hi(box.col_max, from_width, to_width), out.col_min, to_width - 1);
  return out;
}

GrayImage crop(const GrayImage& img, const BBox& box) {
  if (box.row_min < 0 || box.col_min < 0 || box.row_min > box.row_max ||
      box.col_min > box.col_max || box.row_max >= img.height() || box.col_max >= img.width()) {
    fail(ErrorCode::kOutOfBounds,
         "box rows " + std::to_string(box.row_min) + ".." + std::to_string(box.row_max) +
             ", cols " + std::to_string(box.col_min) + ".." + std::to_string(box.col_max) +
             " outside " + std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  GrayImage out(box.width(), box.height(), img.bit_depth());
  for (int y = 0; y < out.height(); ++y) {
    const auto src = img.row(box.row_min + y).subspan(static_cast<std::size_t>(box.col_min),
                                                      static_cast<std::size_t>(box.width()));
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

GrayImage letterbox(const GrayImage& img, std::uint16_t background) {
  const int side = std::max(img.width(), img.height());
  if (side == img.width() && side == img.height()) return img;
  GrayImage out(side, side, img.bit_depth(), background);
  const int oy = (side - img.height()) / 2;
  const int ox = (side - img.width()) / 2;
  for (int y = 0; y < img.height(); ++y) {
    std::copy(img.row(y).begin(), img.row(y).end(), out.row(oy + y).begin() + ox);
  }
  return out;
}

}  // namespace cxrprep::mask
