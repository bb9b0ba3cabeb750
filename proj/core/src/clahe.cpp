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

#include "cxrprep/clahe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cxrprep/error.hpp"
#include "cxrprep/parallel.hpp"

namespace cxrprep::clahe {

void Params::validate() const {
  if (grid_cols < 1 || grid_rows < 1) fail(ErrorCode::kInvalidArgument, "CLAHE grid must be >= 1x1");
  if (!(clip_limit > 0)) fail(ErrorCode::kInvalidArgument, "CLAHE clip limit must be > 0");
  if (bins < 2) fail(ErrorCode::kInvalidArgument, "CLAHE bins must be >= 2");
}

std::uint64_t clip_threshold(const Histogram& h, double clip_limit) {
  if (std::isinf(clip_limit)) return UINT64_MAX;
  const double t = std::floor(clip_limit * static_cast<double>(h.total) /
                              static_cast<double>(h.bins.size()));
  if (t >= 1.8e19) return UINT64_MAX;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(t));
}

Histogram clip_and_redistribute(const Histogram& h, double clip_limit) {
  const std::uint64_t limit = clip_threshold(h, clip_limit);
  Histogram out = h;
  std::uint64_t excess = 0;
  for (auto& b : out.bins) {
    if (b > limit) {
      excess += b - limit;
      b = limit;
    }
  }
  if (excess == 0) return out;
  const std::size_t n = out.bins.size();
  const std::uint64_t share = excess / n;
  const std::uint64_t remainder = excess % n;
  for (std::size_t i = 0; i < n; ++i) out.bins[i] += share + (i < remainder ? 1 : 0);
  return out;
}

TileMapping build_tile_mapping(const Histogram& h, int bit_depth) {
  if (h.total == 0) fail(ErrorCode::kInvalidArgument, "tile histogram is empty");
  const std::uint64_t top = (std::uint64_t{1} << bit_depth) - 1;
  TileMapping m;
  m.lut.resize(h.bins.size());
  std::uint64_t cdf = 0;
  for (std::size_t v = 0; v < h.bins.size(); ++v) {
    cdf += h.bins[v];
    m.lut[v] = static_cast<std::uint32_t>((2 * cdf * top + h.total) / (2 * h.total));
  }
  return m;
}

namespace {

// Along one axis, output coordinate p is expressed against the tile-centre
// lattice in half-pixel units: centre j sits at (2j + 1) * tile / 2.
// Weight of the upper neighbour is num / (2 * tile).
struct AxisTap {
  int lo;
  int hi;
  std::int64_t num;  // weight of hi, over den
};

std::vector<AxisTap> axis_taps(int length, int tile, int tiles) {
  std::vector<AxisTap> taps(static_cast<std::size_t>(length));
  const std::int64_t den = 2 * static_cast<std::int64_t>(tile);
  for (int p = 0; p < length; ++p) {
    const std::int64_t offset = 2 * static_cast<std::int64_t>(p) + 1 - tile;  // 2p+1 - centre_0*2
    if (offset < 0) {
      taps[static_cast<std::size_t>(p)] = {0, 0, 0};
      continue;
    }
    const std::int64_t j = offset / den;
    if (j >= tiles - 1) {
      taps[static_cast<std::size_t>(p)] = {tiles - 1, tiles - 1, 0};
      continue;
    }
    taps[static_cast<std::size_t>(p)] = {static_cast<int>(j), static_cast<int>(j + 1),
                                         offset - j * den};
  }
  return taps;
}

}  // namespace

GrayImage apply_clahe(const GrayImage& img, const Params& params, unsigned workers) {
  params.validate();
  if (img.width() < params.grid_cols || img.height() < params.grid_rows) {
    fail(ErrorCode::kImageTooSmall,
         "image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
             " is smaller than the CLAHE grid " + std::to_string(params.grid_cols) + "x" +
             std::to_string(params.grid_rows));
  }
  const auto bins = static_cast<std::size_t>(params.bins);
  if (bins > (std::size_t{1} << img.bit_depth())) {
    fail(ErrorCode::kInvalidArgument, "CLAHE bins exceed the intensity range");
  }
  const int cols = params.grid_cols;
  const int rows = params.grid_rows;
  const int tile_w = (img.width() + cols - 1) / cols;
  const int tile_h = (img.height() + rows - 1) / rows;
  const int depth = img.bit_depth();

  // Per-pixel bins, shared by the histogram and the mapping pass.
  std::vector<std::uint16_t> bin_of(img.pixels().size());
  {
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
      bin_of[i] = static_cast<std::uint16_t>(intensity_bin(px[i], bins, depth));
    }
  }

  std::vector<TileMapping> maps(static_cast<std::size_t>(rows * cols));
  parallel_for(maps.size(), workers, [&](std::size_t t) {
    const int ty = static_cast<int>(t) / cols;
    const int tx = static_cast<int>(t) % cols;
    Histogram h;
    h.bins.assign(bins, 0);
    h.total = static_cast<std::uint64_t>(tile_w) * tile_h;
    for (int y = ty * tile_h; y < (ty + 1) * tile_h; ++y) {
      const int sy = std::min(y, img.height() - 1);
      const std::uint16_t* row = bin_of.data() + static_cast<std::size_t>(sy) * img.width();
      for (int x = tx * tile_w; x < (tx + 1) * tile_w; ++x) {
        ++h.bins[row[std::min(x, img.width() - 1)]];
      }
    }
    maps[t] = build_tile_mapping(clip_and_redistribute(h, params.clip_limit), depth);
  });

  const auto xt = axis_taps(img.width(), tile_w, cols);
  const auto yt = axis_taps(img.height(), tile_h, rows);
  const std::uint64_t den_x = 2 * static_cast<std::uint64_t>(tile_w);
  const std::uint64_t den_y = 2 * static_cast<std::uint64_t>(tile_h);
  const std::uint64_t den = den_x * den_y;

  GrayImage out(img.width(), img.height(), depth);
  parallel_for(static_cast<std::size_t>(img.height()), workers, [&](std::size_t yy) {
    const int y = static_cast<int>(yy);
    const AxisTap& ty = yt[yy];
    const std::uint64_t wy1 = static_cast<std::uint64_t>(ty.num);
    const std::uint64_t wy0 = den_y - wy1;
    const std::uint16_t* brow = bin_of.data() + yy * static_cast<std::size_t>(img.width());
    auto dst = out.row(y);
    for (int x = 0; x < img.width(); ++x) {
      const AxisTap& tx = xt[static_cast<std::size_t>(x)];
      const std::uint64_t wx1 = static_cast<std::uint64_t>(tx.num);
      const std::uint64_t wx0 = den_x - wx1;
      const std::size_t b = brow[x];
      const auto& m00 = maps[static_cast<std::size_t>(ty.lo * cols + tx.lo)].lut;
      const auto& m01 = maps[static_cast<std::size_t>(ty.lo * cols + tx.hi)].lut;
      const auto& m10 = maps[static_cast<std::size_t>(ty.hi * cols + tx.lo)].lut;
      const auto& m11 = maps[static_cast<std::size_t>(ty.hi * cols + tx.hi)].lut;
      const std::uint64_t num = wy0 * (wx0 * m00[b] + wx1 * m01[b]) +
                                wy1 * (wx0 * m10[b] + wx1 * m11[b]);
      dst[x] = static_cast<std::uint16_t>((2 * num + den) / (2 * den));
    }
  });
  return out;
}

}  // namespace cxrprep::clahe
