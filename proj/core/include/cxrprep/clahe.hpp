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
#include <limits>
#include <vector>

#include "cxrprep/image.hpp"

namespace cxrprep::clahe {

struct Params {
  int grid_cols = 8;
  int grid_rows = 8;
  // Multiple of the mean per-bin count of a tile. +inf disables clipping.
  double clip_limit = 2.0;
  int bins = 256;

  void validate() const;
};

// Per-tile lookup table: histogram bin -> output intensity.
struct TileMapping {
  std::vector<std::uint32_t> lut;
};

// Absolute clip threshold: max(1, floor(clip_limit * total / bins)).
// Returns UINT64_MAX when clipping is disabled.
std::uint64_t clip_threshold(const Histogram& h, double clip_limit);

// Clips every bin at the threshold, then spreads the excess uniformly in one
// pass: excess / bins to every bin and one more count to each of the first
// (excess % bins) bins. Total mass is preserved exactly; a bin may end up
// above the threshold by the per-bin share (plus one).
Histogram clip_and_redistribute(const Histogram& h, double clip_limit);

// lut[v] = round(cdf(v) / total * (2^bit_depth - 1)), half up.
TileMapping build_tile_mapping(const Histogram& h, int bit_depth);

// Contrast limited adaptive histogram equalization over a grid of
// grid_rows x grid_cols tiles. Images whose sides are not multiples of the
// grid are edge-replicated on the right/bottom for the histogram pass.
// Pixels blend the mappings of the nearest tile centres: bilinearly in the
// interior, linearly in the edge bands, a single mapping in the corners.
// The blend is evaluated in exact integer arithmetic, so the result is
// bit-identical for any worker count.
// Throws ImageTooSmall when width < grid_cols or height < grid_rows.
GrayImage apply_clahe(const GrayImage& img, const Params& params = {}, unsigned workers = 1);

}  // namespace cxrprep::clahe
