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

#include "testkit.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cxrprep/manifest.hpp"

namespace fs = std::filesystem;

namespace testkit {

TempDir::TempDir(const std::string& tag) {
  static std::uint64_t counter = 0;
  const auto base = fs::temp_directory_path();
  cxrprep::SeededRng rng(static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()),
                         ++counter);
  for (;;) {
    path_ = base / (tag + "-" + std::to_string(rng.next() % 1000000000ULL));
    if (fs::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cxrprep::GrayImage random_image(cxrprep::SeededRng& rng, int width, int height, int bit_depth) {
  std::vector<std::uint16_t> px(static_cast<std::size_t>(width) * height);
  const std::uint64_t levels = std::uint64_t{1} << bit_depth;
  // Mix of flat regions and noise so tiles see both peaked and spread histograms.
  const auto base = static_cast<std::uint16_t>(rng.below(levels));
  const int mode = static_cast<int>(rng.below(3));
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (mode == 0) {
      px[i] = static_cast<std::uint16_t>(rng.below(levels));
    } else if (mode == 1) {
      px[i] = rng.below(4) == 0 ? static_cast<std::uint16_t>(rng.below(levels)) : base;
    } else {
      const std::uint64_t spread = std::max<std::uint64_t>(1, levels / 16);
      px[i] = static_cast<std::uint16_t>(std::min<std::uint64_t>(levels - 1, base + rng.below(spread)));
    }
  }
  return cxrprep::GrayImage(width, height, bit_depth, std::move(px));
}

cxrprep::mask::BinaryMask random_mask(cxrprep::SeededRng& rng, int width, int height,
                                      double density) {
  cxrprep::mask::BinaryMask m(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (rng.uniform() < density) m.set(r, c);
    }
  }
  return m;
}

namespace {

struct Tap {
  int lo;
  int hi;
  std::int64_t w_hi;  // over 2 * tile
};

// Position of pixel p against the tile-centre lattice, all in half pixels.
Tap locate(int p, int tile, int tiles) {
  const std::int64_t u = 2 * static_cast<std::int64_t>(p) + 1;
  const std::int64_t first = tile;
  const std::int64_t last = static_cast<std::int64_t>(2 * tiles - 1) * tile;
  if (u <= first) return {0, 0, 0};
  if (u >= last) return {tiles - 1, tiles - 1, 0};
  int j = 0;
  while (static_cast<std::int64_t>(2 * (j + 1) + 1) * tile <= u) ++j;
  return {j, j + 1, u - static_cast<std::int64_t>(2 * j + 1) * tile};
}

}  // namespace

cxrprep::GrayImage naive_ahe(const cxrprep::GrayImage& img, int grid_cols, int grid_rows,
                             int bins) {
  const int w = img.width();
  const int h = img.height();
  const int tw = (w + grid_cols - 1) / grid_cols;
  const int th = (h + grid_rows - 1) / grid_rows;
  const std::uint64_t top = img.max_value();
  const std::uint64_t levels = std::uint64_t{1} << img.bit_depth();
  auto bin_of = [&](std::uint32_t v) {
    return static_cast<int>(static_cast<std::uint64_t>(v) * static_cast<std::uint64_t>(bins) / levels);
  };
  auto padded = [&](int r, int c) { return img.at(std::min(r, h - 1), std::min(c, w - 1)); };

  // maps[ty][tx][b] = equalized value for bin b in that tile.
  std::vector<std::vector<std::vector<std::uint64_t>>> maps(
      static_cast<std::size_t>(grid_rows),
      std::vector<std::vector<std::uint64_t>>(static_cast<std::size_t>(grid_cols)));
  const std::uint64_t total = static_cast<std::uint64_t>(tw) * th;
  for (int ty = 0; ty < grid_rows; ++ty) {
    for (int tx = 0; tx < grid_cols; ++tx) {
      std::vector<std::uint64_t> at_or_below(static_cast<std::size_t>(bins), 0);
      for (int r = ty * th; r < (ty + 1) * th; ++r) {
        for (int c = tx * tw; c < (tx + 1) * tw; ++c) {
          const int b = bin_of(padded(r, c));
          for (int k = b; k < bins; ++k) ++at_or_below[static_cast<std::size_t>(k)];
        }
      }
      auto& lut = maps[static_cast<std::size_t>(ty)][static_cast<std::size_t>(tx)];
      lut.resize(static_cast<std::size_t>(bins));
      for (int b = 0; b < bins; ++b) {
        const std::uint64_t num = at_or_below[static_cast<std::size_t>(b)] * top;
        std::uint64_t q = num / total;
        if (2 * (num % total) >= total) ++q;
        lut[static_cast<std::size_t>(b)] = q;
      }
    }
  }

  cxrprep::GrayImage out(w, h, img.bit_depth());
  const std::uint64_t den = 4 * static_cast<std::uint64_t>(tw) * th;
  for (int r = 0; r < h; ++r) {
    const Tap ty = locate(r, th, grid_rows);
    for (int c = 0; c < w; ++c) {
      const Tap tx = locate(c, tw, grid_cols);
      const auto b = static_cast<std::size_t>(bin_of(img.at(r, c)));
      auto m = [&](int yy, int xx) {
        return maps[static_cast<std::size_t>(yy)][static_cast<std::size_t>(xx)][b];
      };
      const std::uint64_t wy1 = static_cast<std::uint64_t>(ty.w_hi);
      const std::uint64_t wy0 = 2 * static_cast<std::uint64_t>(th) - wy1;
      const std::uint64_t wx1 = static_cast<std::uint64_t>(tx.w_hi);
      const std::uint64_t wx0 = 2 * static_cast<std::uint64_t>(tw) - wx1;
      const std::uint64_t num = wy0 * wx0 * m(ty.lo, tx.lo) + wy0 * wx1 * m(ty.lo, tx.hi) +
                                wy1 * wx0 * m(ty.hi, tx.lo) + wy1 * wx1 * m(ty.hi, tx.hi);
      std::uint64_t q = num / den;
      if (2 * (num % den) >= den) ++q;
      out.at(r, c) = static_cast<std::uint16_t>(q);
    }
  }
  return out;
}

cxrprep::mask::BinaryMask brute_dilate(const cxrprep::mask::BinaryMask& m, int radius) {
  cxrprep::mask::BinaryMask out(m.width(), m.height(), m.native_resolution());
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      if (!m.at(r, c)) continue;
      for (int dr = -radius; dr <= radius; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
          if (dr * dr + dc * dc > radius * radius) continue;
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr >= 0 && rr < m.height() && cc >= 0 && cc < m.width()) out.set(rr, cc);
        }
      }
    }
  }
  return out;
}

double pair_count_auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  std::uint64_t halves = 0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) halves += 2;
      else if (scores[i] == scores[j]) halves += 1;
    }
  }
  return static_cast<double>(halves) / static_cast<double>(2 * pairs);
}

MetadataFixture write_metadata_fixture(const fs::path& dir, int n, std::uint64_t seed) {
  cxrprep::SeededRng rng(seed, 99);
  const auto labels = cxrprep::manifest::default_labels();
  static const char* kViews[] = {"AP", "PA", "PA", "AP", "LATERAL", "LL"};
  static const char* kRaces[] = {"WHITE", "BLACK/AFRICAN AMERICAN", "ASIAN - CHINESE",
                                 "HISPANIC/LATINO - PUERTO RICAN", "WHITE - OTHER EUROPEAN",
                                 "OTHER", "UNKNOWN", "BLACK/CAPE VERDEAN", "ASIAN",
                                 "HISPANIC OR LATINO"};
  std::ostringstream rec;
  std::ostringstream demo;
  std::ostringstream rca;
  rec << "record_id,patient_id,view,image_path,mask_path";
  for (const auto& l : labels) rec << ',' << l;
  rec << '\n';
  demo << "patient_id,race\n";
  rca << "record_id,rca_score\n";

  int patient = 0;
  int left_for_patient = 0;
  for (int i = 0; i < n; ++i) {
    if (left_for_patient == 0) {
      ++patient;
      left_for_patient = 1 + static_cast<int>(rng.below(3));
      demo << "p" << patient << ',' << kRaces[rng.below(std::size(kRaces))] << '\n';
    }
    --left_for_patient;
    char id[16];
    std::snprintf(id, sizeof id, "r%06d", i);
    const char* view = rng.below(100) < 15 ? kViews[4 + rng.below(2)] : kViews[rng.below(4)];
    rec << id << ",p" << patient << ',' << view << ",img/" << id << ".png,mask/" << id << ".png";
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const auto u = rng.below(100);
      rec << ',' << (u < 18 ? "1.0" : u < 60 ? "0.0" : u < 70 ? "-1.0" : "");
    }
    rec << '\n';
    const auto q = rng.below(100);
    if (q < 3) continue;  // no score
    if (q < 8) {
      rca << id << ",0.70\n";
    } else {
      rca << id << ',' << 0.5 + 0.5 * rng.uniform() << '\n';
    }
  }
  MetadataFixture f{dir / "records.csv", dir / "demographics.csv", dir / "rca.csv"};
  write_text(f.records, rec.str());
  write_text(f.demographics, demo.str());
  write_text(f.rca, rca.str());
  return f;
}

namespace {

double normal(cxrprep::SeededRng& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

ProbeData shifted_groups(std::size_t n, int side, double shift, std::uint64_t seed) {
  cxrprep::SeededRng rng(seed, 7);
  ProbeData d;
  d.pixels.reserve(n);
  d.labels.reserve(n);
  const std::size_t count = static_cast<std::size_t>(side) * side;
  for (std::size_t i = 0; i < n; ++i) {
    const int group = static_cast<int>(rng.below(2));
    const double mean = 110.0 + 2.0 * normal(rng) + (group == 1 ? shift : 0.0);
    std::vector<std::uint16_t> px(count);
    for (auto& p : px) {
      const double v = std::round(mean + 30.0 * normal(rng));
      p = static_cast<std::uint16_t>(std::clamp(v, 0.0, 255.0));
    }
    d.pixels.push_back(std::move(px));
    d.labels.push_back(group);
  }
  return d;
}

cxrprep::metrics::PredictionSet synthetic_predictions(cxrprep::metrics::Method method,
                                                      std::int64_t seed,
                                                      cxrprep::metrics::Dataset dataset,
                                                      std::size_t rows) {
  using namespace cxrprep::metrics;
  cxrprep::SeededRng rng(static_cast<std::uint64_t>(seed) * 31 + static_cast<std::uint64_t>(method),
                         static_cast<std::uint64_t>(dataset) + 11);
  PredictionSet s;
  s.method = method;
  s.seed = seed;
  s.dataset = dataset;
  s.labels = {"Atelectasis", "Edema", "Pleural Effusion"};
  s.race_groups = {"White", "Black", "Asian", "Hispanic"};
  for (std::size_t i = 0; i < rows; ++i) {
    PredictionRow r;
    r.sample_id = "s" + std::to_string(i);
    const auto g = rng.below(4);
    r.race_group = s.race_groups[g];
    for (std::size_t k = 0; k < s.labels.size(); ++k) {
      const auto u = rng.below(10);
      const std::int8_t t = u < 3 ? 1 : u < 9 ? 0 : kAbsent;
      r.truth.push_back(t);
      const double signal = t == 1 ? 0.25 : 0.0;
      r.scores.push_back(std::round(std::clamp(0.3 + signal + 0.3 * rng.uniform(), 0.0, 1.0) * 1e4) / 1e4);
    }
    double sum = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double v = rng.uniform() + (k == g ? 0.4 : 0.0);
      r.race_scores.push_back(v);
      sum += v;
    }
    for (auto& v : r.race_scores) v = std::round(v / sum * 1e4) / 1e4;
    s.rows.push_back(std::move(r));
  }
  return s;
}

}  // namespace testkit
