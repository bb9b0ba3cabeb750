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

#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "cxrprep/error.hpp"
#include "cxrprep/image.hpp"

namespace cxrprep {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIoError, "short write to " + path.string());
}

// ---------------------------------------------------------------- PGM

class PgmReader {
 public:
  PgmReader(const std::vector<std::uint8_t>& data, const std::string& name)
      : data_(data), name_(name) {}

  GrayImage read() {
    const bool ascii = data_[1] == '2';
    pos_ = 2;
    const long width = next_int();
    const long height = next_int();
    const long maxval = next_int();
    if (width < 1 || height < 1 || width > (1L << 20) || height > (1L << 20)) {
      corrupt("bad dimensions");
    }
    if (maxval < 1 || maxval > 65535) corrupt("bad maxval");
    const int depth = maxval <= 255 ? 8 : 16;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<std::uint16_t> pixels(count);

    if (ascii) {
      for (auto& p : pixels) {
        const long v = next_int();
        if (v > maxval) corrupt("pixel exceeds maxval");
        p = static_cast<std::uint16_t>(v);
      }
    } else {
      // Exactly one whitespace byte separates the header from the raster.
      if (pos_ >= data_.size() || !std::isspace(data_[pos_])) corrupt("missing raster separator");
      ++pos_;
      const std::size_t bpp = depth == 8 ? 1 : 2;
      if (data_.size() - pos_ < count * bpp) corrupt("truncated raster");
      const std::uint8_t* src = data_.data() + pos_;
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t v = bpp == 1 ? src[i] : (src[2 * i] << 8) | src[2 * i + 1];
        if (v > static_cast<std::uint32_t>(maxval)) corrupt("pixel exceeds maxval");
        pixels[i] = static_cast<std::uint16_t>(v);
      }
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), depth, std::move(pixels));
  }

 private:
  [[noreturn]] void corrupt(const std::string& what) const {
    fail(ErrorCode::kCorruptData, name_ + ": PGM " + what);
  }

  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (std::isspace(data_[pos_])) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long next_int() {
    skip_space_and_comments();
    if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) corrupt("expected integer");
    long v = 0;
    while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
      v = v * 10 + (data_[pos_] - '0');
      if (v > (1L << 30)) corrupt("integer out of range");
      ++pos_;
    }
    return v;
  }

  const std::vector<std::uint8_t>& data_;
  std::string name_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- PNG

struct PngSource {
  const std::vector<std::uint8_t>* data;
  std::size_t pos;
};

struct PngFailure {
  std::string message;
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* failure = static_cast<PngFailure*>(png_get_error_ptr(png));
  failure->message = msg ? msg : "libpng error";
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

void png_read_fn(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->data->size() - src->pos < length) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->data->data() + src->pos, length);
  src->pos += length;
}

void png_write_fn(png_structp png, png_bytep in, png_size_t length) {
  auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  sink->insert(sink->end(), in, in + length);
}

void png_flush_fn(png_structp) {}

// The decode runs in a function with no non-trivial locals alive across
// setjmp, so longjmp from libpng cannot skip destructors.
struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

bool png_decode(png_structp png, png_infop info, PngSource* src, PngHeader* header,
                std::uint8_t* (*alloc)(void*, std::size_t), void* alloc_ctx, bool* unsupported) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, src, png_read_fn);
  png_read_info(png, info);
  header->width = png_get_image_width(png, info);
  header->height = png_get_image_height(png, info);
  header->bit_depth = png_get_bit_depth(png, info);
  header->color_type = png_get_color_type(png, info);
  if (header->color_type != PNG_COLOR_TYPE_GRAY ||
      (header->bit_depth != 8 && header->bit_depth != 16)) {
    *unsupported = true;
    return false;
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    *unsupported = true;
    return false;
  }
  if (header->width > (1u << 20) || header->height > (1u << 20)) {
    png_error(png, "image too large");
  }
  const std::size_t stride = png_get_rowbytes(png, info);
  std::uint8_t* buffer = alloc(alloc_ctx, stride * header->height);
  for (png_uint_32 y = 0; y < header->height; ++y) {
    png_read_row(png, buffer + stride * y, nullptr);
  }
  png_read_end(png, nullptr);
  return true;
}

GrayImage load_png(const std::vector<std::uint8_t>& data, const std::string& name) {
  PngFailure failure;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &failure, png_error_fn, png_warning_fn);
  if (!png) fail(ErrorCode::kIoError, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorCode::kIoError, "png_create_info_struct failed");
  }

  std::vector<std::uint8_t> raster;
  PngSource src{&data, 0};
  PngHeader header;
  bool unsupported = false;
  auto alloc = [](void* ctx, std::size_t n) {
    auto* v = static_cast<std::vector<std::uint8_t>*>(ctx);
    v->resize(n);
    return v->data();
  };
  const bool ok = png_decode(png, info, &src, &header, alloc, &raster, &unsupported);
  png_destroy_read_struct(&png, &info, nullptr);

  if (unsupported) {
    fail(ErrorCode::kUnsupportedFormat,
         name + ": only single-channel 8/16-bit grayscale PNG is supported (color type " +
             std::to_string(header.color_type) + ", depth " + std::to_string(header.bit_depth) +
             ")");
  }
  if (!ok) fail(ErrorCode::kCorruptData, name + ": " + failure.message);

  const std::size_t count = static_cast<std::size_t>(header.width) * header.height;
  std::vector<std::uint16_t> pixels(count);
  if (header.bit_depth == 8) {
    std::copy(raster.begin(), raster.begin() + static_cast<std::ptrdiff_t>(count), pixels.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      pixels[i] = static_cast<std::uint16_t>((raster[2 * i] << 8) | raster[2 * i + 1]);
    }
  }
  return GrayImage(static_cast<int>(header.width), static_cast<int>(header.height),
                   header.bit_depth, std::move(pixels));
}

bool png_encode(png_structp png, png_infop info, const GrayImage* img,
                std::vector<std::uint8_t>* sink, const std::vector<std::uint8_t>* raster) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, sink, png_write_fn, png_flush_fn);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img->width()),
               static_cast<png_uint_32>(img->height()), img->bit_depth(), PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(img->width()) * (img->bit_depth() / 8);
  for (int y = 0; y < img->height(); ++y) {
    png_write_row(png, raster->data() + stride * static_cast<std::size_t>(y));
  }
  png_write_end(png, nullptr);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  std::vector<std::uint8_t> raster;
  if (img.bit_depth() == 8) {
    raster.assign(img.pixels().begin(), img.pixels().end());
  } else {
    raster.reserve(img.pixels().size() * 2);
    for (std::uint16_t v : img.pixels()) {
      raster.push_back(static_cast<std::uint8_t>(v >> 8));
      raster.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
  }

  PngFailure failure;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &failure, png_error_fn, png_warning_fn);
  if (!png) fail(ErrorCode::kIoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(ErrorCode::kIoError, "png_create_info_struct failed");
  }
  std::vector<std::uint8_t> bytes;
  const bool ok = png_encode(png, info, &img, &bytes, &raster);
  png_destroy_write_struct(&png, &info);
  if (!ok) fail(ErrorCode::kIoError, "PNG encode failed: " + failure.message);
  return bytes;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" +
                             (img.bit_depth() == 8 ? "255" : "65535") + "\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + img.pixels().size() * (img.bit_depth() / 8));
  for (std::uint16_t v : img.pixels()) {
    if (img.bit_depth() == 16) bytes.push_back(static_cast<std::uint8_t>(v >> 8));
    bytes.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return bytes;
}

GrayImage load_image(const std::filesystem::path& path) {
  const auto data = read_file(path);
  const std::string name = path.string();
  static constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (data.size() >= 8 && std::equal(data.begin(), data.begin() + 8, kPngSignature)) {
    return load_png(data, name);
  }
  if (data.size() >= 2 && data[0] == 'P') {
    if (data[1] == '2' || data[1] == '5') return PgmReader(data, name).read();
    if (data[1] == '3' || data[1] == '6') {
      fail(ErrorCode::kUnsupportedFormat, name + ": color PPM is not supported");
    }
  }
  fail(ErrorCode::kUnsupportedFormat, name + ": not a PGM or PNG file");
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    write_file(path, encode_png(img));
  } else if (ext == ".pgm") {
    write_file(path, encode_pgm(img));
  } else {
    fail(ErrorCode::kUnsupportedFormat, path.string() + ": output must be .png or .pgm");
  }
}

}  // namespace cxrprep
