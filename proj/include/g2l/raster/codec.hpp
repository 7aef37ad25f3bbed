#pragma once

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "g2l/error.hpp"
#include "g2l/raster/image.hpp"

namespace g2l {

namespace detail {

inline constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G',
                                                              '\r', '\n', 0x1A, '\n'};

[[noreturn]] inline void decode_fail(std::string_view format, std::size_t offset,
                                     const std::string& what) {
  fail(errc::decode,
       std::string(format) + " decode error at offset " + std::to_string(offset) + ": " + what);
}

inline std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char (&type)[5],
                      std::span<const std::uint8_t> data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + data.size()));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

inline std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

}  // namespace detail

/// Encodes an 8-bit, non-interlaced PNG (gray or RGB), filter type 0.
inline std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  if (img.empty()) fail(errc::invalid_argument, "cannot encode an empty image");
  const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * img.height());
  const auto px = img.pixels();
  for (int y = 0; y < img.height(); ++y) {
    raw.push_back(0);
    const auto row = px.subspan(static_cast<std::size_t>(y) * stride, stride);
    raw.insert(raw.end(), row.begin(), row.end());
  }
  uLongf zsize = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zsize);
  if (compress2(z.data(), &zsize, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    fail(errc::internal, "zlib compression failed");
  z.resize(zsize);

  std::vector<std::uint8_t> out(detail::kPngSignature.begin(), detail::kPngSignature.end());
  std::vector<std::uint8_t> ihdr;
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.width()));
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.height()));
  ihdr.push_back(8);                             // bit depth
  ihdr.push_back(img.channels() == 1 ? 0 : 2);  // color type
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  detail::put_chunk(out, "IHDR", ihdr);
  detail::put_chunk(out, "IDAT", z);
  detail::put_chunk(out, "IEND", {});
  return out;
}

/// Decodes 8-bit non-interlaced PNG. Gray and RGB load as-is; palette images
/// expand to RGB; alpha is composited over white.
inline RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  using detail::decode_fail;
  constexpr std::string_view kFmt = "png";
  if (bytes.size() < 8 || !std::equal(detail::kPngSignature.begin(), detail::kPngSignature.end(),
                                      bytes.begin()))
    decode_fail(kFmt, 0, "missing PNG signature");

  std::size_t at = 8;
  std::uint32_t width = 0, height = 0;
  int color_type = -1;
  bool seen_end = false;
  std::vector<std::uint8_t> idat;
  std::vector<Color> palette;
  std::vector<std::uint8_t> palette_alpha;

  while (at < bytes.size()) {
    if (bytes.size() - at < 12) decode_fail(kFmt, at, "truncated chunk header");
    const std::uint32_t len = detail::read_be32(bytes, at);
    if (len > bytes.size() - at - 12) decode_fail(kFmt, at, "chunk length exceeds file size");
    const std::string type(reinterpret_cast<const char*>(bytes.data() + at + 4), 4);
    const auto data = bytes.subspan(at + 8, len);
    const std::uint32_t crc = detail::read_be32(bytes, at + 8 + len);
    const auto expect = crc32(0L, bytes.data() + at + 4, static_cast<uInt>(len + 4));
    if (crc != static_cast<std::uint32_t>(expect)) decode_fail(kFmt, at, "CRC mismatch in " + type);

    if (type == "IHDR") {
      if (len != 13) decode_fail(kFmt, at, "bad IHDR length");
      width = detail::read_be32(data, 0);
      height = detail::read_be32(data, 4);
      const int depth = data[8];
      color_type = data[9];
      if (width == 0 || height == 0 || width > (1u << 15) || height > (1u << 15))
        decode_fail(kFmt, at, "unsupported dimensions");
      if (depth != 8) decode_fail(kFmt, at, "only 8-bit PNG is supported");
      if (color_type != 0 && color_type != 2 && color_type != 3 && color_type != 4 &&
          color_type != 6)
        decode_fail(kFmt, at, "bad color type " + std::to_string(color_type));
      if (data[10] != 0 || data[11] != 0) decode_fail(kFmt, at, "unknown compression or filter");
      if (data[12] != 0) decode_fail(kFmt, at, "interlaced PNG is not supported");
    } else if (type == "PLTE") {
      for (std::uint32_t i = 0; i + 2 < len; i += 3) palette.push_back({data[i], data[i + 1], data[i + 2]});
    } else if (type == "tRNS") {
      palette_alpha.assign(data.begin(), data.end());
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data.begin(), data.end());
    } else if (type == "IEND") {
      seen_end = true;
      break;
    }
    at += 12 + len;
  }
  if (color_type < 0) decode_fail(kFmt, 8, "missing IHDR");
  if (!seen_end) decode_fail(kFmt, at, "missing IEND (truncated file)");
  if (color_type == 3 && palette.empty()) decode_fail(kFmt, at, "palette image without PLTE");

  const int in_ch = color_type == 0 ? 1 : color_type == 2 ? 3 : color_type == 3 ? 1
                  : color_type == 4 ? 2 : 4;
  const std::size_t stride = static_cast<std::size_t>(width) * in_ch;
  std::vector<std::uint8_t> raw((stride + 1) * height);
  uLongf raw_size = static_cast<uLongf>(raw.size());
  const int zr = uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size()));
  if (zr != Z_OK || raw_size != raw.size()) decode_fail(kFmt, at, "corrupt or truncated IDAT stream");

  // Undo scanline filters in place.
  for (std::uint32_t y = 0; y < height; ++y) {
    std::uint8_t* row = raw.data() + y * (stride + 1);
    const std::uint8_t filter = row[0];
    std::uint8_t* cur = row + 1;
    const std::uint8_t* prev = y > 0 ? cur - (stride + 1) : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<std::size_t>(in_ch) ? cur[i - in_ch] : 0;
      const int b = prev ? prev[i] : 0;
      const int c = prev && i >= static_cast<std::size_t>(in_ch) ? prev[i - in_ch] : 0;
      switch (filter) {
        case 0: break;
        case 1: cur[i] = static_cast<std::uint8_t>(cur[i] + a); break;
        case 2: cur[i] = static_cast<std::uint8_t>(cur[i] + b); break;
        case 3: cur[i] = static_cast<std::uint8_t>(cur[i] + ((a + b) >> 1)); break;
        case 4: cur[i] = static_cast<std::uint8_t>(cur[i] + detail::paeth(a, b, c)); break;
        default: decode_fail(kFmt, at, "bad filter type " + std::to_string(filter) + " on row " + std::to_string(y));
      }
    }
  }

  const int out_ch = (color_type == 0 || color_type == 4) ? 1 : 3;
  RasterImage img(static_cast<int>(width), static_cast<int>(height), out_ch);
  auto out = img.pixels();
  auto over_white = [](int v, int alpha) { return static_cast<std::uint8_t>((v * alpha + 255 * (255 - alpha) + 127) / 255); };
  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint8_t* src = raw.data() + y * (stride + 1) + 1;
    std::uint8_t* dst = out.data() + static_cast<std::size_t>(y) * width * out_ch;
    for (std::uint32_t x = 0; x < width; ++x) {
      switch (color_type) {
        case 0: dst[x] = src[x]; break;
        case 4: dst[x] = over_white(src[2 * x], src[2 * x + 1]); break;
        case 2: std::memcpy(dst + 3 * x, src + 3 * x, 3); break;
        case 6:
          for (int c = 0; c < 3; ++c) dst[3 * x + c] = over_white(src[4 * x + c], src[4 * x + 3]);
          break;
        case 3: {
          const std::uint8_t idx = src[x];
          if (idx >= palette.size()) decode_fail(kFmt, at, "palette index out of range");
          const int alpha = idx < palette_alpha.size() ? palette_alpha[idx] : 255;
          dst[3 * x] = over_white(palette[idx].r, alpha);
          dst[3 * x + 1] = over_white(palette[idx].g, alpha);
          dst[3 * x + 2] = over_white(palette[idx].b, alpha);
          break;
        }
      }
    }
  }
  return img;
}

/// Binary PGM (P5) for gray images, PPM (P6) for RGB.
inline std::vector<std::uint8_t> encode_pnm(const RasterImage& img) {
  const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width()) + " " + std::to_string(img.height()) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

inline RasterImage decode_pnm(std::span<const std::uint8_t> bytes) {
  using detail::decode_fail;
  constexpr std::string_view kFmt = "pnm";
  std::size_t at = 0;
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    decode_fail(kFmt, 0, "missing P5/P6 magic");
  const int channels = bytes[1] == '5' ? 1 : 3;
  at = 2;
  auto next_int = [&]() {
    for (;;) {
      while (at < bytes.size() && std::isspace(bytes[at])) ++at;
      if (at < bytes.size() && bytes[at] == '#') {
        while (at < bytes.size() && bytes[at] != '\n') ++at;
        continue;
      }
      break;
    }
    if (at >= bytes.size() || !std::isdigit(bytes[at])) decode_fail(kFmt, at, "expected integer in header");
    long v = 0;
    while (at < bytes.size() && std::isdigit(bytes[at])) {
      v = v * 10 + (bytes[at++] - '0');
      if (v > (1L << 20)) decode_fail(kFmt, at, "header value too large");
    }
    return static_cast<int>(v);
  };
  const int w = next_int(), h = next_int(), maxval = next_int();
  if (w < 1 || h < 1) decode_fail(kFmt, at, "bad dimensions");
  if (maxval != 255) decode_fail(kFmt, at, "only maxval 255 is supported");
  if (at >= bytes.size() || !std::isspace(bytes[at])) decode_fail(kFmt, at, "expected whitespace after header");
  ++at;
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() - at < need)
    decode_fail(kFmt, bytes.size(), "truncated pixel data (need " + std::to_string(need) + " bytes)");
  RasterImage img(w, h, channels);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(at), need, img.pixels().begin());
  return img;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(errc::io, "write failed for " + path.string());
}

/// Sniffs the format from magic bytes.
inline RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
    return decode_pnm(bytes);
  return decode_png(bytes);
}

inline RasterImage read_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes);
  } catch (const error& e) {
    throw error(e.code(), path.string() + ": " + e.what(), e.stage());
  }
}

/// Format follows the extension: .png, .ppm/.pgm/.pnm.
inline void write_image(const RasterImage& img, const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png") {
    write_file_bytes(path, encode_png(img));
  } else if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") {
    write_file_bytes(path, encode_pnm(img));
  } else {
    fail(errc::invalid_argument, "unsupported image extension '" + ext + "'");
  }
}

}  // namespace g2l
