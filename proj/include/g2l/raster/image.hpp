#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "g2l/error.hpp"

namespace g2l {

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;

  static constexpr Color gray(std::uint8_t v) { return {v, v, v}; }
  friend bool operator==(const Color&, const Color&) = default;
};

inline constexpr Color kBlack{0, 0, 0};
inline constexpr Color kWhite{255, 255, 255};

/// ITU-R 601 luma, unrounded.
inline double luminance(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

inline std::uint8_t luminance_u8(Color c) {
  return static_cast<std::uint8_t>(std::lround(luminance(c.r, c.g, c.b)));
}

/// Axis-aligned pixel rectangle, top-left origin, half-open extent.
struct Box {
  int x = 0, y = 0, w = 0, h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  long area() const { return static_cast<long>(w) * h; }
  bool empty() const { return w <= 0 || h <= 0; }
  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }

  bool contains(int px, int py) const {
    return px >= x && py >= y && px < right() && py < bottom();
  }

  friend bool operator==(const Box&, const Box&) = default;
};

inline Box unite(const Box& a, const Box& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const int x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
  const int x1 = std::max(a.right(), b.right()), y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

inline Box intersect(const Box& a, const Box& b) {
  const int x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right()), y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {};
  return {x0, y0, x1 - x0, y1 - y0};
}

inline double iou(const Box& a, const Box& b) {
  const double inter = static_cast<double>(intersect(a, b).area());
  const double uni = static_cast<double>(a.area() + b.area()) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

/// Row-major 8-bit image with 1 (gray) or 3 (RGB) interleaved channels.
class RasterImage {
 public:
  RasterImage() = default;

  RasterImage(int width, int height, int channels, std::uint8_t fill = 0) {
    if (width < 1 || height < 1)
      fail(errc::invalid_argument, "image dimensions must be >= 1, got " + std::to_string(width) +
                                       "x" + std::to_string(height));
    if (channels != 1 && channels != 3)
      fail(errc::invalid_argument, "channels must be 1 or 3, got " + std::to_string(channels));
    width_ = width;
    height_ = height;
    channels_ = channels;
    pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_;
  }

  std::uint8_t at(int x, int y, int c = 0) const { return pixels_[offset(x, y) + c]; }

  Color color_at(int x, int y) const {
    const auto o = offset(x, y);
    if (channels_ == 1) return Color::gray(pixels_[o]);
    return {pixels_[o], pixels_[o + 1], pixels_[o + 2]};
  }

  /// Luminance in [0, 255] (exact for gray images).
  double luma_at(int x, int y) const {
    const auto o = offset(x, y);
    if (channels_ == 1) return pixels_[o];
    return luminance(pixels_[o], pixels_[o + 1], pixels_[o + 2]);
  }

  /// Clipped write; out-of-bounds coordinates are ignored.
  void set(int x, int y, Color c) {
    if (!in_bounds(x, y)) return;
    const auto o = offset(x, y);
    if (channels_ == 1) {
      pixels_[o] = luminance_u8(c);
    } else {
      pixels_[o] = c.r;
      pixels_[o + 1] = c.g;
      pixels_[o + 2] = c.b;
    }
  }

  void fill_span(int y, int x0, int x1, Color c) {
    if (y < 0 || y >= height_) return;
    x0 = std::max(x0, 0);
    x1 = std::min(x1, width_ - 1);
    for (int x = x0; x <= x1; ++x) set(x, y, c);
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

inline RasterImage create_image(int width, int height, int channels, int fill) {
  if (fill < 0 || fill > 255)
    fail(errc::invalid_argument, "fill must be in [0,255], got " + std::to_string(fill));
  return RasterImage(width, height, channels, static_cast<std::uint8_t>(fill));
}

// ---------------------------------------------------------------------------
// Shapes

/// Inclusive corners.
struct RectShape {
  int x0, y0, x1, y1;
};
struct DiscShape {
  int cx, cy, r;
};
struct LineShape {
  int x0, y0, x1, y1;
};
/// Angles in degrees, counterclockwise from +x with y pointing up.
struct WedgeShape {
  int cx, cy, r;
  double start_deg, end_deg;
};

using Shape = std::variant<RectShape, DiscShape, LineShape, WedgeShape>;

namespace detail {

/// Half-widths of the midpoint-circle disc, indexed by |dy| in [0, r].
inline std::vector<int> disc_half_widths(int r) {
  std::vector<int> hw(static_cast<std::size_t>(r) + 1, 0);
  int x = r, y = 0, err = 1 - r;
  while (x >= y) {
    hw[y] = std::max(hw[y], x);
    hw[x] = std::max(hw[x], y);
    ++y;
    if (err < 0) {
      err += 2 * y + 1;
    } else {
      --x;
      err += 2 * (y - x) + 1;
    }
  }
  return hw;
}

inline double normalize_deg(double a) {
  a = std::fmod(a, 360.0);
  return a < 0 ? a + 360.0 : a;
}

inline void draw(RasterImage& img, const RectShape& s, Color c) {
  const int x0 = std::min(s.x0, s.x1), x1 = std::max(s.x0, s.x1);
  const int y0 = std::max(std::min(s.y0, s.y1), 0);
  const int y1 = std::min(std::max(s.y0, s.y1), img.height() - 1);
  for (int y = y0; y <= y1; ++y) img.fill_span(y, x0, x1, c);
}

inline void draw(RasterImage& img, const DiscShape& s, Color c) {
  if (s.r < 0) return;
  const auto hw = disc_half_widths(s.r);
  for (int dy = -s.r; dy <= s.r; ++dy) {
    const int h = hw[static_cast<std::size_t>(std::abs(dy))];
    img.fill_span(s.cy + dy, s.cx - h, s.cx + h, c);
  }
}

inline void draw(RasterImage& img, const LineShape& s, Color c) {
  // Bresenham; leaves early once the line has entered and left the image.
  int x = s.x0, y = s.y0;
  const int dx = std::abs(s.x1 - s.x0), sx = s.x0 < s.x1 ? 1 : -1;
  const int dy = -std::abs(s.y1 - s.y0), sy = s.y0 < s.y1 ? 1 : -1;
  int err = dx + dy;
  bool entered = false;
  for (;;) {
    if (img.in_bounds(x, y)) {
      img.set(x, y, c);
      entered = true;
    } else if (entered) {
      break;
    }
    if (x == s.x1 && y == s.y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

inline void draw(RasterImage& img, const WedgeShape& s, Color c) {
  if (s.r < 0) return;
  const double span = s.end_deg - s.start_deg;
  if (span <= 0) return;
  if (span >= 360.0) {
    draw(img, DiscShape{s.cx, s.cy, s.r}, c);
    return;
  }
  const double start = normalize_deg(s.start_deg);
  const auto hw = disc_half_widths(s.r);
  constexpr double kDeg = 180.0 / 3.14159265358979323846;
  for (int dy = -s.r; dy <= s.r; ++dy) {
    const int h = hw[static_cast<std::size_t>(std::abs(dy))];
    for (int dx = -h; dx <= h; ++dx) {
      const double a = normalize_deg(std::atan2(-static_cast<double>(dy), dx) * kDeg);
      if (normalize_deg(a - start) < span) img.set(s.cx + dx, s.cy + dy, c);
    }
  }
}

}  // namespace detail

/// Rasterizes `shape` into `img` (integer grid, no anti-aliasing, clipped).
inline void draw_shape(RasterImage& img, const Shape& shape, Color color) {
  std::visit([&](const auto& s) { detail::draw(img, s, color); }, shape);
}

}  // namespace g2l
