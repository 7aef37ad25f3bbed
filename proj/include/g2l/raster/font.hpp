#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "g2l/error.hpp"
#include "g2l/raster/font_data.hpp"
#include "g2l/raster/image.hpp"

namespace g2l {

/// Vertical text is rotated 90 degrees counterclockwise and reads bottom-to-top.
enum class TextOrientation { horizontal, vertical };

inline std::string_view to_string(TextOrientation o) {
  return o == TextOrientation::horizontal ? "horizontal" : "vertical";
}

inline TextOrientation parse_orientation(std::string_view s) {
  if (s == "horizontal") return TextOrientation::horizontal;
  if (s == "vertical") return TextOrientation::vertical;
  fail(errc::invalid_argument, "unknown text orientation '" + std::string(s) + "'");
}

struct Glyph {
  char ch = ' ';
  std::array<std::uint8_t, 35> bits{};  // row-major 5x7

  bool ink(int col, int row) const { return bits[static_cast<std::size_t>(row * 5 + col)] != 0; }
};

/// Fixed-width 5x7 bitmap font covering printable ASCII.
class BitmapFont {
 public:
  static constexpr int kGlyphWidth = 5;
  static constexpr int kGlyphHeight = 7;
  static constexpr int kSpacing = 1;
  static constexpr int kWordSpacing = 3;
  static constexpr char kFirst = 32;
  static constexpr char kLast = 126;

  static const BitmapFont& builtin() {
    static const BitmapFont font;
    return font;
  }

  static bool printable(char c) { return c >= kFirst && c <= kLast; }

  const Glyph& glyph(char c) const {
    if (!printable(c)) fail(errc::invalid_argument, describe_bad_char(c));
    return glyphs_[static_cast<std::size_t>(c - kFirst)];
  }

  const std::array<Glyph, 95>& glyphs() const { return glyphs_; }

  /// Width of one character cell in font units. A space is narrow so that
  /// the ink gap between two words is exactly kWordSpacing units.
  static int char_units(char c) { return c == ' ' ? kWordSpacing - 2 * kSpacing : kGlyphWidth; }

  /// Length of a text run in font units: cell widths plus inter-cell spacing.
  static int text_units(std::string_view text) {
    int units = 0;
    for (char c : text) units += char_units(c);
    return text.empty() ? 0 : units + static_cast<int>(text.size() - 1) * kSpacing;
  }

  static std::string describe_bad_char(char c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "character 0x%02X is not printable ASCII",
                  static_cast<unsigned>(static_cast<unsigned char>(c)));
    return buf;
  }

 private:
  BitmapFont() {
    for (std::size_t i = 0; i < glyphs_.size(); ++i) {
      glyphs_[i].ch = static_cast<char>(kFirst + static_cast<int>(i));
      for (int r = 0; r < kGlyphHeight; ++r)
        for (int c = 0; c < kGlyphWidth; ++c)
          glyphs_[i].bits[static_cast<std::size_t>(r * kGlyphWidth + c)] =
              detail::kGlyphRows[i][static_cast<std::size_t>(r)][c] == '#';
    }
  }

  std::array<Glyph, 95> glyphs_{};
};

inline void check_drawable(std::string_view text) {
  if (text.empty()) fail(errc::invalid_argument, "text must be non-empty");
  for (char c : text)
    if (!BitmapFont::printable(c)) fail(errc::invalid_argument, BitmapFont::describe_bad_char(c));
}

/// Cell box of a text run anchored at its top-left pixel.
inline Box text_box(int x, int y, std::string_view text, int scale, TextOrientation orientation) {
  const int length = BitmapFont::text_units(text) * scale;
  const int thickness = BitmapFont::kGlyphHeight * scale;
  if (orientation == TextOrientation::horizontal) return {x, y, length, thickness};
  return {x, y, thickness, length};
}

/// Draws `text` with its box's top-left corner at (x, y) and returns that box.
inline Box draw_text(RasterImage& img, int x, int y, std::string_view text, int scale,
                     TextOrientation orientation, Color color,
                     const BitmapFont& font = BitmapFont::builtin()) {
  check_drawable(text);
  if (scale < 1) fail(errc::invalid_argument, "text scale must be >= 1");

  const Box box = text_box(x, y, text, scale, orientation);
  const int length = orientation == TextOrientation::horizontal ? box.w : box.h;
  // (u, v): u runs along the reading direction, v across it from the glyph top.
  auto plot = [&](int u, int v) {
    if (orientation == TextOrientation::horizontal)
      img.set(x + u, y + v, color);
    else
      img.set(x + v, y + length - 1 - u, color);
  };

  int pen = 0;
  for (char c : text) {
    if (c != ' ') {
      const Glyph& g = font.glyph(c);
      for (int row = 0; row < BitmapFont::kGlyphHeight; ++row)
        for (int col = 0; col < BitmapFont::kGlyphWidth; ++col) {
          if (!g.ink(col, row)) continue;
          for (int dv = 0; dv < scale; ++dv)
            for (int du = 0; du < scale; ++du) plot(pen + col * scale + du, row * scale + dv);
        }
    }
    pen += (BitmapFont::char_units(c) + BitmapFont::kSpacing) * scale;
  }
  return box;
}

}  // namespace g2l
