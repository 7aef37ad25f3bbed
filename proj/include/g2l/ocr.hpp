#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "g2l/raster/font.hpp"
#include "g2l/raster/image.hpp"

namespace g2l::ocr {

struct Mask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> ink;

  bool at(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height && ink[static_cast<std::size_t>(y) * width + x] != 0;
  }
  std::size_t count() const { return static_cast<std::size_t>(std::count(ink.begin(), ink.end(), 1)); }
};

/// Ink iff luminance, rounded to 8 bits, is below threshold.
inline Mask binarize(const RasterImage& img, double threshold = 128.0) {
  Mask m{img.width(), img.height(), std::vector<std::uint8_t>(static_cast<std::size_t>(img.width()) * img.height(), 0)};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      m.ink[static_cast<std::size_t>(y) * img.width() + x] = std::round(img.luma_at(x, y)) < threshold;
  return m;
}

struct Component {
  Box bbox;
  std::vector<int> pixels;  // flat indices y * width + x
};

/// Largest glyph cell at scale 4, times 3.
inline constexpr int kMaxComponentWidth = 3 * BitmapFont::kGlyphWidth * 4;
inline constexpr int kMaxComponentHeight = 3 * BitmapFont::kGlyphHeight * 4;

/// All 8-connected ink components, ordered by bbox top, then left.
inline std::vector<Component> find_components(const Mask& m) {
  std::vector<Component> out;
  std::vector<std::uint8_t> seen(m.ink.size(), 0);
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(m.ink.size()); ++start) {
    if (!m.ink[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)]) continue;
    Component c;
    int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
    stack.assign(1, start);
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      c.pixels.push_back(p);
      const int px = p % m.width, py = p / m.width;
      x0 = std::min(x0, px), x1 = std::max(x1, px), y0 = std::min(y0, py), y1 = std::max(y1, py);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = px + dx, ny = py + dy;
          if (!m.at(nx, ny)) continue;
          const int q = ny * m.width + nx;
          if (seen[static_cast<std::size_t>(q)]) continue;
          seen[static_cast<std::size_t>(q)] = 1;
          stack.push_back(q);
        }
    }
    std::sort(c.pixels.begin(), c.pixels.end());
    c.bbox = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    return std::tie(a.bbox.y, a.bbox.x) < std::tie(b.bbox.y, b.bbox.x);
  });
  return out;
}

/// Components small enough to be glyph ink; axes, bars and other large
/// shapes are dropped.
inline std::vector<Component> extract_components(const Mask& m) {
  auto all = find_components(m);
  std::vector<Component> out;
  for (auto& c : all)
    if (c.bbox.w <= kMaxComponentWidth && c.bbox.h <= kMaxComponentHeight) out.push_back(std::move(c));
  return out;
}

// ---------------------------------------------------------------------------
// Glyph templates

struct GlyphPart {
  int x = 0, y = 0, w = 0, h = 0;  // in oriented cell units
  std::vector<std::uint8_t> bits;  // w * h, row-major
};

struct OrientedGlyph {
  char ch = ' ';
  TextOrientation orientation = TextOrientation::horizontal;
  int w = 0, h = 0;
  std::vector<std::uint8_t> bits;
  int ink = 0;
  std::vector<GlyphPart> parts;

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * w + x] != 0; }
};

/// Upright and counterclockwise-rotated templates of every inked glyph,
/// each split into its 8-connected parts.
class GlyphBank {
 public:
  struct PartRef {
    int glyph, part, scale;
  };

  explicit GlyphBank(const BitmapFont& font) {
    for (const auto& g : font.glyphs()) {
      if (g.ch == ' ') continue;
      for (auto o : {TextOrientation::horizontal, TextOrientation::vertical}) {
        OrientedGlyph og;
        og.ch = g.ch;
        og.orientation = o;
        const bool h = o == TextOrientation::horizontal;
        og.w = h ? BitmapFont::kGlyphWidth : BitmapFont::kGlyphHeight;
        og.h = h ? BitmapFont::kGlyphHeight : BitmapFont::kGlyphWidth;
        og.bits.assign(static_cast<std::size_t>(og.w * og.h), 0);
        for (int y = 0; y < og.h; ++y)
          for (int x = 0; x < og.w; ++x) {
            // Rotation matches draw_text: cell (x, y) holds glyph (col 4 - y, row x).
            const bool ink = h ? g.ink(x, y) : g.ink(BitmapFont::kGlyphWidth - 1 - y, x);
            og.bits[static_cast<std::size_t>(y * og.w + x)] = ink;
            og.ink += ink;
          }
        og.parts = split_parts(og);
        glyphs_.push_back(std::move(og));
      }
    }
    for (int gi = 0; gi < static_cast<int>(glyphs_.size()); ++gi)
      for (int pi = 0; pi < static_cast<int>(glyphs_[static_cast<std::size_t>(gi)].parts.size()); ++pi)
        for (int s = 1; s <= 4; ++s) {
          const auto& p = glyphs_[static_cast<std::size_t>(gi)].parts[static_cast<std::size_t>(pi)];
          by_dims_[{p.w * s, p.h * s}].push_back({gi, pi, s});
        }
  }

  static const GlyphBank& builtin() {
    static const GlyphBank bank(BitmapFont::builtin());
    return bank;
  }

  const std::vector<OrientedGlyph>& glyphs() const { return glyphs_; }

  const std::vector<PartRef>& parts_with_dims(int w, int h) const {
    static const std::vector<PartRef> none;
    const auto it = by_dims_.find({w, h});
    return it == by_dims_.end() ? none : it->second;
  }

 private:
  static std::vector<GlyphPart> split_parts(const OrientedGlyph& g) {
    std::vector<GlyphPart> parts;
    std::vector<int> label(g.bits.size(), -1);
    for (int start = 0; start < static_cast<int>(g.bits.size()); ++start) {
      if (!g.bits[static_cast<std::size_t>(start)] || label[static_cast<std::size_t>(start)] >= 0) continue;
      const int id = static_cast<int>(parts.size());
      std::vector<int> stack{start}, members;
      label[static_cast<std::size_t>(start)] = id;
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        members.push_back(p);
        const int px = p % g.w, py = p / g.w;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx, ny = py + dy;
            if (nx < 0 || ny < 0 || nx >= g.w || ny >= g.h || !g.at(nx, ny)) continue;
            const int q = ny * g.w + nx;
            if (label[static_cast<std::size_t>(q)] >= 0) continue;
            label[static_cast<std::size_t>(q)] = id;
            stack.push_back(q);
          }
      }
      int x0 = g.w, y0 = g.h, x1 = -1, y1 = -1;
      for (int p : members) {
        x0 = std::min(x0, p % g.w), x1 = std::max(x1, p % g.w);
        y0 = std::min(y0, p / g.w), y1 = std::max(y1, p / g.w);
      }
      GlyphPart part{x0, y0, x1 - x0 + 1, y1 - y0 + 1, {}};
      part.bits.assign(static_cast<std::size_t>(part.w * part.h), 0);
      for (int p : members) part.bits[static_cast<std::size_t>((p / g.w - y0) * part.w + (p % g.w - x0))] = 1;
      parts.push_back(std::move(part));
    }
    return parts;
  }

  std::vector<OrientedGlyph> glyphs_;
  std::map<std::pair<int, int>, std::vector<PartRef>> by_dims_;
};

// ---------------------------------------------------------------------------
// Glyph recognition

inline constexpr double kMatchThreshold = 0.9;

struct GlyphMatch {
  char ch = ' ';
  Box bbox;  // glyph cell
  TextOrientation orientation = TextOrientation::horizontal;
  double score = 0;
  int scale = 1;
  int ink = 0;                  // template ink pixels at this scale
  std::vector<int> components;  // indices into the candidate list, sorted
};

namespace detail {

/// Fraction of a component's bbox agreeing with a scaled part template.
inline double part_agreement(const std::vector<int>& owner, int width, int comp, const Box& b, const GlyphPart& p,
                             int s) {
  int agree = 0;
  for (int y = 0; y < b.h; ++y)
    for (int x = 0; x < b.w; ++x) {
      const bool has = owner[static_cast<std::size_t>((b.y + y) * width + b.x + x)] == comp;
      const bool want = p.bits[static_cast<std::size_t>((y / s) * p.w + x / s)] != 0;
      agree += has == want;
    }
  return static_cast<double>(agree) / static_cast<double>(b.area());
}

/// Fraction of the cell agreeing with the scaled glyph; outside the image counts as no ink.
inline double cell_agreement(const Mask& m, const Box& cell, const OrientedGlyph& g, int s) {
  int agree = 0;
  for (int y = 0; y < cell.h; ++y)
    for (int x = 0; x < cell.w; ++x) agree += m.at(cell.x + x, cell.y + y) == g.at(x / s, y / s);
  return static_cast<double>(agree) / static_cast<double>(cell.area());
}

}  // namespace detail

/// Scores every glyph hypothesis implied by the components and keeps, per
/// orientation, a component-disjoint set of the best ones (score >= 0.9).
/// A hypothesis starts from one component matching one part of a glyph at
/// an integer scale, which fixes the glyph cell; the glyph's other parts must
/// be present as components at their exact places, and no other component
/// may intrude into the cell.
inline std::vector<GlyphMatch> recognize_glyphs(const Mask& mask, const std::vector<Component>& comps,
                                                const GlyphBank& bank = GlyphBank::builtin()) {
  std::vector<int> owner(mask.ink.size(), -1);
  std::map<std::tuple<int, int, int, int>, int> by_box;
  for (int i = 0; i < static_cast<int>(comps.size()); ++i) {
    for (int p : comps[static_cast<std::size_t>(i)].pixels) owner[static_cast<std::size_t>(p)] = i;
    const Box& b = comps[static_cast<std::size_t>(i)].bbox;
    by_box.emplace(std::tuple{b.x, b.y, b.w, b.h}, i);
  }

  std::vector<GlyphMatch> hyps;
  std::set<std::tuple<int, int, int, int>> tried;  // glyph, cell x, cell y, scale
  for (int ci = 0; ci < static_cast<int>(comps.size()); ++ci) {
    const Box& cb = comps[static_cast<std::size_t>(ci)].bbox;
    for (const auto& ref : bank.parts_with_dims(cb.w, cb.h)) {
      const auto& g = bank.glyphs()[static_cast<std::size_t>(ref.glyph)];
      const auto& part = g.parts[static_cast<std::size_t>(ref.part)];
      const int s = ref.scale;
      const Box cell{cb.x - part.x * s, cb.y - part.y * s, g.w * s, g.h * s};
      if (!tried.insert({ref.glyph, cell.x, cell.y, s}).second) continue;

      std::vector<int> members;
      bool ok = true;
      for (int pi = 0; pi < static_cast<int>(g.parts.size()) && ok; ++pi) {
        const auto& q = g.parts[static_cast<std::size_t>(pi)];
        const Box qb{cell.x + q.x * s, cell.y + q.y * s, q.w * s, q.h * s};
        const auto it = by_box.find({qb.x, qb.y, qb.w, qb.h});
        if (it == by_box.end() || detail::part_agreement(owner, mask.width, it->second, qb, q, s) < kMatchThreshold)
          ok = false;
        else
          members.push_back(it->second);
      }
      if (!ok) continue;
      std::sort(members.begin(), members.end());
      for (int k = 0; k < static_cast<int>(comps.size()) && ok; ++k)
        if (!std::binary_search(members.begin(), members.end(), k) &&
            !intersect(comps[static_cast<std::size_t>(k)].bbox, cell).empty())
          ok = false;
      if (!ok) continue;
      const double score = detail::cell_agreement(mask, cell, g, s);
      if (score < kMatchThreshold) continue;
      hyps.push_back({g.ch, cell, g.orientation, score, s, g.ink * s * s, std::move(members)});
    }
  }

  std::stable_sort(hyps.begin(), hyps.end(), [](const GlyphMatch& a, const GlyphMatch& b) {
    if (a.orientation != b.orientation) return a.orientation < b.orientation;
    if (a.score != b.score) return a.score > b.score;
    if (a.ink != b.ink) return a.ink > b.ink;
    return std::tie(a.ch, a.bbox.y, a.bbox.x) < std::tie(b.ch, b.bbox.y, b.bbox.x);
  });
  std::vector<GlyphMatch> out;
  std::vector<std::uint8_t> used_h(comps.size(), 0), used_v(comps.size(), 0);
  for (auto& h : hyps) {
    auto& used = h.orientation == TextOrientation::horizontal ? used_h : used_v;
    if (std::any_of(h.components.begin(), h.components.end(), [&](int c) { return used[static_cast<std::size_t>(c)]; }))
      continue;
    for (int c : h.components) used[static_cast<std::size_t>(c)] = 1;
    out.push_back(std::move(h));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Words and phrases

struct Word {
  std::string text;
  Box bbox;
  TextOrientation orientation = TextOrientation::horizontal;
  double confidence = 0;
  int scale = 1;
  std::vector<int> components;
};

struct Phrase {
  std::vector<Word> words;
  Box bbox;
  TextOrientation orientation = TextOrientation::horizontal;

  std::string text() const {
    std::string out;
    for (const auto& w : words) {
      if (!out.empty()) out += ' ';
      out += w.text;
    }
    return out;
  }
  /// Largest word scale.
  int scale() const {
    int s = 1;
    for (const auto& w : words) s = std::max(s, w.scale);
    return s;
  }
};

struct OcrResult {
  std::vector<Word> words;
  std::vector<Phrase> phrases;
  int width = 0, height = 0;
};

inline constexpr double kGlyphGapLimit = 2.5;  // in units of scale

namespace detail {

inline bool reading_order(const Box& a, const Box& b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); }

}  // namespace detail

/// Glyphs on one text row (same orientation, scale and cell line) merge into a
/// word while the gap between cells is at most 2.5x the scale. When words of
/// the two orientations claim the same ink, the one with more glyphs wins,
/// then the higher total score, then horizontal.
inline std::vector<Word> group_words(const std::vector<GlyphMatch>& glyphs, int width = 0, int height = 0) {
  std::map<std::tuple<int, int, int>, std::vector<const GlyphMatch*>> rows;
  for (const auto& g : glyphs) {
    const bool h = g.orientation == TextOrientation::horizontal;
    rows[{static_cast<int>(g.orientation), g.scale, h ? g.bbox.y : g.bbox.x}].push_back(&g);
  }
  struct Candidate {
    Word word;
    double total = 0;
    int glyphs = 0;
  };
  std::vector<Candidate> cands;
  for (auto& [key, row] : rows) {
    const bool h = std::get<0>(key) == static_cast<int>(TextOrientation::horizontal);
    const int s = std::get<1>(key);
    // Reading order: left to right, or bottom to top for vertical text.
    std::sort(row.begin(), row.end(), [&](const GlyphMatch* a, const GlyphMatch* b) {
      return h ? a->bbox.x < b->bbox.x : a->bbox.y > b->bbox.y;
    });
    Candidate cur;
    auto flush = [&] {
      if (cur.glyphs == 0) return;
      cur.word.confidence = cur.total / cur.glyphs;
      std::sort(cur.word.components.begin(), cur.word.components.end());
      cands.push_back(std::move(cur));
      cur = Candidate{};
    };
    const GlyphMatch* prev = nullptr;
    for (const GlyphMatch* g : row) {
      if (prev) {
        const int gap = h ? g->bbox.x - prev->bbox.right() : prev->bbox.y - g->bbox.bottom();
        if (gap > kGlyphGapLimit * s) flush();
      }
      if (cur.glyphs == 0) {
        cur.word.orientation = g->orientation;
        cur.word.scale = s;
        cur.word.bbox = g->bbox;
      }
      cur.word.text += g->ch;
      cur.word.bbox = unite(cur.word.bbox, g->bbox);
      cur.word.components.insert(cur.word.components.end(), g->components.begin(), g->components.end());
      cur.total += g->score;
      ++cur.glyphs;
      prev = g;
    }
    flush();
  }

  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.glyphs != b.glyphs) return a.glyphs > b.glyphs;
    if (a.total != b.total) return a.total > b.total;
    if (a.word.orientation != b.word.orientation) return a.word.orientation < b.word.orientation;
    return detail::reading_order(a.word.bbox, b.word.bbox);
  });
  std::set<int> used;
  std::vector<Word> out;
  for (auto& c : cands) {
    if (std::any_of(c.word.components.begin(), c.word.components.end(), [&](int k) { return used.count(k) > 0; }))
      continue;
    used.insert(c.word.components.begin(), c.word.components.end());
    if (width > 0 && height > 0) c.word.bbox = intersect(c.word.bbox, Box{0, 0, width, height});
    out.push_back(std::move(c.word));
  }
  std::stable_sort(out.begin(), out.end(), [](const Word& a, const Word& b) { return detail::reading_order(a.bbox, b.bbox); });
  return out;
}

/// Words of one orientation join a phrase when their centers across the
/// reading direction differ by at most half a glyph height and the gap along
/// it is at most four glyph widths (at the larger of the two scales).
inline std::vector<Phrase> group_phrases(const std::vector<Word>& words, int width = 0, int height = 0) {
  (void)width;
  (void)height;
  const std::size_t n = words.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Word &a = words[i], &b = words[j];
      if (a.orientation != b.orientation) continue;
      const int s = std::max(a.scale, b.scale);
      const bool h = a.orientation == TextOrientation::horizontal;
      const double across = h ? std::abs(a.bbox.center_y() - b.bbox.center_y()) : std::abs(a.bbox.center_x() - b.bbox.center_x());
      const int gap = h ? std::max(a.bbox.x, b.bbox.x) - std::min(a.bbox.right(), b.bbox.right())
                        : std::max(a.bbox.y, b.bbox.y) - std::min(a.bbox.bottom(), b.bbox.bottom());
      if (across <= 0.5 * BitmapFont::kGlyphHeight * s && gap <= 4 * BitmapFont::kGlyphWidth * s)
        parent[find(i)] = find(j);
    }
  std::map<std::size_t, Phrase> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].words.push_back(words[i]);
  std::vector<Phrase> out;
  for (auto& [root, p] : groups) {
    p.orientation = p.words.front().orientation;
    const bool h = p.orientation == TextOrientation::horizontal;
    std::stable_sort(p.words.begin(), p.words.end(), [&](const Word& a, const Word& b) {
      return h ? a.bbox.x < b.bbox.x : a.bbox.bottom() > b.bbox.bottom();
    });
    p.bbox = Box{};
    for (const auto& w : p.words) p.bbox = unite(p.bbox, w.bbox);
    out.push_back(std::move(p));
  }
  std::stable_sort(out.begin(), out.end(), [](const Phrase& a, const Phrase& b) { return detail::reading_order(a.bbox, b.bbox); });
  return out;
}

inline OcrResult ocr_image(const RasterImage& img, const GlyphBank& bank = GlyphBank::builtin()) {
  const Mask mask = binarize(img);
  const auto comps = extract_components(mask);
  OcrResult r;
  r.width = img.width();
  r.height = img.height();
  r.words = group_words(recognize_glyphs(mask, comps, bank), r.width, r.height);
  r.phrases = group_phrases(r.words, r.width, r.height);
  return r;
}

// ---------------------------------------------------------------------------
// Debug dump

inline nlohmann::json box_json(const Box& b) { return {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}; }

inline nlohmann::json word_json(const Word& w) {
  return {{"text", w.text},
          {"bbox", box_json(w.bbox)},
          {"orientation", to_string(w.orientation)},
          {"confidence", w.confidence},
          {"scale", w.scale}};
}

inline nlohmann::json to_json(const OcrResult& r) {
  nlohmann::json words = nlohmann::json::array(), phrases = nlohmann::json::array();
  for (const auto& w : r.words) words.push_back(word_json(w));
  for (const auto& p : r.phrases)
    phrases.push_back({{"text", p.text()}, {"bbox", box_json(p.bbox)}, {"orientation", to_string(p.orientation)}});
  return {{"image", {{"w", r.width}, {"h", r.height}}}, {"words", words}, {"phrases", phrases}};
}

}  // namespace g2l::ocr
