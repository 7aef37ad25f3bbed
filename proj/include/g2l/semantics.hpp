#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "g2l/chart_model.hpp"
#include "g2l/ocr.hpp"

namespace g2l::semantics {

inline constexpr const char* kDefaultTitle = "Title";
inline constexpr int kDefaultCategories = 5;

// Positional bands, as fractions of image width (W) or height (H).
inline constexpr double kTitleBand = 0.15;       // title top < 0.15 H
inline constexpr double kCenterLo = 0.25;        // title center x in [0.25 W, 0.75 W]
inline constexpr double kCenterHi = 0.75;
inline constexpr double kFarLeft = 0.12;         // y label right edge < 0.12 W
inline constexpr double kXLabelBand = 0.92;      // x label top > 0.92 H
inline constexpr double kTickBandLo = 0.75;      // tick label top in [0.75 H, 0.92 H]
inline constexpr double kLegendTopBand = 0.125;  // legend entries within [0.125 H, 0.75 H]
inline constexpr double kLegendMinOverlap = 0.6;
inline constexpr int kLegendMaxWords = 3;

struct SemanticSummary {
  ChartClass chart_class = ChartClass::bar;
  std::string title = kDefaultTitle;
  std::optional<std::string> x_label, y_label;
  bool legend = false;
  std::vector<std::string> legend_entries;
  std::vector<std::string> x_tick_labels;
  int n_categories = kDefaultCategories;
  std::vector<std::string> slice_labels;

  friend bool operator==(const SemanticSummary&, const SemanticSummary&) = default;
};

namespace detail {

using ocr::OcrResult;
using ocr::Phrase;

/// Phrases ordered by bbox origin (y, then x), then text, so results do not
/// depend on input order.
inline std::vector<const Phrase*> ordered(const OcrResult& r) {
  std::vector<const Phrase*> out;
  for (const auto& p : r.phrases) out.push_back(&p);
  std::stable_sort(out.begin(), out.end(), [](const Phrase* a, const Phrase* b) {
    if (a->bbox.y != b->bbox.y) return a->bbox.y < b->bbox.y;
    if (a->bbox.x != b->bbox.x) return a->bbox.x < b->bbox.x;
    return a->text() < b->text();
  });
  return out;
}

inline bool top_center(const Phrase& p, int W, int H) {
  const double cx = p.bbox.center_x();
  return p.bbox.y < kTitleBand * H && cx >= kCenterLo * W && cx <= kCenterHi * W;
}

/// Lowercased with punctuation removed: "VS." -> "vs".
inline std::string bare(const std::string& word) {
  std::string out;
  for (char c : word)
    if (!std::ispunct(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_versus(const std::string& word) {
  const auto b = bare(word);
  return b == "vs" || b == "v";
}

inline bool horizontal(const Phrase& p) { return p.orientation == TextOrientation::horizontal; }

}  // namespace detail

/// Index of the phrase chosen as title, if a top-center multi-word phrase exists.
inline std::optional<std::size_t> title_phrase(const ocr::OcrResult& r) {
  for (const auto* p : detail::ordered(r))
    if (p->words.size() >= 2 && detail::top_center(*p, r.width, r.height))
      return static_cast<std::size_t>(p - r.phrases.data());
  return std::nullopt;
}

/// Title scan: earliest top-center multi-word phrase; else the first
/// "A vs B" triple on one row; else "Title".
inline std::string find_title(const ocr::OcrResult& r) {
  if (const auto i = title_phrase(r)) return r.phrases[*i].text();
  for (const auto* p : detail::ordered(r))
    for (std::size_t k = 1; k + 1 < p->words.size(); ++k)
      if (detail::is_versus(p->words[k].text))
        return p->words[k - 1].text + " " + p->words[k].text + " " + p->words[k + 1].text;
  return kDefaultTitle;
}

struct AxisLabels {
  std::optional<std::string> x_label, y_label;
};

inline AxisLabels find_axis_labels(const ocr::OcrResult& r, ChartClass cls) {
  AxisLabels out;
  if (!has_axes(cls)) return out;
  const auto phrases = detail::ordered(r);
  const ocr::Phrase* y = nullptr;
  for (const auto* p : phrases)
    if (!detail::horizontal(*p) && p->bbox.right() < kFarLeft * r.width && (!y || p->bbox.x < y->bbox.x)) y = p;
  const ocr::Phrase* x = nullptr;
  double best = 0;
  for (const auto* p : phrases) {
    if (!detail::horizontal(*p) || p->bbox.y <= kXLabelBand * r.height) continue;
    const double d = std::abs(p->bbox.center_x() - r.width / 2.0);
    if (!x || d < best) x = p, best = d;
  }
  if (y) out.y_label = y->text();
  if (x) out.x_label = x->text();
  return out;
}

/// Every phrase except the title, in reading order.
inline std::vector<std::string> find_slice_labels(const ocr::OcrResult& r) {
  const auto t = title_phrase(r);
  std::vector<std::string> out;
  for (const auto* p : detail::ordered(r))
    if (!t || p != &r.phrases[*t]) out.push_back(p->text());
  return out;
}

struct LegendInfo {
  bool legend = false;
  std::vector<std::string> entries;
};

/// Looks for a column of at least two short, left-overlapping horizontal
/// phrases in the right half of the plot band; the longest column wins,
/// then the topmost.
inline LegendInfo detect_legend(const ocr::OcrResult& r, ChartClass cls) {
  (void)cls;
  std::vector<const ocr::Phrase*> cands;
  for (const auto* p : detail::ordered(r)) {
    if (!detail::horizontal(*p) || p->words.size() > static_cast<std::size_t>(kLegendMaxWords)) continue;
    if (p->bbox.center_x() < 0.5 * r.width) continue;
    if (p->bbox.y < kLegendTopBand * r.height || p->bbox.bottom() > kTickBandLo * r.height) continue;
    cands.push_back(p);
  }
  auto stacked = [](const ocr::Phrase& a, const ocr::Phrase& b) {
    const int overlap = std::min(a.bbox.right(), b.bbox.right()) - std::max(a.bbox.x, b.bbox.x);
    const int narrow = std::min(a.bbox.w, b.bbox.w);
    const int gap = b.bbox.y - a.bbox.bottom();
    const int glyph_h = BitmapFont::kGlyphHeight * std::max(a.scale(), b.scale());
    return narrow > 0 && overlap >= kLegendMinOverlap * narrow && gap >= 0 && gap <= 2 * glyph_h;
  };
  std::vector<const ocr::Phrase*> best;
  std::vector<bool> used(cands.size(), false);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (used[i]) continue;
    std::vector<const ocr::Phrase*> chain{cands[i]};
    used[i] = true;
    for (std::size_t j = i + 1; j < cands.size(); ++j)
      if (!used[j] && stacked(*chain.back(), *cands[j])) {
        chain.push_back(cands[j]);
        used[j] = true;
      }
    if (chain.size() > best.size()) best = std::move(chain);
  }
  LegendInfo out;
  if (best.size() >= 2) {
    out.legend = true;
    for (const auto* p : best) out.entries.push_back(p->text());
  }
  return out;
}

struct TickInfo {
  std::vector<std::string> x_tick_labels;
  int n_categories = kDefaultCategories;
};

inline TickInfo count_ticks(const ocr::OcrResult& r) {
  std::vector<const ocr::Phrase*> ticks;
  for (const auto* p : detail::ordered(r))
    if (detail::horizontal(*p) && p->words.size() == 1 && p->bbox.y >= kTickBandLo * r.height &&
        p->bbox.y <= kXLabelBand * r.height)
      ticks.push_back(p);
  std::stable_sort(ticks.begin(), ticks.end(), [](const ocr::Phrase* a, const ocr::Phrase* b) { return a->bbox.x < b->bbox.x; });
  TickInfo out;
  for (const auto* p : ticks) out.x_tick_labels.push_back(p->text());
  if (!ticks.empty()) out.n_categories = static_cast<int>(ticks.size());
  return out;
}

/// Never fails; anything inconclusive keeps its default.
inline SemanticSummary analyze(ChartClass cls, const ocr::OcrResult& r) {
  SemanticSummary s;
  s.chart_class = cls;
  s.title = find_title(r);
  const auto labels = find_axis_labels(r, cls);
  s.x_label = labels.x_label;
  s.y_label = labels.y_label;
  const auto legend = detect_legend(r, cls);
  s.legend = legend.legend;
  s.legend_entries = legend.entries;
  if (cls == ChartClass::pie) {
    s.slice_labels = find_slice_labels(r);
    s.n_categories = s.slice_labels.empty() ? kDefaultCategories : static_cast<int>(s.slice_labels.size());
  } else {
    const auto ticks = count_ticks(r);
    s.x_tick_labels = ticks.x_tick_labels;
    s.n_categories = ticks.n_categories;
  }
  return s;
}

inline nlohmann::json to_json(const SemanticSummary& s) {
  auto opt = [](const std::optional<std::string>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"class", to_string(s.chart_class)},
          {"title", s.title},
          {"x_label", opt(s.x_label)},
          {"y_label", opt(s.y_label)},
          {"legend", s.legend},
          {"legend_entries", s.legend_entries},
          {"x_tick_labels", s.x_tick_labels},
          {"n_categories", s.n_categories},
          {"slice_labels", s.slice_labels}};
}

}  // namespace g2l::semantics
