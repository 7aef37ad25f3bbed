#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "g2l/chart_model.hpp"
#include "g2l/error.hpp"
#include "g2l/random.hpp"
#include "g2l/raster/codec.hpp"
#include "g2l/raster/font.hpp"
#include "g2l/raster/image.hpp"

namespace g2l {

inline constexpr const char* kGeneratorVersion = "g2l-corpus/1";

// ---------------------------------------------------------------------------
// Ground truth

enum class TextRole { title, x_label, y_label, tick_label, legend_entry, slice_label, cell_value };

inline std::string_view to_string(TextRole r) {
  switch (r) {
    case TextRole::title: return "title";
    case TextRole::x_label: return "x_label";
    case TextRole::y_label: return "y_label";
    case TextRole::tick_label: return "tick_label";
    case TextRole::legend_entry: return "legend_entry";
    case TextRole::slice_label: return "slice_label";
    case TextRole::cell_value: return "cell_value";
  }
  return "title";
}

inline TextRole parse_text_role(std::string_view s) {
  for (auto r : {TextRole::title, TextRole::x_label, TextRole::y_label, TextRole::tick_label,
                 TextRole::legend_entry, TextRole::slice_label, TextRole::cell_value})
    if (to_string(r) == s) return r;
  fail(errc::decode, "unknown text role '" + std::string(s) + "'");
}

struct TextItem {
  std::string text;
  Box bbox;
  TextOrientation orientation = TextOrientation::horizontal;
  TextRole role = TextRole::title;
  friend bool operator==(const TextItem&, const TextItem&) = default;

  /// Text scale implied by the box thickness.
  int scale() const {
    return (orientation == TextOrientation::horizontal ? bbox.h : bbox.w) / BitmapFont::kGlyphHeight;
  }
};

struct GroundTruth {
  ChartClass chart_class = ChartClass::bar;
  std::optional<std::string> title;
  std::optional<std::string> x_label;
  std::optional<std::string> y_label;
  bool legend = false;
  std::vector<std::string> legend_entries;
  std::vector<Category> categories;
  std::vector<Series> series;
  std::vector<TextItem> text_items;
  std::uint64_t seed = 0;
  // Enough extra state to rebuild the spec exactly.
  int palette_id = 0;
  Grid grid;
  bool overlay_cell_values = false;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

inline void to_json(nlohmann::json& j, const Box& b) {
  j = {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}
inline void from_json(const nlohmann::json& j, Box& b) {
  b = {j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
}

inline void to_json(nlohmann::json& j, const TextItem& t) {
  j = {{"text", t.text},
       {"bbox", t.bbox},
       {"orientation", to_string(t.orientation)},
       {"role", to_string(t.role)}};
}
inline void from_json(const nlohmann::json& j, TextItem& t) {
  t.text = j.at("text").get<std::string>();
  t.bbox = j.at("bbox").get<Box>();
  t.orientation = parse_orientation(j.at("orientation").get<std::string>());
  t.role = parse_text_role(j.at("role").get<std::string>());
}

inline void to_json(nlohmann::json& j, const GroundTruth& g) {
  j = {{"class", to_string(g.chart_class)},
       {"title", optional_string_json(g.title)},
       {"x_label", optional_string_json(g.x_label)},
       {"y_label", optional_string_json(g.y_label)},
       {"legend", g.legend},
       {"legend_entries", g.legend_entries},
       {"categories", g.categories},
       {"series", g.series},
       {"text_items", g.text_items},
       {"seed", g.seed},
       {"palette_id", g.palette_id},
       {"grid", {{"rows", g.grid.rows}, {"cols", g.grid.cols}, {"cell_values", g.grid.cells}}},
       {"overlay_cell_values", g.overlay_cell_values}};
}

inline void from_json(const nlohmann::json& j, GroundTruth& g) {
  g.chart_class = parse_chart_class(j.at("class").get<std::string>());
  g.title = optional_string_from(j, "title");
  g.x_label = optional_string_from(j, "x_label");
  g.y_label = optional_string_from(j, "y_label");
  g.legend = j.at("legend").get<bool>();
  g.legend_entries = j.at("legend_entries").get<std::vector<std::string>>();
  g.categories = j.at("categories").get<std::vector<Category>>();
  g.series = j.at("series").get<std::vector<Series>>();
  g.text_items = j.at("text_items").get<std::vector<TextItem>>();
  g.seed = j.at("seed").get<std::uint64_t>();
  g.palette_id = j.value("palette_id", 0);
  if (j.contains("grid")) {
    const auto& gr = j.at("grid");
    g.grid.rows = gr.value("rows", 0);
    g.grid.cols = gr.value("cols", 0);
    g.grid.cells = gr.value("cell_values", std::vector<double>{});
  }
  g.overlay_cell_values = j.value("overlay_cell_values", false);
}

/// Rebuilds the spec a ground-truth record was rendered from.
inline ChartSpec spec_from_truth(const GroundTruth& g) {
  ChartSpec s;
  s.chart_class = g.chart_class;
  s.title = g.title.value_or("");
  s.x_label = g.x_label;
  s.y_label = g.y_label;
  s.categories = g.categories;
  s.series = g.series;
  s.legend = g.legend;
  s.grid = g.grid;
  s.overlay_cell_values = g.overlay_cell_values;
  s.palette_id = g.palette_id;
  s.seed = g.seed;
  return s;
}

// ---------------------------------------------------------------------------
// Spec sampling

namespace words {

inline const std::vector<std::string>& title() {
  static const std::vector<std::string> w = {
      "Average",  "Monthly",  "Rainfall",   "Annual",     "Regional", "Sales",     "Growth",
      "Market",   "Share",    "Energy",     "Usage",      "Population", "Trends",  "Revenue",
      "Quarterly", "Weekly",  "Daily",      "Product",    "Survey",   "Results",   "Student",
      "Scores",   "Traffic",  "Volume",     "Customer",   "Ratings",  "Budget",    "Crop",
      "Yield",    "Water",    "Quality",    "Temperature", "Readings", "Website",  "Visits",
      "Income",   "Export",   "Figures",    "Election",   "Votes",    "Hospital",  "Fuel",
      "Prices",   "Housing",  "Costs",      "Team",       "Global",   "Emissions", "Online",
      "Orders",   "Sensor",   "Data",       "Stock",      "Levels",   "Patient",   "Outcomes",
      "City",     "Rural",    "Airline",    "Delays",     "Library",  "Loans",     "Power",
      "Demand",   "Coffee",   "Exports",    "Mobile",     "Users",    "Store",     "Visitors"};
  return w;
}

inline const std::vector<std::string>& axis() {
  static const std::vector<std::string> w = {
      "Value", "Count",  "Amount", "Frequency", "Percent", "Score",  "Rate",   "Total",
      "Units", "Price",  "Time",   "Year",      "Month",   "Region", "Weight", "Height",
      "Speed", "Income", "Age",    "Size",      "Index",   "Level",  "Volume", "Cost",
      "Hours", "Sales",  "Depth",  "Length",    "Mass",    "Days"};
  return w;
}

inline const std::vector<std::string>& category() {
  static const std::vector<std::string> w = {
      "Jan",   "Feb",   "Mar",   "Apr",   "May",  "Jun",  "Jul",   "Aug",  "Sep",  "Oct",
      "Nov",   "Dec",   "Mon",   "Tue",   "Wed",  "Thu",  "Fri",   "Sat",  "Sun",  "Apple",
      "Pear",  "Plum",  "Kiwi",  "Lime",  "Mango", "Grape", "North", "South", "East", "West",
      "Alpha", "Beta",  "Gamma", "Delta", "Q1",   "Q2",   "Q3",    "Q4",   "Red",  "Blue",
      "Green", "Gold",  "Iron",  "Zinc",  "Oak",  "Pine", "Cedar", "Maple", "Paris", "Rome",
      "Oslo",  "Tokyo", "Lima",  "Cairo", "Bus",  "Train", "Car",   "Bike", "Ferry", "Taxi"};
  return w;
}

inline const std::vector<std::string>& series() {
  static const std::vector<std::string> w = {
      "Sales",   "Costs",  "Profit", "Revenue", "Online", "Retail",   "Urban",   "Rural",
      "Men",     "Women",  "Youth",  "Adults",  "Actual", "Target",   "Budget",  "Forecast",
      "Control", "Treated", "Group", "Model",   "Export", "Import",   "Winter",  "Summer",
      "Spring",  "Autumn", "Day",    "Night",   "Local",  "Visitors", "Planned", "Observed"};
  return w;
}

}  // namespace words

namespace detail {

inline double round_tenth(double v) { return std::round(v * 10.0) / 10.0; }

inline std::string join_words(const std::vector<std::string>& ws) {
  std::string out;
  for (const auto& w : ws) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace detail

/// Random but valid spec; a pure function of (class, seed).
inline ChartSpec sample_spec(ChartClass cls, std::uint64_t seed) {
  Rng rng(seed);
  ChartSpec s;
  s.chart_class = cls;
  s.seed = seed;
  s.palette_id = rng.between(0, 7);

  if (is_scatter_family(cls) && rng.chance(0.10)) {
    const auto pair = rng.sample(words::axis(), 2);
    s.title = pair[0] + " vs " + pair[1];
  } else {
    s.title = detail::join_words(rng.sample(words::title(), static_cast<std::size_t>(rng.between(2, 4))));
  }

  if (has_axes(cls)) {
    auto label = [&]() -> std::optional<std::string> {
      if (!rng.chance(0.85)) return std::nullopt;
      return detail::join_words(rng.sample(words::axis(), static_cast<std::size_t>(rng.between(1, 2))));
    };
    s.x_label = label();
    s.y_label = label();
  }

  if (cls == ChartClass::heatmap) {
    s.grid.rows = rng.between(4, 8);
    s.grid.cols = rng.between(4, 8);
    for (int i = 0; i < s.grid.rows * s.grid.cols; ++i) s.grid.cells.push_back(rng.between(1, 100));
    s.overlay_cell_values = rng.chance(0.5);
    return s;
  }

  const int n = rng.between(3, 8);
  if (is_scatter_family(cls)) {
    std::vector<double> xs;
    while (static_cast<int>(xs.size()) < n) {
      const double x = detail::round_tenth(rng.uniform(2.0, 98.0));
      if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    for (double x : xs) s.categories.emplace_back(x);
  } else {
    for (auto& c : rng.sample(words::category(), static_cast<std::size_t>(n))) s.categories.emplace_back(c);
  }

  const int n_series = is_multi_series(cls) ? rng.between(2, 4) : 1;
  const auto names = rng.sample(words::series(), static_cast<std::size_t>(n_series));
  for (int k = 0; k < n_series; ++k) {
    Series ser;
    ser.name = names[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) ser.values.push_back(detail::round_tenth(rng.uniform(1.0, 100.0)));
    s.series.push_back(std::move(ser));
  }
  s.legend = is_multi_series(cls);
  return s;
}

// ---------------------------------------------------------------------------
// Rendering

namespace layout {
inline constexpr int kWidth = 640;
inline constexpr int kHeight = 480;
inline constexpr int kPlotLeft = 80;
inline constexpr int kPlotRight = 560;
inline constexpr int kPlotTop = 60;
inline constexpr int kPlotBottom = 420;
inline constexpr int kTitleTop = 12;
inline constexpr int kLabelScale = 2;
inline constexpr int kYLabelLeft = 16;
inline constexpr int kXLabelTop = 448;
inline constexpr int kTickLabelTop = 428;
inline constexpr int kTickLength = 4;
inline constexpr int kLegendTop = 66;
inline constexpr int kLegendPitch = 12;
inline constexpr int kLegendMarker = 7;
inline constexpr int kLegendInset = 6;
inline constexpr int kScatterRadius = 5;
inline constexpr int kPieCx = 320;
inline constexpr int kPieCy = 240;
inline constexpr int kPieRadius = 100;
inline constexpr int kPieLabelOffset = 10;
inline constexpr int kPieLabelPitch = 22;
inline constexpr int kPieLabelMinY = 70;
inline constexpr int kPieLabelMaxY = 352;
}  // namespace layout

inline const std::array<Color, 8>& palette() {
  static const std::array<Color, 8> p = {{{31, 119, 180},
                                          {255, 127, 14},
                                          {44, 160, 44},
                                          {214, 39, 40},
                                          {148, 103, 189},
                                          {140, 86, 75},
                                          {227, 119, 194},
                                          {127, 127, 127}}};
  return p;
}

inline Color palette_color(int palette_id, std::size_t i) {
  return palette()[(static_cast<std::size_t>(palette_id) + i) % palette().size()];
}

/// Light 8-step ramp; every step stays brighter than the OCR threshold so
/// overlaid black digits remain separable.
inline Color heat_color(double v) {
  const int idx = std::clamp(static_cast<int>(v / 12.5), 0, 7);
  const Color lo{255, 245, 220}, hi{230, 130, 60};
  auto mix = [&](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(a + (b - a) * idx / 7.0));
  };
  return {mix(lo.r, hi.r), mix(lo.g, hi.g), mix(lo.b, hi.b)};
}

struct RenderResult {
  RasterImage image;
  GroundTruth truth;
};

namespace detail {

class ChartPainter {
 public:
  explicit ChartPainter(const ChartSpec& spec)
      : spec_(spec), img_(layout::kWidth, layout::kHeight, 3, 255) {
    truth_.chart_class = spec.chart_class;
    truth_.title = spec.title.empty() ? std::nullopt : std::optional<std::string>(spec.title);
    truth_.x_label = spec.x_label;
    truth_.y_label = spec.y_label;
    truth_.legend = spec.legend;
    truth_.categories = spec.categories;
    truth_.series = spec.series;
    truth_.seed = spec.seed;
    truth_.palette_id = spec.palette_id;
    truth_.grid = spec.grid;
    truth_.overlay_cell_values = spec.overlay_cell_values;
  }

  RenderResult run() {
    switch (spec_.chart_class) {
      case ChartClass::bar:
      case ChartClass::stacked_bar:
      case ChartClass::grouped_bar: bars(); break;
      case ChartClass::scatter:
      case ChartClass::grouped_scatter: scatter(); break;
      case ChartClass::pie: pie(); break;
      case ChartClass::heatmap: heatmap(); break;
    }
    labels();
    if (spec_.legend) legend();
    return {std::move(img_), std::move(truth_)};
  }

 private:
  Box text(int x, int y, const std::string& s, int scale, TextOrientation o, TextRole role) {
    const Box b = draw_text(img_, x, y, s, scale, o, kBlack);
    truth_.text_items.push_back({s, b, o, role});
    return b;
  }

  void centered_text(double cx, int y, const std::string& s, int scale, TextRole role) {
    const int w = BitmapFont::text_units(s) * scale;
    text(static_cast<int>(std::lround(cx - w / 2.0)), y, s, scale, TextOrientation::horizontal, role);
  }

  static int y_of(double v, double ymax) {
    const int span = layout::kPlotBottom - layout::kPlotTop;
    return layout::kPlotBottom - static_cast<int>(std::lround(v / ymax * span));
  }

  void axes() {
    draw_shape(img_, LineShape{layout::kPlotLeft, layout::kPlotTop, layout::kPlotLeft, layout::kPlotBottom}, kBlack);
    draw_shape(img_, LineShape{layout::kPlotLeft, layout::kPlotBottom, layout::kPlotRight, layout::kPlotBottom},
               kBlack);
  }

  void tick(double x, const std::string& label) {
    const int xi = static_cast<int>(std::lround(x));
    draw_shape(img_, LineShape{xi, layout::kPlotBottom, xi, layout::kPlotBottom + layout::kTickLength}, kBlack);
    centered_text(x, layout::kTickLabelTop, label, 1, TextRole::tick_label);
  }

  void bars() {
    const auto n = spec_.categories.size();
    const double pitch = static_cast<double>(layout::kPlotRight - layout::kPlotLeft) / static_cast<double>(n);
    double top = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double stack = 0;
      for (const auto& s : spec_.series) {
        stack += s.values[i];
        top = std::max(top, spec_.chart_class == ChartClass::stacked_bar ? stack : s.values[i]);
      }
    }
    const double ymax = top * 4.0 / 3.0;
    const int base = layout::kPlotBottom - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double cx = layout::kPlotLeft + pitch * (static_cast<double>(i) + 0.5);
      if (spec_.chart_class == ChartClass::grouped_bar) {
        const double group = 0.8 * pitch;
        const double w = group / static_cast<double>(spec_.series.size());
        for (std::size_t k = 0; k < spec_.series.size(); ++k) {
          const int x0 = static_cast<int>(std::lround(cx - group / 2 + w * static_cast<double>(k)));
          const int x1 = static_cast<int>(std::lround(cx - group / 2 + w * static_cast<double>(k + 1))) - 1;
          draw_shape(img_, RectShape{x0, y_of(spec_.series[k].values[i], ymax), x1, base},
                     palette_color(spec_.palette_id, k));
        }
      } else {
        const int bw = static_cast<int>(std::lround(0.6 * pitch));
        const int x0 = static_cast<int>(std::lround(cx - bw / 2.0));
        double cum = 0;
        for (std::size_t k = 0; k < spec_.series.size(); ++k) {
          const int bottom = k == 0 ? base : y_of(cum, ymax) - 1;
          cum += spec_.series[k].values[i];
          const int y0 = y_of(cum, ymax);
          if (y0 <= bottom) draw_shape(img_, RectShape{x0, y0, x0 + bw - 1, bottom}, palette_color(spec_.palette_id, k));
        }
      }
    }
    axes();
    for (std::size_t i = 0; i < n; ++i)
      tick(layout::kPlotLeft + pitch * (static_cast<double>(i) + 0.5), category_text(spec_.categories[i]));
  }

  void scatter() {
    double top = 0;
    for (const auto& s : spec_.series)
      for (double v : s.values) top = std::max(top, v);
    const double ymax = top * 4.0 / 3.0;
    const double width = layout::kPlotRight - layout::kPlotLeft;
    for (std::size_t k = 0; k < spec_.series.size(); ++k)
      for (std::size_t i = 0; i < spec_.categories.size(); ++i) {
        const double x = std::get<double>(spec_.categories[i]);
        const int px = layout::kPlotLeft + static_cast<int>(std::lround(x / 100.0 * width));
        draw_shape(img_, DiscShape{px, y_of(spec_.series[k].values[i], ymax), layout::kScatterRadius},
                   palette_color(spec_.palette_id, k));
      }
    axes();
    for (int t = 0; t <= 100; t += 20) tick(layout::kPlotLeft + t / 100.0 * width, std::to_string(t));
  }

  void heatmap() {
    const auto& g = spec_.grid;
    const int w = layout::kPlotRight - layout::kPlotLeft, h = layout::kPlotBottom - layout::kPlotTop;
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) {
        const int x0 = layout::kPlotLeft + static_cast<int>(std::lround(static_cast<double>(c) * w / g.cols));
        const int x1 = layout::kPlotLeft + static_cast<int>(std::lround(static_cast<double>(c + 1) * w / g.cols)) - 1;
        const int y0 = layout::kPlotTop + static_cast<int>(std::lround(static_cast<double>(r) * h / g.rows));
        const int y1 = layout::kPlotTop + static_cast<int>(std::lround(static_cast<double>(r + 1) * h / g.rows)) - 1;
        const double v = g.cells[static_cast<std::size_t>(r * g.cols + c)];
        draw_shape(img_, RectShape{x0, y0, x1, y1}, heat_color(v));
        if (spec_.overlay_cell_values) {
          const std::string s = std::to_string(std::lround(v));
          centered_text((x0 + x1 + 1) / 2.0, (y0 + y1 + 1) / 2 - BitmapFont::kGlyphHeight / 2, s, 1,
                        TextRole::cell_value);
        }
      }
  }

  void pie() {
    const auto& values = spec_.series.front().values;
    double total = 0;
    for (double v : values) total += v;
    constexpr double kPi = 3.14159265358979323846;
    const int r = layout::kPieRadius;
    const auto disc = disc_half_widths(r);

    struct Label {
      std::string text;
      int width;
      double mid;
      int y;
      bool right;
    };
    std::vector<Label> labels;
    double start = 90.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double span = values[i] / total * 360.0;
      const double end = i + 1 == values.size() ? 450.0 : start + span;
      draw_shape(img_, WedgeShape{layout::kPieCx, layout::kPieCy, r, start, end}, palette_color(spec_.palette_id, i));
      const double mid = (start + end) / 2.0 * kPi / 180.0;
      const double ly = layout::kPieCy - (r + layout::kPieLabelOffset) * std::sin(mid);
      const std::string s = category_text(spec_.categories[i]);
      labels.push_back({s, BitmapFont::text_units(s), mid,
                        static_cast<int>(std::lround(ly)) - BitmapFont::kGlyphHeight / 2, std::cos(mid) >= 0});
      start = end;
    }

    // Spread each side's labels so rows never crowd together.
    for (bool right : {true, false}) {
      std::vector<Label*> side;
      for (auto& l : labels)
        if (l.right == right) side.push_back(&l);
      std::stable_sort(side.begin(), side.end(), [](const Label* a, const Label* b) { return a->y < b->y; });
      for (std::size_t k = 0; k < side.size(); ++k) {
        if (k > 0) side[k]->y = std::max(side[k]->y, side[k - 1]->y + layout::kPieLabelPitch);
        side[k]->y = std::max(side[k]->y, layout::kPieLabelMinY);
      }
      for (std::size_t k = side.size(); k-- > 0;) {
        side[k]->y = std::min(side[k]->y, layout::kPieLabelMaxY);
        if (k + 1 < side.size()) side[k]->y = std::min(side[k]->y, side[k + 1]->y - layout::kPieLabelPitch);
      }
    }

    for (const auto& l : labels) {
      // Horizontal clearance: on the label circle, and never over the disc.
      const double dy_mid = l.y + BitmapFont::kGlyphHeight / 2.0 - layout::kPieCy;
      const double rr = r + layout::kPieLabelOffset;
      double dx = std::sqrt(std::max(0.0, rr * rr - dy_mid * dy_mid));
      int nearest = std::min(std::abs(l.y - layout::kPieCy), std::abs(l.y + BitmapFont::kGlyphHeight - 1 - layout::kPieCy));
      if (l.y <= layout::kPieCy && l.y + BitmapFont::kGlyphHeight - 1 >= layout::kPieCy) nearest = 0;
      if (nearest <= r) dx = std::max(dx, disc[static_cast<std::size_t>(nearest)] + 4.0);
      const int off = static_cast<int>(std::lround(dx));
      const int x = l.right ? layout::kPieCx + off : layout::kPieCx - off - l.width;
      text(x, l.y, l.text, 1, TextOrientation::horizontal, TextRole::slice_label);
    }
  }

  void labels() {
    if (!spec_.title.empty()) centered_text(layout::kWidth / 2.0, layout::kTitleTop, spec_.title, 2, TextRole::title);
    if (spec_.y_label && !spec_.y_label->empty()) {
      const int len = BitmapFont::text_units(*spec_.y_label) * layout::kLabelScale;
      text(layout::kYLabelLeft, static_cast<int>(std::lround(layout::kHeight / 2.0 - len / 2.0)), *spec_.y_label,
           layout::kLabelScale, TextOrientation::vertical, TextRole::y_label);
    }
    if (spec_.x_label && !spec_.x_label->empty())
      centered_text((layout::kPlotLeft + layout::kPlotRight) / 2.0, layout::kXLabelTop, *spec_.x_label,
                    layout::kLabelScale, TextRole::x_label);
  }

  void legend() {
    std::vector<std::pair<std::size_t, std::string>> rows;
    int widest = 0;
    for (std::size_t k = 0; k < spec_.series.size(); ++k) {
      if (spec_.series[k].name.empty()) continue;
      rows.emplace_back(k, spec_.series[k].name);
      widest = std::max(widest, BitmapFont::text_units(spec_.series[k].name));
    }
    const int x0 = layout::kPlotRight - layout::kLegendInset - (layout::kLegendMarker + 3 + widest);
    int y = layout::kLegendTop;
    for (const auto& [k, name] : rows) {
      draw_shape(img_, RectShape{x0, y, x0 + layout::kLegendMarker - 1, y + layout::kLegendMarker - 1},
                 palette_color(spec_.palette_id, k));
      text(x0 + layout::kLegendMarker + 3, y, name, 1, TextOrientation::horizontal, TextRole::legend_entry);
      truth_.legend_entries.push_back(name);
      y += layout::kLegendPitch;
    }
  }

  const ChartSpec& spec_;
  RasterImage img_;
  GroundTruth truth_;
};

}  // namespace detail

/// Deterministic 640x480 RGB rendering plus the record of everything drawn.
inline RenderResult render(const ChartSpec& spec) {
  require_valid(spec);
  return detail::ChartPainter(spec).run();
}

// ---------------------------------------------------------------------------
// Corpus generation

/// Per-item seed: FNV-1a over master seed, class name and index.
inline std::uint64_t item_seed(std::uint64_t master_seed, ChartClass cls, std::uint64_t index) {
  return Fnv1a().u64_le(master_seed).text(to_string(cls)).u64_le(index).value();
}

using ClassCounts = std::map<ChartClass, int>;

inline ClassCounts default_counts() {
  return {{ChartClass::bar, 300},         {ChartClass::stacked_bar, 200}, {ChartClass::grouped_bar, 200},
          {ChartClass::scatter, 300},     {ChartClass::grouped_scatter, 200}, {ChartClass::pie, 200},
          {ChartClass::heatmap, 200}};
}

/// Parses "bar=300,scatter=300,..."; classes not named get 0.
inline ClassCounts parse_counts(std::string_view text) {
  ClassCounts out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    const auto item = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) {
      if (comma >= text.size()) break;
      continue;
    }
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) fail(errc::invalid_argument, "expected class=count, got '" + std::string(item) + "'");
    const ChartClass cls = parse_chart_class(item.substr(0, eq));
    const std::string num(item.substr(eq + 1));
    std::size_t used = 0;
    int n = -1;
    try {
      n = std::stoi(num, &used);
    } catch (const std::exception&) {
    }
    if (used != num.size() || n < 0) fail(errc::invalid_argument, "bad count '" + num + "' for " + std::string(to_string(cls)));
    out[cls] += n;
  }
  return out;
}

struct ManifestItem {
  std::string image_path;  // relative to the manifest directory
  std::string truth_path;
  ChartClass chart_class = ChartClass::bar;
  friend bool operator==(const ManifestItem&, const ManifestItem&) = default;
};

struct CorpusManifest {
  std::string generator_version = kGeneratorVersion;
  std::uint64_t master_seed = 0;
  ClassCounts counts;
  std::vector<ManifestItem> items;
  std::filesystem::path root;  // directory holding manifest.json; not serialized

  std::filesystem::path image_file(const ManifestItem& it) const { return root / it.image_path; }
  std::filesystem::path truth_file(const ManifestItem& it) const { return root / it.truth_path; }
};

inline nlohmann::json manifest_json(const CorpusManifest& m) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [cls, n] : m.counts) counts[std::string(to_string(cls))] = n;
  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : m.items)
    items.push_back({{"image_path", it.image_path}, {"truth_path", it.truth_path}, {"class", to_string(it.chart_class)}});
  return {{"generator_version", m.generator_version}, {"master_seed", m.master_seed}, {"counts", counts}, {"items", items}};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

inline nlohmann::json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::decode, path.string() + ": " + e.what());
  }
}

/// Accepts the manifest file itself or the directory containing it.
inline CorpusManifest read_manifest(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / "manifest.json" : path;
  const auto j = parse_json_file(file);
  CorpusManifest m;
  try {
    m.generator_version = j.at("generator_version").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("counts").items()) m.counts[parse_chart_class(k)] = v.get<int>();
    for (const auto& it : j.at("items"))
      m.items.push_back({it.at("image_path").get<std::string>(), it.at("truth_path").get<std::string>(),
                         parse_chart_class(it.at("class").get<std::string>())});
  } catch (const nlohmann::json::exception& e) {
    fail(errc::decode, file.string() + ": malformed manifest: " + e.what());
  }
  m.root = file.parent_path();
  return m;
}

inline GroundTruth read_truth(const std::filesystem::path& path) {
  const auto j = parse_json_file(path);
  try {
    return j.get<GroundTruth>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::decode, path.string() + ": malformed ground truth: " + e.what());
  }
}

struct CorpusConfig {
  ClassCounts counts = default_counts();
  std::uint64_t master_seed = 0;
  std::filesystem::path out_dir;
  unsigned threads = 1;
};

/// Writes images/, truth/ and manifest.json under out_dir.
inline CorpusManifest generate_corpus(const CorpusConfig& cfg) {
  namespace fs = std::filesystem;
  CorpusManifest m;
  m.master_seed = cfg.master_seed;
  m.root = cfg.out_dir;
  struct Job {
    ChartClass cls;
    int index;
  };
  std::vector<Job> jobs;
  for (ChartClass cls : kAllChartClasses) {
    const auto it = cfg.counts.find(cls);
    const int n = it == cfg.counts.end() ? 0 : it->second;
    if (n < 0) fail(errc::invalid_argument, "negative count for " + std::string(to_string(cls)));
    if (it != cfg.counts.end()) m.counts[cls] = n;
    for (int i = 0; i < n; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%05d", std::string(to_string(cls)).c_str(), i);
      m.items.push_back({std::string("images/") + name + ".png", std::string("truth/") + name + ".json", cls});
      jobs.push_back({cls, i});
    }
  }

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) fail(errc::io, "cannot create " + cfg.out_dir.string() + ": " + ec.message());
  if (!jobs.empty()) {
    fs::create_directories(cfg.out_dir / "images", ec);
    if (!ec) fs::create_directories(cfg.out_dir / "truth", ec);
    if (ec) fail(errc::io, "cannot create corpus subdirectories in " + cfg.out_dir.string() + ": " + ec.message());
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> written{0};
  std::mutex err_mu;
  std::optional<std::string> first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      {
        std::lock_guard lock(err_mu);
        if (first_error) return;
      }
      try {
        const auto& job = jobs[k];
        const auto spec = sample_spec(job.cls, item_seed(cfg.master_seed, job.cls, static_cast<std::uint64_t>(job.index)));
        const auto rr = render(spec);
        write_image(rr.image, m.image_file(m.items[k]));
        write_text_file(m.truth_file(m.items[k]), nlohmann::json(rr.truth).dump(2) + "\n");
        written.fetch_add(1);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = m.items[k].image_path + ": " + e.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error)
    fail(errc::io, "corpus generation aborted after writing " + std::to_string(written.load()) + " of " +
                       std::to_string(jobs.size()) + " items: " + *first_error);

  write_text_file(cfg.out_dir / "manifest.json", manifest_json(m).dump(2) + "\n");
  return m;
}

}  // namespace g2l
