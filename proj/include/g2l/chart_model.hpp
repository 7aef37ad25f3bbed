#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "g2l/error.hpp"
#include "g2l/raster/font.hpp"

namespace g2l {

enum class ChartClass { bar, stacked_bar, grouped_bar, scatter, grouped_scatter, pie, heatmap };

inline constexpr std::array<ChartClass, 7> kAllChartClasses = {
    ChartClass::bar,     ChartClass::stacked_bar,     ChartClass::grouped_bar, ChartClass::scatter,
    ChartClass::grouped_scatter, ChartClass::pie, ChartClass::heatmap};

inline std::string_view to_string(ChartClass c) {
  switch (c) {
    case ChartClass::bar: return "bar";
    case ChartClass::stacked_bar: return "stacked_bar";
    case ChartClass::grouped_bar: return "grouped_bar";
    case ChartClass::scatter: return "scatter";
    case ChartClass::grouped_scatter: return "grouped_scatter";
    case ChartClass::pie: return "pie";
    case ChartClass::heatmap: return "heatmap";
  }
  fail(errc::internal, "unknown chart class value " + std::to_string(static_cast<int>(c)));
}

/// "color_map" and "heat_map" are accepted as heatmap aliases.
inline ChartClass parse_chart_class(std::string_view s) {
  for (ChartClass c : kAllChartClasses)
    if (to_string(c) == s) return c;
  if (s == "color_map" || s == "colormap" || s == "heat_map") return ChartClass::heatmap;
  fail(errc::invalid_argument, "unknown chart class '" + std::string(s) + "'");
}

inline std::size_t class_index(ChartClass c) { return static_cast<std::size_t>(c); }

inline bool is_bar_family(ChartClass c) {
  return c == ChartClass::bar || c == ChartClass::stacked_bar || c == ChartClass::grouped_bar;
}
inline bool is_scatter_family(ChartClass c) {
  return c == ChartClass::scatter || c == ChartClass::grouped_scatter;
}
inline bool is_multi_series(ChartClass c) {
  return c == ChartClass::stacked_bar || c == ChartClass::grouped_bar ||
         c == ChartClass::grouped_scatter;
}
inline bool has_axes(ChartClass c) { return c != ChartClass::pie; }

// Labels for bar families and pie slices; numeric x positions for scatter.
using Category = std::variant<std::string, double>;

inline std::string category_text(const Category& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  const double v = std::get<double>(c);
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  std::string out = std::to_string(v);
  while (!out.empty() && out.back() == '0') out.pop_back();
  return out;
}

struct Series {
  std::string name;
  std::vector<double> values;
  friend bool operator==(const Series&, const Series&) = default;
};

struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> cells;  // row-major
  friend bool operator==(const Grid&, const Grid&) = default;
};

struct ChartSpec {
  ChartClass chart_class = ChartClass::bar;
  std::string title;
  std::optional<std::string> x_label;
  std::optional<std::string> y_label;
  std::vector<Category> categories;
  std::vector<Series> series;
  bool legend = false;
  Grid grid;
  bool overlay_cell_values = false;
  int palette_id = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ChartSpec&, const ChartSpec&) = default;
};

struct Violation {
  std::string field;
  std::string rule;
  friend bool operator==(const Violation&, const Violation&) = default;
};

namespace detail {
inline bool drawable(std::string_view s) {
  for (char c : s)
    if (!BitmapFont::printable(c)) return false;
  return true;
}
}  // namespace detail

/// Checks every ChartSpec invariant; an empty result means the spec is valid.
inline std::vector<Violation> validate(const ChartSpec& spec) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string rule) { out.push_back({std::move(field), std::move(rule)}); };
  const ChartClass cls = spec.chart_class;

  if (!detail::drawable(spec.title)) add("title", "string not drawable by the bitmap font");
  if (spec.x_label && !detail::drawable(*spec.x_label)) add("x_label", "string not drawable by the bitmap font");
  if (spec.y_label && !detail::drawable(*spec.y_label)) add("y_label", "string not drawable by the bitmap font");
  if (spec.palette_id < 0) add("palette_id", "must be non-negative");

  if (cls == ChartClass::heatmap) {
    if (spec.grid.rows < 1 || spec.grid.cols < 1) add("grid", "heatmap grid needs rows and cols >= 1");
    if (spec.grid.cells.size() != static_cast<std::size_t>(std::max(spec.grid.rows, 0)) *
                                      static_cast<std::size_t>(std::max(spec.grid.cols, 0)))
      add("grid.cell_values", "cell count must equal rows x cols");
    for (double v : spec.grid.cells)
      if (!std::isfinite(v) || v < 0) {
        add("grid.cell_values", "values must be finite and non-negative");
        break;
      }
    if (!spec.series.empty()) add("series", "heatmap must not have series");
    if (!spec.categories.empty()) add("categories", "heatmap must not have categories");
  } else {
    if (!spec.grid.cells.empty() || spec.grid.rows != 0 || spec.grid.cols != 0)
      add("grid", "grid is only valid for heatmap");
    if (spec.overlay_cell_values) add("overlay_cell_values", "only valid for heatmap");
    if (spec.categories.empty()) add("categories", "at least one category required");
    if (spec.series.empty()) add("series", "at least one series required");
    for (std::size_t i = 0; i < spec.series.size(); ++i) {
      const auto& s = spec.series[i];
      const std::string field = "series[" + std::to_string(i) + "]";
      if (s.values.size() != spec.categories.size()) add(field, "series length mismatch");
      if (!detail::drawable(s.name)) add(field + ".name", "string not drawable by the bitmap font");
      for (double v : s.values)
        if (!std::isfinite(v) || v < 0) {
          add(field + ".values", "values must be finite and non-negative");
          break;
        }
    }
    for (std::size_t i = 0; i < spec.categories.size(); ++i) {
      const auto& c = spec.categories[i];
      const std::string field = "categories[" + std::to_string(i) + "]";
      if (is_scatter_family(cls)) {
        if (!std::holds_alternative<double>(c) || !std::isfinite(std::get<double>(c)))
          add(field, "scatter categories must be finite numbers");
      } else if (const auto* s = std::get_if<std::string>(&c)) {
        if (!detail::drawable(*s)) add(field, "string not drawable by the bitmap font");
      } else {
        add(field, "categories must be labels for this class");
      }
    }
  }

  if (cls == ChartClass::pie) {
    if (spec.series.size() != 1) add("series", "pie needs exactly one series");
    for (const auto& s : spec.series)
      for (double v : s.values)
        if (!(v > 0)) {
          add("series", "pie values must be positive");
          break;
        }
    if (spec.x_label || spec.y_label) add("x_label/y_label", "pie charts have no axis labels");
  }

  if (spec.legend) {
    const bool named = std::any_of(spec.series.begin(), spec.series.end(),
                                   [](const Series& s) { return !s.name.empty(); });
    if (!named) add("legend", "legend requires at least one named series");
  }
  return out;
}

inline std::string describe(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.field + ": " + v.rule;
  }
  return out;
}

inline void require_valid(const ChartSpec& spec) {
  const auto v = validate(spec);
  if (!v.empty()) fail(errc::validation, "invalid chart spec: " + describe(v));
}

/// The seven grammar-of-graphics components of a chart.
struct GrammarLayers {
  std::string data;
  std::string aesthetics;
  std::string scale;
  std::string geometric_object;
  std::string statistics;
  std::string facets;
  std::string coordinate_system;
};

inline GrammarLayers layer_view(const ChartSpec& spec) {
  require_valid(spec);
  GrammarLayers g;
  const auto n_cat = std::to_string(spec.categories.size());
  const auto n_ser = std::to_string(spec.series.size());
  g.statistics = spec.chart_class == ChartClass::stacked_bar ? "identity (stacked)" : "identity";
  g.facets = "none";
  g.coordinate_system = "cartesian";
  switch (spec.chart_class) {
    case ChartClass::bar:
    case ChartClass::stacked_bar:
    case ChartClass::grouped_bar:
      g.data = n_cat + " categories x " + n_ser + " series";
      g.aesthetics = spec.series.size() > 1 ? "x=category, y=value, fill=series" : "x=category, y=value";
      g.scale = "categorical x, linear y";
      g.geometric_object = "bar";
      break;
    case ChartClass::scatter:
    case ChartClass::grouped_scatter:
      g.data = n_cat + " points x " + n_ser + " series";
      g.aesthetics = spec.series.size() > 1 ? "x=x_value, y=value, color=series" : "x=x_value, y=value";
      g.scale = "linear x, linear y";
      g.geometric_object = "point";
      break;
    case ChartClass::pie:
      g.data = n_cat + " slices";
      g.aesthetics = "angle=value, fill=category";
      g.scale = "linear angle";
      g.geometric_object = "wedge";
      g.coordinate_system = "polar";
      break;
    case ChartClass::heatmap:
      g.data = std::to_string(spec.grid.rows) + "x" + std::to_string(spec.grid.cols) + " grid";
      g.aesthetics = "x=column, y=row, fill=value";
      g.scale = "categorical x, categorical y, sequential fill";
      g.geometric_object = "tile";
      break;
  }
  return g;
}

}  // namespace g2l

template <>
struct nlohmann::adl_serializer<g2l::Category> {
  static void to_json(json& j, const g2l::Category& c) {
    if (const auto* s = std::get_if<std::string>(&c))
      j = *s;
    else
      j = std::get<double>(c);
  }
  static void from_json(const json& j, g2l::Category& c) {
    if (j.is_string())
      c = j.get<std::string>();
    else if (j.is_number())
      c = j.get<double>();
    else
      g2l::fail(g2l::errc::decode, "category must be a string or a number");
  }
};

namespace g2l {

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const Series& s) {
  j = {{"name", s.name}, {"values", s.values}};
}

inline void from_json(const nlohmann::json& j, Series& s) {
  s.name = j.at("name").get<std::string>();
  s.values = j.at("values").get<std::vector<double>>();
}

inline nlohmann::json optional_string_json(const std::optional<std::string>& s) {
  return s ? nlohmann::json(*s) : nlohmann::json(nullptr);
}

inline std::optional<std::string> optional_string_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

inline void to_json(nlohmann::json& j, const ChartSpec& s) {
  j = nlohmann::json{{"class", to_string(s.chart_class)},
                     {"title", s.title},
                     {"x_label", optional_string_json(s.x_label)},
                     {"y_label", optional_string_json(s.y_label)},
                     {"categories", s.categories},
                     {"series", s.series},
                     {"legend", s.legend},
                     {"grid", {{"rows", s.grid.rows}, {"cols", s.grid.cols}, {"cell_values", s.grid.cells}}},
                     {"overlay_cell_values", s.overlay_cell_values},
                     {"palette_id", s.palette_id},
                     {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, ChartSpec& s) {
  s.chart_class = parse_chart_class(j.at("class").get<std::string>());
  s.title = j.at("title").get<std::string>();
  s.x_label = optional_string_from(j, "x_label");
  s.y_label = optional_string_from(j, "y_label");
  s.categories = j.value("categories", std::vector<Category>{});
  s.series = j.value("series", std::vector<Series>{});
  s.legend = j.value("legend", false);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    s.grid.rows = g.value("rows", 0);
    s.grid.cols = g.value("cols", 0);
    s.grid.cells = g.value("cell_values", std::vector<double>{});
  }
  s.overlay_cell_values = j.value("overlay_cell_values", false);
  s.palette_id = j.value("palette_id", 0);
  s.seed = j.value("seed", std::uint64_t{0});
}

}  // namespace g2l
