#include <gtest/gtest.h>

#include "g2l/chart_model.hpp"
#include "g2l/corpus.hpp"

using namespace g2l;

namespace {

ChartSpec bar_spec() {
  ChartSpec s;
  s.chart_class = ChartClass::bar;
  s.title = "Average Monthly Rainfall";
  s.categories = {std::string("Jan"), std::string("Feb"), std::string("Mar"), std::string("Apr")};
  s.series = {{"Rain", {1, 2, 3, 4}}};
  return s;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  for (const auto& x : v)
    if (x.rule == rule) return true;
  return false;
}

}  // namespace

TEST(ChartClass, ClosedEnumerationOfSeven) {
  EXPECT_EQ(kAllChartClasses.size(), 7u);
  for (auto c : kAllChartClasses) EXPECT_EQ(parse_chart_class(to_string(c)), c);
  EXPECT_EQ(parse_chart_class("color_map"), ChartClass::heatmap);
  EXPECT_THROW(parse_chart_class("line"), error);
}

TEST(Validate, WellFormedBarIsOk) { EXPECT_TRUE(validate(bar_spec()).empty()); }

TEST(Validate, SeriesLengthMismatch) {
  ChartSpec s = bar_spec();
  s.chart_class = ChartClass::stacked_bar;
  s.categories.pop_back();
  s.series = {{"A", {1, 2, 3}}, {"B", {1, 2, 3, 4}}};
  const auto v = validate(s);
  EXPECT_TRUE(has_rule(v, "series length mismatch"));
  EXPECT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "series[1]");
}

TEST(Validate, PieValuesMustBePositive) {
  ChartSpec s = bar_spec();
  s.chart_class = ChartClass::pie;
  s.series[0].values[2] = -1;
  EXPECT_TRUE(has_rule(validate(s), "pie values must be positive"));
  s.series[0].values[2] = 0;
  EXPECT_TRUE(has_rule(validate(s), "pie values must be positive"));
}

TEST(Validate, OtherRules) {
  ChartSpec heat;
  heat.chart_class = ChartClass::heatmap;
  heat.title = "Heat";
  heat.grid = {2, 3, {1, 2, 3, 4, 5}};
  EXPECT_TRUE(has_rule(validate(heat), "cell count must equal rows x cols"));
  heat.grid.cells.push_back(6);
  EXPECT_TRUE(validate(heat).empty());
  heat.series = {{"x", {}}};
  EXPECT_TRUE(has_rule(validate(heat), "heatmap must not have series"));

  ChartSpec s = bar_spec();
  s.series[0].name = "";
  s.legend = true;
  EXPECT_TRUE(has_rule(validate(s), "legend requires at least one named series"));

  s = bar_spec();
  s.title = "caf\xc3\xa9";
  EXPECT_TRUE(has_rule(validate(s), "string not drawable by the bitmap font"));

  s = bar_spec();
  s.chart_class = ChartClass::scatter;
  EXPECT_TRUE(has_rule(validate(s), "scatter categories must be finite numbers"));

  s = bar_spec();
  s.overlay_cell_values = true;
  EXPECT_FALSE(validate(s).empty());
}

TEST(Validate, IsPure) {
  ChartSpec s = bar_spec();
  s.series[0].values.push_back(3);
  EXPECT_EQ(validate(s), validate(s));
}

TEST(LayerView, DecisionTable) {
  const auto bar = layer_view(bar_spec());
  EXPECT_EQ(bar.geometric_object, "bar");
  EXPECT_EQ(bar.coordinate_system, "cartesian");
  EXPECT_EQ(bar.facets, "none");

  ChartSpec pie = bar_spec();
  pie.chart_class = ChartClass::pie;
  EXPECT_EQ(layer_view(pie).geometric_object, "wedge");
  EXPECT_EQ(layer_view(pie).coordinate_system, "polar");

  ChartSpec heat;
  heat.chart_class = ChartClass::heatmap;
  heat.grid = {1, 1, {5}};
  EXPECT_EQ(layer_view(heat).geometric_object, "tile");
}

TEST(LayerView, InvalidSpecThrows) {
  ChartSpec s = bar_spec();
  s.series[0].values.pop_back();
  try {
    layer_view(s);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::validation);
  }
}

TEST(LayerView, AllSevenPopulatedForSampledSpecs) {
  for (auto c : kAllChartClasses)
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto g = layer_view(sample_spec(c, seed));
      for (const auto* f : {&g.data, &g.aesthetics, &g.scale, &g.geometric_object, &g.statistics, &g.facets,
                            &g.coordinate_system})
        EXPECT_FALSE(f->empty());
      EXPECT_EQ(g.geometric_object, is_bar_family(c)       ? "bar"
                                    : is_scatter_family(c) ? "point"
                                    : c == ChartClass::pie ? "wedge"
                                                           : "tile");
    }
}

TEST(SpecJson, RoundTrip) {
  for (auto c : kAllChartClasses)
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto s = sample_spec(c, seed);
      const nlohmann::json j = s;
      EXPECT_EQ(nlohmann::json::parse(j.dump()).get<ChartSpec>(), s);
    }
}
