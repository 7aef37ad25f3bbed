#include <gtest/gtest.h>

#include <algorithm>

#include "g2l/corpus.hpp"
#include "g2l/random.hpp"
#include "g2l/semantics.hpp"
#include "support/title_oracle.hpp"

using namespace g2l;
using g2l::testing::make_phrase;
using g2l::testing::make_result;

TEST(Title, TopCenterPhrase) {
  const auto r = make_result({make_phrase("Average Monthly Rainfall", 200, 12), make_phrase("Jan", 100, 428, 1)});
  EXPECT_EQ(semantics::find_title(r), "Average Monthly Rainfall");
}

TEST(Title, VersusRuleWhenNothingAtTop) {
  const auto r = make_result({make_phrase("Height vs Weight", 200, 200)});
  EXPECT_EQ(semantics::find_title(r), "Height vs Weight");
  const auto r2 = make_result({make_phrase("Height VS. Weight", 30, 300, 1)});
  EXPECT_EQ(semantics::find_title(r2), "Height VS. Weight");
}

TEST(Title, DefaultsWhenInconclusive) {
  EXPECT_EQ(semantics::find_title(make_result({})), "Title");
  EXPECT_EQ(semantics::find_title(make_result({make_phrase("Lonely", 280, 12)})), "Title");
  EXPECT_EQ(semantics::find_title(make_result({make_phrase("Two Words", 10, 12)})), "Title");
  EXPECT_EQ(semantics::find_title(make_result({make_phrase("vs Weight", 200, 200)})), "Title");
}

TEST(Title, EarliestTopCenterPhraseWins) {
  const auto r = make_result({make_phrase("Second Line", 250, 40), make_phrase("First Line", 250, 12)});
  EXPECT_EQ(semantics::find_title(r), "First Line");
}

TEST(Title, MatchesOracleOnExhaustiveEnumeration) {
  const auto cases = g2l::testing::enumerate_title_cases();
  // 1 empty + 7*9 + C(7,2)*9^2 + C(7,3)*9^3
  ASSERT_EQ(cases.size(), 27280u);
  std::size_t mismatches = 0, defaults = 0, versus = 0;
  for (const auto& c : cases) {
    const auto got = semantics::find_title(c);
    mismatches += got != g2l::testing::title_oracle(c);
    defaults += got == "Title";
    versus += got.find(" vs ") != std::string::npos || got.find(" V ") != std::string::npos ||
              got.find(" VS. ") != std::string::npos;
    auto rev = c;
    std::reverse(rev.phrases.begin(), rev.phrases.end());
    std::reverse(rev.words.begin(), rev.words.end());
    ASSERT_EQ(semantics::find_title(rev), got);
  }
  EXPECT_EQ(mismatches, 0u);
  // All three outcomes are exercised.
  EXPECT_GT(defaults, 0u);
  EXPECT_GT(versus, 0u);
  EXPECT_GT(cases.size() - defaults - versus, 0u);
}

TEST(AxisLabels, FarLeftVerticalIsYLabel) {
  const auto r = make_result({make_phrase("Frequency", 10, 150, 2, TextOrientation::vertical),
                              make_phrase("Month", 290, 448)});
  const auto l = semantics::find_axis_labels(r, ChartClass::bar);
  EXPECT_EQ(l.y_label, "Frequency");
  EXPECT_EQ(l.x_label, "Month");
}

TEST(AxisLabels, PieGetsSliceLabelsInstead) {
  const auto r = make_result({make_phrase("Frequency", 10, 150, 2, TextOrientation::vertical)});
  const auto l = semantics::find_axis_labels(r, ChartClass::pie);
  EXPECT_FALSE(l.x_label);
  EXPECT_FALSE(l.y_label);
  const auto s = semantics::analyze(ChartClass::pie, r);
  EXPECT_EQ(s.slice_labels, std::vector<std::string>{"Frequency"});
  EXPECT_FALSE(s.y_label);
}

TEST(AxisLabels, NothingQualifies) {
  const auto r = make_result({make_phrase("Middle Text", 250, 200)});
  const auto l = semantics::find_axis_labels(r, ChartClass::scatter);
  EXPECT_FALSE(l.x_label);
  EXPECT_FALSE(l.y_label);
}

TEST(AxisLabels, XLabelNearestCenter) {
  const auto r = make_result({make_phrase("Edge", 20, 450), make_phrase("Center", 300, 450)});
  EXPECT_EQ(semantics::find_axis_labels(r, ChartClass::bar).x_label, "Center");
}

TEST(Legend, StackedShortPhrasesOnTheRight) {
  const auto r = make_result({make_phrase("North", 480, 66, 1), make_phrase("South", 480, 78, 1),
                              make_phrase("East West", 480, 90, 1)});
  const auto l = semantics::detect_legend(r, ChartClass::grouped_bar);
  EXPECT_TRUE(l.legend);
  EXPECT_EQ(l.entries, (std::vector<std::string>{"North", "South", "East West"}));
}

TEST(Legend, RejectsLoneLeftOrWidelySpacedPhrases) {
  EXPECT_FALSE(semantics::detect_legend(make_result({}), ChartClass::bar).legend);
  EXPECT_FALSE(semantics::detect_legend(make_result({make_phrase("North", 480, 66, 1)}), ChartClass::bar).legend);
  EXPECT_FALSE(semantics::detect_legend(
                   make_result({make_phrase("North", 100, 66, 1), make_phrase("South", 100, 78, 1)}), ChartClass::bar)
                   .legend);
  EXPECT_FALSE(semantics::detect_legend(
                   make_result({make_phrase("North", 480, 66, 1), make_phrase("South", 480, 110, 1)}), ChartClass::bar)
                   .legend);
  EXPECT_FALSE(semantics::detect_legend(make_result({make_phrase("One two three four", 480, 66, 1),
                                                     make_phrase("Five six seven eight", 480, 78, 1)}),
                                        ChartClass::bar)
                   .legend);
}

TEST(Ticks, BandAndOrder) {
  const auto r = make_result({make_phrase("Feb", 300, 428, 1), make_phrase("Jan", 100, 428, 1),
                              make_phrase("Two words", 400, 428, 1), make_phrase("Low", 200, 460, 1)});
  const auto t = semantics::count_ticks(r);
  EXPECT_EQ(t.x_tick_labels, (std::vector<std::string>{"Jan", "Feb"}));
  EXPECT_EQ(t.n_categories, 2);
  EXPECT_EQ(semantics::count_ticks(make_result({})).n_categories, 5);
}

TEST(Analyze, EmptyInputGivesDefaults) {
  const auto s = semantics::analyze(ChartClass::bar, make_result({}));
  EXPECT_EQ(s.title, "Title");
  EXPECT_FALSE(s.x_label);
  EXPECT_FALSE(s.y_label);
  EXPECT_FALSE(s.legend);
  EXPECT_EQ(s.n_categories, 5);
  EXPECT_EQ(s.chart_class, ChartClass::bar);
}

TEST(Analyze, TotalOnRandomLayouts) {
  Rng rng(4242);
  const std::vector<std::string> pool = {"a", "Word", "vs", "Two Words", "x V y", "Three Word Phrase", "42"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<ocr::Phrase> ps;
    const int n = static_cast<int>(rng.below(6));
    for (int i = 0; i < n; ++i)
      ps.push_back(make_phrase(rng.pick(pool), static_cast<int>(rng.below(600)), static_cast<int>(rng.below(470)),
                               static_cast<int>(rng.between(1, 3)),
                               rng.chance(0.3) ? TextOrientation::vertical : TextOrientation::horizontal));
    const auto r = make_result(ps);
    for (auto cls : kAllChartClasses) {
      const auto s = semantics::analyze(cls, r);
      EXPECT_FALSE(s.title.empty());
      EXPECT_GE(s.n_categories, 1);
      if (cls == ChartClass::pie) {
        EXPECT_FALSE(s.x_label);
        EXPECT_FALSE(s.y_label);
        EXPECT_EQ(s.n_categories, s.slice_labels.empty() ? 5 : static_cast<int>(s.slice_labels.size()));
      } else {
        EXPECT_EQ(s.n_categories, s.x_tick_labels.empty() ? 5 : static_cast<int>(s.x_tick_labels.size()));
      }
      EXPECT_EQ(s.legend, !s.legend_entries.empty());
    }
  }
}

// Rendered charts checked against their ground-truth sidecars.
TEST(Corpus, SummaryMatchesSidecar) {
  int checked = 0;
  bool saw_six = false, saw_four_slices = false;
  for (auto cls : kAllChartClasses)
    for (std::uint64_t i = 0; i < 12; ++i) {
      const auto rr = render(sample_spec(cls, item_seed(99, cls, i)));
      const auto& g = rr.truth;
      const auto s = semantics::analyze(cls, ocr::ocr_image(rr.image));
      EXPECT_EQ(s.title, g.title.value_or("Title")) << to_string(cls) << " " << i;
      EXPECT_EQ(s.y_label, g.y_label) << to_string(cls) << " " << i;
      EXPECT_EQ(s.x_label, g.x_label) << to_string(cls) << " " << i;
      EXPECT_EQ(s.legend, g.legend) << to_string(cls) << " " << i;
      EXPECT_EQ(s.legend_entries, g.legend_entries) << to_string(cls) << " " << i;
      const int n = static_cast<int>(g.categories.size());
      if (cls == ChartClass::bar || cls == ChartClass::stacked_bar || cls == ChartClass::grouped_bar) {
        EXPECT_EQ(s.n_categories, n);
        std::vector<std::string> want;
        for (const auto& c : g.categories) want.push_back(category_text(c));
        EXPECT_EQ(s.x_tick_labels, want);
        saw_six |= n == 6;
      }
      if (cls == ChartClass::pie) {
        EXPECT_EQ(s.n_categories, n);
        saw_four_slices |= n == 4;
      }
      ++checked;
    }
  EXPECT_EQ(checked, 84);
  EXPECT_TRUE(saw_six);
  EXPECT_TRUE(saw_four_slices);
}
