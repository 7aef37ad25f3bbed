#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "g2l/corpus.hpp"

using namespace g2l;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("g2l_corpus_" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_text_file(e.path());
  return out;
}

}  // namespace

TEST(Seeds, Fnv1aKnownVectors) {
  // Reference values of 64-bit FNV-1a.
  EXPECT_EQ(Fnv1a().value(), 0xcbf29ce484222325ull);
  EXPECT_EQ(Fnv1a().text("a").value(), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(Fnv1a().text("foobar").value(), 0x85944171f73967e8ull);
  EXPECT_NE(item_seed(1, ChartClass::bar, 0), item_seed(1, ChartClass::bar, 1));
  EXPECT_NE(item_seed(1, ChartClass::bar, 0), item_seed(1, ChartClass::pie, 0));
  EXPECT_NE(item_seed(1, ChartClass::bar, 0), item_seed(2, ChartClass::bar, 0));
}

TEST(SampleSpec, Deterministic) {
  for (auto c : kAllChartClasses) EXPECT_EQ(sample_spec(c, 99), sample_spec(c, 99));
}

TEST(SampleSpec, DifferentSeedsDiffer) {
  const auto a = sample_spec(ChartClass::bar, 1), b = sample_spec(ChartClass::bar, 2);
  EXPECT_TRUE(a.title != b.title || a.series != b.series);
}

TEST(SampleSpec, RangesAndValidity) {
  int vs_titles = 0, scatter_titles = 0;
  for (auto c : kAllChartClasses)
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      const auto s = sample_spec(c, seed);
      ASSERT_TRUE(validate(s).empty()) << describe(validate(s));
      EXPECT_EQ(s.chart_class, c);
      EXPECT_EQ(s.legend, is_multi_series(c));
      if (c == ChartClass::heatmap) {
        EXPECT_GE(s.grid.rows, 4);
        EXPECT_LE(s.grid.rows, 8);
        EXPECT_GE(s.grid.cols, 4);
        EXPECT_LE(s.grid.cols, 8);
        continue;
      }
      EXPECT_GE(s.categories.size(), 3u);
      EXPECT_LE(s.categories.size(), 8u);
      if (is_multi_series(c)) {
        EXPECT_GE(s.series.size(), 2u);
        EXPECT_LE(s.series.size(), 4u);
      } else {
        EXPECT_EQ(s.series.size(), 1u);
      }
      for (const auto& ser : s.series)
        for (double v : ser.values) {
          EXPECT_GE(v, 1.0);
          EXPECT_LE(v, 100.0);
        }
      if (c == ChartClass::pie) {
        EXPECT_FALSE(s.x_label);
        EXPECT_FALSE(s.y_label);
      }
      if (is_scatter_family(c)) {
        ++scatter_titles;
        vs_titles += s.title.find(" vs ") != std::string::npos;
      }
    }
  // About one scatter title in ten uses the "<word> vs <word>" form.
  EXPECT_GT(vs_titles, scatter_titles / 20);
  EXPECT_LT(vs_titles, scatter_titles / 5);
}

TEST(Render, DeterministicAndConsistent) {
  for (auto c : kAllChartClasses)
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const auto spec = sample_spec(c, seed);
      const auto a = render(spec), b = render(spec);
      EXPECT_EQ(a.image, b.image);
      EXPECT_EQ(a.truth, b.truth);
      EXPECT_EQ(a.image.width(), 640);
      EXPECT_EQ(a.image.height(), 480);
      EXPECT_EQ(a.image.channels(), 3);
    }
}

TEST(Render, TextItemsMatchDrawCallsAndMetricFormula) {
  for (auto c : kAllChartClasses)
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto spec = sample_spec(c, seed);
      const auto rr = render(spec);
      std::size_t expected = 1 + (spec.x_label ? 1 : 0) + (spec.y_label ? 1 : 0);
      if (is_bar_family(c)) expected += spec.categories.size();
      if (is_scatter_family(c)) expected += 6;
      if (c == ChartClass::pie) expected += spec.categories.size();
      if (spec.legend) expected += spec.series.size();
      if (spec.overlay_cell_values) expected += spec.grid.cells.size();
      EXPECT_EQ(rr.truth.text_items.size(), expected);
      for (const auto& t : rr.truth.text_items) {
        EXPECT_EQ(t.bbox, text_box(t.bbox.x, t.bbox.y, t.text, t.scale(), t.orientation));
        EXPECT_GE(t.bbox.x, 0);
        EXPECT_GE(t.bbox.y, 0);
        EXPECT_LE(t.bbox.right(), 640);
        EXPECT_LE(t.bbox.bottom(), 480);
        if (c == ChartClass::pie) {
          EXPECT_NE(t.role, TextRole::x_label);
          EXPECT_NE(t.role, TextRole::y_label);
          EXPECT_NE(t.role, TextRole::tick_label);
        } else {
          EXPECT_NE(t.role, TextRole::slice_label);
        }
        if (c != ChartClass::heatmap) {
          EXPECT_NE(t.role, TextRole::cell_value);
        }
      }
    }
}

TEST(Render, TitleInTopFifteenPercent) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = kAllChartClasses[seed % 7];
    const auto rr = render(sample_spec(c, seed * 7919));
    for (const auto& t : rr.truth.text_items)
      if (t.role == TextRole::title) {
        EXPECT_GE(t.bbox.y, 0);
        EXPECT_LE(t.bbox.bottom(), static_cast<int>(0.15 * 480));
        ++checked;
      }
  }
  EXPECT_EQ(checked, 100);
}

TEST(Render, TextItemsDoNotOverlap) {
  for (auto c : kAllChartClasses)
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const auto rr = render(sample_spec(c, seed));
      const auto& items = rr.truth.text_items;
      for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = i + 1; j < items.size(); ++j)
          EXPECT_TRUE(intersect(items[i].bbox, items[j].bbox).empty())
              << to_string(c) << " seed " << seed << ": '" << items[i].text << "' / '" << items[j].text << "'";
    }
}

TEST(Render, InvalidSpecIsValidationError) {
  ChartSpec s = sample_spec(ChartClass::pie, 3);
  s.series[0].values[0] = -2;
  try {
    render(s);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::validation);
  }
}

TEST(Render, SpecRecoverableFromTruth) {
  for (auto c : kAllChartClasses)
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto spec = sample_spec(c, seed);
      const auto rr = render(spec);
      const auto truth = nlohmann::json::parse(nlohmann::json(rr.truth).dump()).get<GroundTruth>();
      EXPECT_EQ(truth, rr.truth);
      const auto back = spec_from_truth(truth);
      EXPECT_TRUE(validate(back).empty());
      EXPECT_EQ(back, spec);
      EXPECT_EQ(render(back).image, rr.image);
    }
}

TEST(ParseCounts, Grammar) {
  const auto c = parse_counts("bar=3,pie=2,color_map=1");
  EXPECT_EQ(c.at(ChartClass::bar), 3);
  EXPECT_EQ(c.at(ChartClass::pie), 2);
  EXPECT_EQ(c.at(ChartClass::heatmap), 1);
  EXPECT_THROW(parse_counts("bar"), error);
  EXPECT_THROW(parse_counts("bar=-1"), error);
  EXPECT_THROW(parse_counts("line=3"), error);
  EXPECT_THROW(parse_counts("bar=3x"), error);
}

TEST(GenerateCorpus, HistogramMatchesConfig) {
  const auto dir = fresh_dir("hist");
  CorpusConfig cfg;
  cfg.counts = {{ChartClass::bar, 6}, {ChartClass::scatter, 5}, {ChartClass::pie, 3}, {ChartClass::heatmap, 2}};
  cfg.master_seed = 17;
  cfg.out_dir = dir;
  cfg.threads = 3;
  const auto m = generate_corpus(cfg);
  EXPECT_EQ(m.items.size(), 16u);
  std::map<ChartClass, int> hist;
  for (const auto& it : m.items) {
    ++hist[it.chart_class];
    EXPECT_TRUE(fs::exists(m.image_file(it)));
    EXPECT_TRUE(fs::exists(m.truth_file(it)));
  }
  for (const auto& [cls, n] : cfg.counts) EXPECT_EQ(hist[cls], n);

  const auto back = read_manifest(dir);
  EXPECT_EQ(back.items, m.items);
  EXPECT_EQ(back.counts, m.counts);
  EXPECT_EQ(back.master_seed, 17u);

  // Each item is the rendering of the seed derived for its (class, index).
  const auto& it = back.items[7];
  const auto truth = read_truth(back.truth_file(it));
  EXPECT_EQ(truth.seed, item_seed(17, ChartClass::scatter, 1));
  EXPECT_EQ(read_image(back.image_file(it)), render(spec_from_truth(truth)).image);
  fs::remove_all(dir);
}

TEST(GenerateCorpus, AllZeroCountsWriteNoItems) {
  const auto dir = fresh_dir("zero");
  CorpusConfig cfg;
  cfg.counts = {{ChartClass::bar, 0}, {ChartClass::pie, 0}};
  cfg.out_dir = dir;
  const auto m = generate_corpus(cfg);
  EXPECT_TRUE(m.items.empty());
  const auto files = tree_contents(dir);
  EXPECT_EQ(files.size(), 1u);
  EXPECT_TRUE(files.count("manifest.json"));
  EXPECT_TRUE(read_manifest(dir).items.empty());
  fs::remove_all(dir);
}

TEST(GenerateCorpus, ByteIdenticalAcrossRunsAndThreadCounts) {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  CorpusConfig cfg;
  cfg.counts = {{ChartClass::grouped_bar, 3}, {ChartClass::pie, 2}, {ChartClass::grouped_scatter, 2}};
  cfg.master_seed = 5;
  cfg.out_dir = a;
  cfg.threads = 1;
  generate_corpus(cfg);
  cfg.out_dir = b;
  cfg.threads = 4;
  generate_corpus(cfg);
  EXPECT_EQ(tree_contents(a), tree_contents(b));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(GenerateCorpus, UnwritableDirectoryReportsIo) {
  CorpusConfig cfg;
  cfg.counts = {{ChartClass::bar, 1}};
  cfg.out_dir = "/proc/g2l_cannot_write_here";
  try {
    generate_corpus(cfg);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::io);
  }
}
