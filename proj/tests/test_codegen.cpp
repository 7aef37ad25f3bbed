#include <gtest/gtest.h>

#include <set>

#include "g2l/codegen.hpp"
#include "g2l/corpus.hpp"
#include "g2l/raster/codec.hpp"
#include "support/golden_summaries.hpp"

using namespace g2l;
using codegen::instantiate;
using codegen::lint_artifact;
using codegen::template_for;

namespace {

semantics::SemanticSummary summary_for(ChartClass cls) {
  semantics::SemanticSummary s;
  s.chart_class = cls;
  return s;
}

std::size_t occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Templates, OnePerClassAndDistinct) {
  std::set<std::string> bodies;
  for (auto cls : kAllChartClasses) {
    const auto& t = template_for(cls);
    EXPECT_EQ(t.chart_class, cls);
    EXPECT_NO_THROW(codegen::check_template(t));
    bodies.insert(t.body);
  }
  EXPECT_EQ(bodies.size(), kAllChartClasses.size());
}

TEST(Templates, BarBindsXData) {
  EXPECT_NE(template_for(ChartClass::bar).body.find("x = x_data"), std::string::npos);
}

TEST(Templates, PieHasNoAxisLabelPlaceholders) {
  const auto& body = template_for(ChartClass::pie).body;
  EXPECT_EQ(body.find("{{x_label}}"), std::string::npos);
  EXPECT_EQ(body.find("{{y_label}}"), std::string::npos);
}

TEST(Templates, GrammarErrors) {
  auto bad = [](const std::string& body) {
    try {
      codegen::check_template({ChartClass::bar, body});
    } catch (const error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string ok = "x = x_data\n";
  EXPECT_EQ(bad(ok), "");
  EXPECT_NE(bad(ok + "{{colour}}\n").find("unknown placeholder 'colour'"), std::string::npos);
  EXPECT_NE(bad(ok + "[[legend]]\n").find("never closed"), std::string::npos);
  EXPECT_NE(bad(ok + "[[/legend]]\n").find("unmatched"), std::string::npos);
  EXPECT_NE(bad(ok + "[[legend]]\n[[labels]]\n").find("nested"), std::string::npos);
  EXPECT_NE(bad(ok + "[[axes]]\n[[/axes]]\n").find("unknown block"), std::string::npos);
  EXPECT_NE(bad("y = x_data\n").find("no data-binding"), std::string::npos);
}

TEST(Templates, MissingDirectoryIsIoError) {
  try {
    codegen::TemplateSet::load("/nonexistent/templates");
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::io);
  }
}

TEST(Instantiate, TitleWithoutLegend) {
  auto s = summary_for(ChartClass::bar);
  s.title = "Average Monthly Rainfall";
  const auto a = instantiate(template_for(ChartClass::bar), s);
  EXPECT_NE(a.code.find("ax.set_title(\"Average Monthly Rainfall\")"), std::string::npos);
  EXPECT_EQ(a.code.find("ax.legend"), std::string::npos);
  EXPECT_TRUE(lint_artifact(a).empty());
}

TEST(Instantiate, LegendBlockWithEntries) {
  auto s = summary_for(ChartClass::grouped_bar);
  s.legend = true;
  s.legend_entries = {"A", "B"};
  const auto a = instantiate(template_for(ChartClass::grouped_bar), s);
  EXPECT_NE(a.code.find("ax.legend("), std::string::npos);
  EXPECT_NE(a.code.find("series_names = [\"A\", \"B\"]"), std::string::npos);
  EXPECT_NE(a.code.find("n_series = 2"), std::string::npos);
  EXPECT_TRUE(lint_artifact(a).empty());
}

TEST(Instantiate, DefaultsEverywhereStayLintClean) {
  for (auto cls : kAllChartClasses) {
    const auto a = instantiate(template_for(cls), summary_for(cls));
    EXPECT_EQ(a.code.find("{{"), std::string::npos) << to_string(cls);
    EXPECT_EQ(a.code.find("[["), std::string::npos) << to_string(cls);
    EXPECT_TRUE(lint_artifact(a).empty()) << to_string(cls);
    EXPECT_NE(a.code.find("\"Title\""), std::string::npos);
    EXPECT_NE(a.code.find(codegen::kFigsizeComment), std::string::npos);
  }
}

TEST(Instantiate, NullLabelsBecomeCommentedGuidance) {
  auto s = summary_for(ChartClass::scatter);
  s.y_label = "Weight";
  const auto a = instantiate(template_for(ChartClass::scatter), s);
  EXPECT_NE(a.code.find("# ax.set_xlabel(\"x label\")"), std::string::npos);
  EXPECT_NE(a.code.find("No x-axis label was found"), std::string::npos);
  EXPECT_NE(a.code.find("\nax.set_ylabel(\"Weight\")"), std::string::npos);
}

TEST(Instantiate, CategoriesFollowTicksOrCount) {
  auto s = summary_for(ChartClass::bar);
  s.x_tick_labels = {"Jan", "Feb", "Mar"};
  s.n_categories = 3;
  EXPECT_NE(instantiate(template_for(ChartClass::bar), s).code.find("categories = [\"Jan\", \"Feb\", \"Mar\"]"),
            std::string::npos);
  s.x_tick_labels.clear();
  s.n_categories = 4;
  EXPECT_NE(instantiate(template_for(ChartClass::bar), s)
                .code.find("categories = [\"Category 1\", \"Category 2\", \"Category 3\", \"Category 4\"]"),
            std::string::npos);
  auto p = summary_for(ChartClass::pie);
  p.slice_labels = {"Kiwi", "Lime"};
  p.n_categories = 2;
  EXPECT_NE(instantiate(template_for(ChartClass::pie), p).code.find("labels_data = [\"Kiwi\", \"Lime\"]"),
            std::string::npos);
}

TEST(Instantiate, ClassMismatchRejected) {
  try {
    instantiate(template_for(ChartClass::bar), summary_for(ChartClass::pie));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_argument);
  }
}

TEST(Escaping, QuotesBackslashesAndMarkers) {
  auto s = summary_for(ChartClass::bar);
  s.title = "He said \"hi\" \\ {{title}} [[legend]]";
  s.x_label = "it's";
  const auto a = instantiate(template_for(ChartClass::bar), s);
  EXPECT_NE(a.code.find(R"(ax.set_title("He said \"hi\" \\ {" "{title}" "} [" "[legend]" "]"))"), std::string::npos);
  EXPECT_NE(a.code.find(R"(ax.set_xlabel("it's"))"), std::string::npos);
  EXPECT_TRUE(lint_artifact(a).empty()) << lint_artifact(a).front();
}

TEST(Lint, FlagsBrokenArtifacts) {
  auto a = instantiate(template_for(ChartClass::bar), summary_for(ChartClass::bar));
  auto with = [&](const std::string& code) {
    auto b = a;
    b.code = code;
    return lint_artifact(b);
  };
  auto has = [](const std::vector<std::string>& v, const std::string& what) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(what) != std::string::npos; });
  };
  EXPECT_TRUE(has(with(a.code + "{{title}}\n"), "unresolved placeholder"));
  EXPECT_TRUE(has(with(a.code + "[[legend]]\n"), "unresolved block"));
  EXPECT_TRUE(has(with(a.code + "print((1)\n"), "unclosed"));
  EXPECT_TRUE(has(with(a.code + "print(1))\n"), "unbalanced"));
  EXPECT_TRUE(has(with(a.code + "s = \"open\n"), "unterminated"));
  EXPECT_FALSE(has(with(a.code + "# (unbalanced in a comment\n"), "unclosed"));
  std::string no_binding = a.code;
  no_binding.replace(no_binding.find("x = x_data"), 10, "x = list(x_data)");
  no_binding.replace(no_binding.find("y = y_data"), 10, "y = list(y_data)");
  EXPECT_TRUE(has(with(no_binding), "missing data-binding"));
  std::string no_title = a.code;
  no_title.replace(no_title.find("\"Title\""), 7, "'Title'");
  EXPECT_TRUE(has(with(no_title), "title not emitted"));
}

TEST(Substitution, EachStringAppearsWhereItsPlaceholderStood) {
  for (auto cls : kAllChartClasses) {
    auto s = summary_for(cls);
    s.title = "Unique Title Text";
    if (has_axes(cls)) {
      s.x_label = "Unique X";
      s.y_label = "Unique Y";
    }
    const auto& body = template_for(cls).body;
    const auto code = instantiate(template_for(cls), s).code;
    EXPECT_EQ(occurrences(code, "\"Unique Title Text\""), occurrences(body, "{{title}}"));
    EXPECT_EQ(occurrences(code, "\"Unique X\""), occurrences(body, "{{x_label}}"));
    EXPECT_EQ(occurrences(code, "\"Unique Y\""), occurrences(body, "{{y_label}}"));
    for (bool legend : {false, true}) {
      s.legend = legend;
      s.legend_entries = legend ? std::vector<std::string>{"P", "Q"} : std::vector<std::string>{};
      const auto c = instantiate(template_for(cls), s).code;
      EXPECT_EQ(c.find(".legend(") != std::string::npos, legend) << to_string(cls);
    }
  }
}

// Every rendered corpus item's sidecar, as a summary, yields a clean artifact.
TEST(Sweep, CorpusSummariesLintClean) {
  int n = 0;
  for (auto cls : kAllChartClasses)
    for (std::uint64_t i = 0; i < 150; ++i) {
      const auto spec = sample_spec(cls, item_seed(5, cls, i));
      semantics::SemanticSummary s;
      s.chart_class = cls;
      s.title = spec.title;
      s.x_label = spec.x_label;
      s.y_label = spec.y_label;
      s.legend = spec.legend;
      for (const auto& ser : spec.series)
        if (spec.legend) s.legend_entries.push_back(ser.name);
      for (const auto& c : spec.categories) (cls == ChartClass::pie ? s.slice_labels : s.x_tick_labels).push_back(category_text(c));
      s.n_categories = std::max<int>(1, static_cast<int>(spec.categories.size()));
      const auto a = instantiate(template_for(cls), s);
      const auto v = lint_artifact(a);
      EXPECT_TRUE(v.empty()) << to_string(cls) << " " << i << ": " << (v.empty() ? "" : v.front());
      ++n;
    }
  EXPECT_EQ(n, 1050);
}

TEST(Golden, FixedSummariesMatchFiles) {
  for (const auto& [name, s] : g2l::testing::golden_summaries()) {
    const auto code = instantiate(template_for(s.chart_class), s).code;
    const auto bytes = read_file_bytes(std::string(G2L_GOLDEN_DIR) + "/" + name + ".py");
    EXPECT_EQ(code, std::string(bytes.begin(), bytes.end())) << name;
  }
}
