#pragma once

#include <array>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "g2l/chart_model.hpp"
#include "g2l/error.hpp"
#include "g2l/raster/codec.hpp"
#include "g2l/semantics.hpp"

#ifndef G2L_TEMPLATE_DIR
#define G2L_TEMPLATE_DIR "templates/matplotlib"
#endif

namespace g2l::codegen {

inline constexpr std::array<const char*, 7> kPlaceholders = {"title",  "x_label",      "y_label",        "categories",
                                                             "n_series", "series_names", "figsize_comment"};
inline constexpr std::array<const char*, 2> kBlocks = {"legend", "labels"};

struct CodeTemplate {
  ChartClass chart_class = ChartClass::bar;
  std::string body;
};

struct CodeArtifact {
  std::string code;
  ChartClass chart_class = ChartClass::bar;
  semantics::SemanticSummary summary;
  std::vector<std::string> warnings;
};

namespace detail {

inline const std::regex& placeholder_re() {
  static const std::regex re(R"(\{\{\s*(\w+)\s*\}\})");
  return re;
}
inline const std::regex& block_re() {
  static const std::regex re(R"(^\s*\[\[(/?)(\w+)\]\]\s*$)");
  return re;
}
inline const std::regex& binding_re() {
  static const std::regex re(R"(^\s*(\w+) = \1_data\s*(#.*)?$)");
  return re;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

inline bool known(const std::string& name, const auto& set) {
  return std::any_of(set.begin(), set.end(), [&](const char* s) { return name == s; });
}

}  // namespace detail

/// Python double-quoted string literal. Doubled brackets are split into
/// adjacent literals ("{" "{") so user text never looks like a template marker.
inline std::string py_quote(const std::string& s) {
  std::string out = "\"";
  char prev = 0;
  for (char c : s) {
    if (c == prev && (c == '{' || c == '}' || c == '[' || c == ']')) out += "\" \"";
    if (c == '\\' || c == '"') out += '\\';
    out += c;
    prev = c;
  }
  return out + "\"";
}

inline std::string py_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + py_quote(items[i]);
  return out + "]";
}

/// Checks the template grammar: known placeholders and blocks, paired
/// unnested block markers, and at least one data-binding line.
inline void check_template(const CodeTemplate& t) {
  const std::string where = std::string("template '") + std::string(to_string(t.chart_class)) + "': ";
  std::optional<std::string> open;
  bool binding = false;
  int n = 0;
  for (const auto& line : detail::lines_of(t.body)) {
    ++n;
    std::smatch m;
    if (std::regex_match(line, m, detail::block_re())) {
      const std::string name = m[2];
      if (!detail::known(name, kBlocks)) fail(errc::validation, where + "unknown block '" + name + "' on line " + std::to_string(n));
      if (m[1].length() == 0) {
        if (open) fail(errc::validation, where + "nested block '" + name + "' on line " + std::to_string(n));
        open = name;
      } else {
        if (open != name) fail(errc::validation, where + "unmatched block end '" + name + "' on line " + std::to_string(n));
        open.reset();
      }
      continue;
    }
    for (std::sregex_iterator it(line.begin(), line.end(), detail::placeholder_re()), end; it != end; ++it)
      if (!detail::known((*it)[1].str(), kPlaceholders))
        fail(errc::validation, where + "unknown placeholder '" + (*it)[1].str() + "' on line " + std::to_string(n));
    binding |= std::regex_search(line, detail::binding_re());
  }
  if (open) fail(errc::validation, where + "block '" + *open + "' is never closed");
  if (!binding) fail(errc::validation, where + "no data-binding line (name = name_data)");
}

/// Immutable set of one template per chart class, read from `<dir>/<class>.tpl`.
class TemplateSet {
 public:
  static TemplateSet load(const std::filesystem::path& dir) {
    TemplateSet s;
    s.dir_ = dir;
    for (auto cls : kAllChartClasses) {
      const auto path = dir / (std::string(to_string(cls)) + ".tpl");
      std::vector<std::uint8_t> bytes;
      try {
        bytes = read_file_bytes(path);
      } catch (const error& e) {
        fail(errc::io, std::string("cannot load template: ") + e.what());
      }
      CodeTemplate t{cls, std::string(bytes.begin(), bytes.end())};
      check_template(t);
      s.templates_.emplace(cls, std::move(t));
    }
    return s;
  }

  /// G2L_TEMPLATE_DIR from the environment, else the build-time location.
  static std::filesystem::path default_dir() {
    if (const char* env = std::getenv("G2L_TEMPLATE_DIR"); env && *env) return env;
    return G2L_TEMPLATE_DIR;
  }

  static const TemplateSet& builtin() {
    static const TemplateSet s = load(default_dir());
    return s;
  }

  const CodeTemplate& get(ChartClass cls) const {
    const auto it = templates_.find(cls);
    if (it == templates_.end()) fail(errc::internal, "no template for class " + std::to_string(static_cast<int>(cls)));
    return it->second;
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<ChartClass, CodeTemplate> templates_;
};

inline const CodeTemplate& template_for(ChartClass cls) { return TemplateSet::builtin().get(cls); }

// ---------------------------------------------------------------------------
// Instantiation

/// Values the placeholders take for a summary.
struct Bindings {
  std::string title;
  std::optional<std::string> x_label, y_label;
  std::vector<std::string> categories;
  std::vector<std::string> series_names;
};

inline Bindings bindings_for(const semantics::SemanticSummary& s) {
  Bindings b;
  b.title = s.title;
  b.x_label = s.x_label;
  b.y_label = s.y_label;
  const auto& read = s.chart_class == ChartClass::pie ? s.slice_labels : s.x_tick_labels;
  if (static_cast<int>(read.size()) == s.n_categories) {
    b.categories = read;
  } else {
    for (int i = 1; i <= std::max(1, s.n_categories); ++i) b.categories.push_back("Category " + std::to_string(i));
  }
  if (s.legend && !s.legend_entries.empty()) {
    b.series_names = s.legend_entries;
  } else {
    const int n = is_multi_series(s.chart_class) ? 2 : 1;
    for (int i = 1; i <= n; ++i) b.series_names.push_back("Series " + std::to_string(i));
  }
  return b;
}

inline constexpr const char* kFigsizeComment =
    "# Figure size is (width, height) in inches; change it to resize the chart.";

namespace detail {

inline std::string null_guidance(const std::string& name) {
  const std::string axis = name == "x_label" ? "x-axis" : "y-axis";
  return "# No " + axis + " label was found in the image; uncomment the line below to add one.";
}

}  // namespace detail

/// Fills a template from a summary. Null labels leave their line commented
/// out under a how-to note; [[legend]] is kept iff a legend was detected and
/// [[labels]] iff the class has axes.
inline CodeArtifact instantiate(const CodeTemplate& t, const semantics::SemanticSummary& s) {
  if (t.chart_class != s.chart_class)
    fail(errc::invalid_argument, std::string("template class '") + std::string(to_string(t.chart_class)) +
                                     "' does not match summary class '" + std::string(to_string(s.chart_class)) + "'");
  const Bindings b = bindings_for(s);
  auto value = [&](const std::string& name) -> std::optional<std::string> {
    if (name == "title") return py_quote(b.title);
    if (name == "x_label") return b.x_label ? std::optional(py_quote(*b.x_label)) : std::nullopt;
    if (name == "y_label") return b.y_label ? std::optional(py_quote(*b.y_label)) : std::nullopt;
    if (name == "categories") return py_list(b.categories);
    if (name == "n_series") return std::to_string(b.series_names.size());
    if (name == "series_names") return py_list(b.series_names);
    if (name == "figsize_comment") return std::string(kFigsizeComment);
    fail(errc::internal, "unknown placeholder '" + name + "'");
  };
  auto keep_block = [&](const std::string& name) { return name == "legend" ? s.legend : has_axes(s.chart_class); };

  std::string out;
  bool skipping = false;
  for (const auto& line : detail::lines_of(t.body)) {
    std::smatch m;
    if (std::regex_match(line, m, detail::block_re())) {
      skipping = m[1].length() == 0 && !keep_block(m[2]);
      continue;
    }
    if (skipping) continue;
    std::string filled;
    std::optional<std::string> missing;
    std::size_t last = 0;
    for (std::sregex_iterator it(line.begin(), line.end(), detail::placeholder_re()), end; it != end; ++it) {
      const std::string name = (*it)[1];
      filled += line.substr(last, static_cast<std::size_t>(it->position()) - last);
      if (auto v = value(name)) {
        filled += *v;
      } else {
        missing = name;
        filled += py_quote(name == "x_label" ? "x label" : "y label");
      }
      last = static_cast<std::size_t>(it->position() + it->length());
    }
    filled += line.substr(last);
    if (missing) {
      const auto indent = filled.substr(0, filled.find_first_not_of(' '));
      out += indent + detail::null_guidance(*missing) + "\n";
      filled = indent + "# " + filled.substr(indent.size());
    }
    out += filled + "\n";
  }
  return {out, s.chart_class, s, {}};
}

inline CodeArtifact instantiate(const semantics::SemanticSummary& s) { return instantiate(template_for(s.chart_class), s); }

// ---------------------------------------------------------------------------
// Lint

/// Empty when the artifact looks executable: no leftover markers, balanced
/// brackets and quotes (outside comments), a data-binding line, and every
/// summary string present as an escaped literal.
inline std::vector<std::string> lint_artifact(const CodeArtifact& a) {
  std::vector<std::string> v;
  static const std::regex block_any(R"(\[\[/?\w+\]\])");
  if (std::regex_search(a.code, detail::placeholder_re())) v.push_back("unresolved placeholder");
  if (std::regex_search(a.code, block_any)) v.push_back("unresolved block marker");

  std::vector<char> stack;
  bool binding = false;
  int n = 0;
  for (const auto& line : detail::lines_of(a.code)) {
    ++n;
    binding |= std::regex_search(line, detail::binding_re());
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quote) {
        if (c == '\\') ++i;
        else if (c == quote) quote = 0;
        continue;
      }
      if (c == '#') break;
      if (c == '"' || c == '\'') quote = c;
      else if (c == '(' || c == '[' || c == '{') stack.push_back(c);
      else if (c == ')' || c == ']' || c == '}') {
        const char want = c == ')' ? '(' : c == ']' ? '[' : '{';
        if (stack.empty() || stack.back() != want) {
          v.push_back("unbalanced '" + std::string(1, c) + "' on line " + std::to_string(n));
          stack.clear();
        } else {
          stack.pop_back();
        }
      }
    }
    if (quote) v.push_back("unterminated string on line " + std::to_string(n));
  }
  if (!stack.empty()) v.push_back("unclosed '" + std::string(1, stack.back()) + "'");
  if (!binding) v.push_back("missing data-binding line");

  auto expect_literal = [&](const std::string& s, const std::string& what) {
    if (a.code.find(py_quote(s)) == std::string::npos) v.push_back(what + " not emitted as an escaped string literal");
  };
  expect_literal(a.summary.title, "title");
  if (has_axes(a.chart_class)) {
    if (a.summary.x_label) expect_literal(*a.summary.x_label, "x label");
    if (a.summary.y_label) expect_literal(*a.summary.y_label, "y label");
  }
  if (a.summary.legend)
    for (const auto& e : a.summary.legend_entries) expect_literal(e, "legend entry");
  return v;
}

inline nlohmann::json to_json(const CodeArtifact& a) {
  return {{"class", to_string(a.chart_class)}, {"code", a.code}, {"warnings", a.warnings}};
}

}  // namespace g2l::codegen
