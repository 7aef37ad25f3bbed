#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "g2l/chart_model.hpp"
#include "g2l/cnn/model_io.hpp"
#include "g2l/cnn/train.hpp"
#include "g2l/codegen.hpp"
#include "g2l/corpus.hpp"
#include "g2l/error.hpp"
#include "g2l/ocr.hpp"
#include "g2l/raster/codec.hpp"
#include "g2l/semantics.hpp"

namespace g2l::app {

inline constexpr double kLowConfidence = 0.5;

/// Runs one stage; any failure leaves tagged with the stage name.
template <class F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const error& e) {
    throw e.stage().empty() ? e.with_stage(stage) : e;
  } catch (const std::exception& e) {
    throw error(errc::internal, e.what(), stage);
  }
}

struct OcrDigest {
  std::size_t words = 0;
  double mean_confidence = 0;
  std::vector<ocr::Phrase> phrases;
};

struct InferenceReport {
  ChartClass chart_class = ChartClass::bar;
  double confidence = 0;
  std::vector<float> probabilities;
  OcrDigest ocr;
  semantics::SemanticSummary summary;
  codegen::CodeArtifact artifact;
  std::vector<std::pair<std::string, double>> timings_ms;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(InferenceReport& r) : r_(r), t_(std::chrono::steady_clock::now()) {}
  void lap(const char* stage) {
    const auto now = std::chrono::steady_clock::now();
    r_.timings_ms.emplace_back(stage, std::chrono::duration<double, std::milli>(now - t_).count());
    t_ = now;
  }

 private:
  InferenceReport& r_;
  std::chrono::steady_clock::time_point t_;
};

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

/// classify -> ocr -> semantics -> codegen -> lint on a decoded image.
inline InferenceReport infer_image(const RasterImage& img, const cnn::Model& model,
                                   const codegen::TemplateSet& templates = codegen::TemplateSet::builtin()) {
  InferenceReport r;
  detail::StageClock clock(r);
  const auto pred = run_stage("classify", [&] { return cnn::predict(model, img); });
  r.chart_class = pred.chart_class;
  r.confidence = pred.confidence;
  r.probabilities = pred.probabilities;
  clock.lap("classify");

  const auto text = run_stage("ocr", [&] { return ocr::ocr_image(img); });
  r.ocr.words = text.words.size();
  for (const auto& w : text.words) r.ocr.mean_confidence += w.confidence;
  if (!text.words.empty()) r.ocr.mean_confidence /= static_cast<double>(text.words.size());
  r.ocr.phrases = text.phrases;
  clock.lap("ocr");

  r.summary = run_stage("semantics", [&] { return semantics::analyze(r.chart_class, text); });
  clock.lap("semantics");

  r.artifact = run_stage("codegen", [&] { return codegen::instantiate(templates.get(r.chart_class), r.summary); });
  clock.lap("codegen");

  run_stage("lint", [&] {
    const auto v = codegen::lint_artifact(r.artifact);
    if (!v.empty()) fail(errc::internal, "emitted code failed lint: " + v.front());
    return 0;
  });
  clock.lap("lint");

  if (r.confidence < kLowConfidence)
    r.artifact.warnings.push_back("low classifier confidence " + detail::fixed2(r.confidence) +
                                  "; the chart type may be wrong");
  if (text.words.empty()) r.artifact.warnings.push_back("no text found in the image; text fields use defaults");
  return r;
}

inline InferenceReport infer_bytes(std::span<const std::uint8_t> bytes, const cnn::Model& model,
                                   const codegen::TemplateSet& templates = codegen::TemplateSet::builtin()) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto img = run_stage("decode", [&] { return decode_image(bytes); });
  const double decode_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  auto r = infer_image(img, model, templates);
  r.timings_ms.insert(r.timings_ms.begin(), {"decode", decode_ms});
  return r;
}

inline cnn::Model load_model_stage(const std::filesystem::path& path) {
  return run_stage("load_model", [&] { return cnn::load_model(path); });
}

inline InferenceReport infer(const std::filesystem::path& image, const std::filesystem::path& model_path) {
  const auto model = load_model_stage(model_path);
  const auto bytes = run_stage("read", [&] { return read_file_bytes(image); });
  return infer_bytes(bytes, model);
}

inline nlohmann::json phrase_json(const ocr::Phrase& p) {
  return {{"text", p.text()}, {"bbox", ocr::box_json(p.bbox)}, {"orientation", to_string(p.orientation)}};
}

/// Timings are the only non-deterministic field; leave them out to compare runs.
inline nlohmann::json report_json(const InferenceReport& r, bool with_timings = true) {
  nlohmann::json phrases = nlohmann::json::array();
  for (const auto& p : r.ocr.phrases) phrases.push_back(phrase_json(p));
  nlohmann::json j{{"class", to_string(r.chart_class)},
                   {"confidence", r.confidence},
                   {"probabilities", r.probabilities},
                   {"ocr", {{"words", r.ocr.words}, {"mean_confidence", r.ocr.mean_confidence}, {"phrases", phrases}}},
                   {"summary", semantics::to_json(r.summary)},
                   {"artifact", codegen::to_json(r.artifact)}};
  if (with_timings) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [k, v] : r.timings_ms) t[k] = v;
    j["timings_ms"] = t;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<std::vector<int>> confusion;  // [truth][predicted]
  std::vector<double> per_class_accuracy;   // 0 for classes without items
  double accuracy = 0;
  std::size_t n = 0;
  std::vector<std::string> skipped;
};

inline EvalReport evaluate(const CorpusManifest& manifest, const cnn::Model& model) {
  EvalReport e;
  e.classes = model.classes;
  const auto ds = cnn::load_dataset(manifest, e.classes);
  const std::size_t k = e.classes.size();
  e.confusion.assign(k, std::vector<int>(k, 0));
  e.skipped = ds.skipped;
  cnn::Tensor<float> t({cnn::kInputSide, cnn::kInputSide, 1});
  for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
    t.data = ds.inputs[i];
    cnn::standardize(t, model);
    const auto p = model.forward(t);
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    ++e.confusion[static_cast<std::size_t>(ds.labels[i])][best];
  }
  e.n = ds.inputs.size();
  int trace = 0;
  for (std::size_t c = 0; c < k; ++c) {
    int row = 0;
    for (int v : e.confusion[c]) row += v;
    trace += e.confusion[c][c];
    e.per_class_accuracy.push_back(row ? static_cast<double>(e.confusion[c][c]) / row : 0.0);
  }
  e.accuracy = e.n ? static_cast<double>(trace) / static_cast<double>(e.n) : 0.0;
  return e;
}

inline nlohmann::json eval_json(const EvalReport& e) {
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t c = 0; c < e.classes.size(); ++c) per[e.classes[c]] = e.per_class_accuracy[c];
  return {{"classes", e.classes}, {"confusion", e.confusion}, {"per_class_accuracy", per},
          {"accuracy", e.accuracy}, {"n", e.n},                {"skipped", e.skipped}};
}

/// Plain-text confusion matrix, rows = truth, columns = prediction.
inline std::string confusion_table(const EvalReport& e) {
  std::string out = "truth \\ predicted";
  char buf[64];
  for (const auto& c : e.classes) {
    std::snprintf(buf, sizeof buf, " %8.8s", c.c_str());
    out += buf;
  }
  out += "\n";
  for (std::size_t r = 0; r < e.classes.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%-17s", e.classes[r].c_str());
    out += buf;
    for (int v : e.confusion[r]) {
      std::snprintf(buf, sizeof buf, " %8d", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Round trip

struct RoundTripFailure {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  ChartClass chart_class = ChartClass::bar;
  std::vector<std::string> diffs;
};

struct RoundTripReport {
  std::size_t n = 0;
  std::size_t class_ok = 0, title_ok = 0, y_label_ok = 0, legend_ok = 0, lint_ok = 0;
  double class_recovery_rate = 0, title_exact_rate = 0, y_label_exact_rate = 0, legend_agreement_rate = 0,
         lint_pass_rate = 0;
  std::vector<RoundTripFailure> failures;
};

namespace detail {

inline std::string show(const std::optional<std::string>& s) { return s ? "\"" + *s + "\"" : "null"; }

inline std::string show(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out + "]";
}

}  // namespace detail

/// Classes round-robin, specs from item_seed(master_seed, class, i); each is
/// rendered, inferred and compared with its ground truth.
inline RoundTripReport roundtrip(std::size_t n, std::uint64_t master_seed, const cnn::Model& model,
                                 const codegen::TemplateSet& templates = codegen::TemplateSet::builtin()) {
  if (n < 1) fail(errc::invalid_argument, "round trip needs n >= 1");
  RoundTripReport rep;
  rep.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    const ChartClass cls = kAllChartClasses[i % kAllChartClasses.size()];
    const std::uint64_t seed = item_seed(master_seed, cls, i);
    const auto rendered = render(sample_spec(cls, seed));
    const auto& g = rendered.truth;
    RoundTripFailure f{i, seed, cls, {}};
    try {
      const auto r = infer_image(rendered.image, model, templates);
      const auto& s = r.summary;
      ++rep.lint_ok;
      if (r.chart_class == cls) ++rep.class_ok;
      else f.diffs.push_back(std::string("class: ") + std::string(to_string(r.chart_class)) + " != " + std::string(to_string(cls)));
      const std::string want_title = g.title.value_or(semantics::kDefaultTitle);
      if (s.title == want_title) ++rep.title_ok;
      else f.diffs.push_back("title: \"" + s.title + "\" != \"" + want_title + "\"");
      if (s.y_label == g.y_label) ++rep.y_label_ok;
      else f.diffs.push_back("y_label: " + detail::show(s.y_label) + " != " + detail::show(g.y_label));
      if (s.legend == g.legend && s.legend_entries == g.legend_entries) ++rep.legend_ok;
      else f.diffs.push_back("legend: " + detail::show(s.legend_entries) + " != " + detail::show(g.legend_entries));
    } catch (const error& e) {
      f.diffs.push_back("error in " + (e.stage().empty() ? std::string("pipeline") : e.stage()) + ": " + e.what());
    }
    if (!f.diffs.empty()) rep.failures.push_back(std::move(f));
  }
  const auto rate = [&](std::size_t ok) { return static_cast<double>(ok) / static_cast<double>(n); };
  rep.class_recovery_rate = rate(rep.class_ok);
  rep.title_exact_rate = rate(rep.title_ok);
  rep.y_label_exact_rate = rate(rep.y_label_ok);
  rep.legend_agreement_rate = rate(rep.legend_ok);
  rep.lint_pass_rate = rate(rep.lint_ok);
  return rep;
}

inline nlohmann::json roundtrip_json(const RoundTripReport& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures)
    failures.push_back({{"index", f.index}, {"seed", f.seed}, {"class", to_string(f.chart_class)}, {"diffs", f.diffs}});
  return {{"n", r.n},
          {"class_recovery_rate", r.class_recovery_rate},
          {"title_exact_rate", r.title_exact_rate},
          {"y_label_exact_rate", r.y_label_exact_rate},
          {"legend_agreement_rate", r.legend_agreement_rate},
          {"lint_pass_rate", r.lint_pass_rate},
          {"failures", failures}};
}

}  // namespace g2l::app
