#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "g2l/chart_model.hpp"
#include "g2l/cnn/model_io.hpp"
#include "g2l/cnn/network.hpp"
#include "g2l/corpus.hpp"
#include "g2l/random.hpp"
#include "g2l/raster/image.hpp"

namespace g2l::cnn {

inline constexpr int kInputSide = 64;
inline constexpr int kMinWidth = 64;
inline constexpr int kMinHeight = 48;

/// Luminance, box-averaged to 64x64 and scaled to [0, 1]; not standardized.
inline Tensor<float> preprocess(const RasterImage& img) {
  if (img.width() < kMinWidth || img.height() < kMinHeight)
    fail(errc::invalid_argument, "image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                     " is smaller than the minimum " + std::to_string(kMinWidth) + "x" +
                                     std::to_string(kMinHeight));
  Tensor<float> t({kInputSide, kInputSide, 1});
  const int W = img.width(), H = img.height();
  std::vector<double> luma(static_cast<std::size_t>(W) * H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) luma[static_cast<std::size_t>(y) * W + x] = img.luma_at(x, y);
  auto span = [](int i, int n) {
    const int a = i * n / kInputSide;
    return std::pair{a, std::max(a + 1, (i + 1) * n / kInputSide)};
  };
  for (int oy = 0; oy < kInputSide; ++oy) {
    const auto [y0, y1] = span(oy, H);
    for (int ox = 0; ox < kInputSide; ++ox) {
      const auto [x0, x1] = span(ox, W);
      double sum = 0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) sum += luma[static_cast<std::size_t>(y) * W + x];
      t.data[static_cast<std::size_t>(oy) * kInputSide + ox] =
          static_cast<float>(sum / ((y1 - y0) * (x1 - x0)) / 255.0);
    }
  }
  return t;
}

/// Applies the model's input normalization in place.
inline void standardize(Tensor<float>& t, const Model& m) {
  const float mean = static_cast<float>(m.norm_mean), inv = static_cast<float>(1.0 / m.norm_std);
  for (auto& v : t.data) v = (v - mean) * inv;
}

struct Prediction {
  ChartClass chart_class = ChartClass::bar;
  double confidence = 0;
  std::vector<float> probabilities;
};

inline Prediction predict(const Model& m, const RasterImage& img) {
  auto t = preprocess(img);
  standardize(t, m);
  Prediction p;
  p.probabilities = m.forward(t);
  const auto best = std::max_element(p.probabilities.begin(), p.probabilities.end()) - p.probabilities.begin();
  p.chart_class = parse_chart_class(m.classes[static_cast<std::size_t>(best)]);
  p.confidence = p.probabilities[static_cast<std::size_t>(best)];
  return p;
}

inline std::vector<std::string> default_class_names() {
  std::vector<std::string> out;
  for (auto c : kAllChartClasses) out.emplace_back(to_string(c));
  return out;
}

struct HyperParams {
  int epochs_max = 50;
  int batch = 32;
  double lr = 0.01;
  double momentum = 0.9;
  double val_fraction = 0.15;
  double target_accuracy = 0.99;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0;
  double train_accuracy = 0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double final_train_accuracy = 0;
  double heldout_accuracy = 0;
  int epochs_run = 0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_heldout = 0;
  std::vector<std::string> skipped;  // unreadable items
};

struct TrainResult {
  Model model;
  TrainReport report;
};

/// In-memory training data: preprocessed, unstandardized 64x64 inputs.
struct Dataset {
  std::vector<std::vector<float>> inputs;
  std::vector<int> labels;
  std::vector<std::string> skipped;
};

/// Reads and preprocesses every manifest item; unreadable items are listed
/// and skipped, and more than 5% unreadable aborts.
inline Dataset load_dataset(const CorpusManifest& manifest, const std::vector<std::string>& classes) {
  if (manifest.items.empty()) fail(errc::invalid_argument, "no items in corpus manifest");
  Dataset ds;
  for (const auto& it : manifest.items) {
    const auto pos = std::find(classes.begin(), classes.end(), to_string(it.chart_class));
    if (pos == classes.end()) fail(errc::invalid_argument, "class '" + std::string(to_string(it.chart_class)) + "' not in class list");
    try {
      auto t = preprocess(read_image(manifest.image_file(it)));
      ds.inputs.push_back(std::move(t.data));
      ds.labels.push_back(static_cast<int>(pos - classes.begin()));
    } catch (const error& e) {
      ds.skipped.push_back(it.image_path + ": " + e.what());
    }
  }
  if (ds.skipped.size() * 20 > manifest.items.size())
    fail(errc::decode, std::to_string(ds.skipped.size()) + " of " + std::to_string(manifest.items.size()) +
                           " corpus items unreadable (limit 5%); first: " + ds.skipped.front());
  return ds;
}

inline double accuracy_on(const Model& m, const Dataset& ds, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0;
  std::size_t ok = 0;
  Tensor<float> t({kInputSide, kInputSide, 1});
  for (std::size_t i : idx) {
    t.data = ds.inputs[i];
    standardize(t, m);
    const auto p = m.forward(t);
    ok += static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()) == ds.labels[i];
  }
  return static_cast<double>(ok) / static_cast<double>(idx.size());
}

/// Seeded, single-threaded SGD with momentum. Stops early once an epoch's
/// running training accuracy reaches hp.target_accuracy.
inline TrainResult train(const Dataset& ds, const HyperParams& hp, std::uint64_t seed,
                         std::vector<std::string> classes = default_class_names(),
                         const std::function<void(const EpochStats&)>& on_epoch = {}) {
  if (hp.epochs_max < 1 || hp.batch < 1 || !(hp.lr > 0) || hp.val_fraction < 0 || hp.val_fraction >= 1)
    fail(errc::invalid_argument, "bad hyperparameters");
  {
    std::vector<int> seen = ds.labels;
    std::sort(seen.begin(), seen.end());
    if (std::unique(seen.begin(), seen.end()) - seen.begin() < 2)
      fail(errc::invalid_argument, "training needs at least two classes");
  }

  Rng split_rng(Fnv1a().text("split").u64_le(seed).value());
  Rng init_rng(Fnv1a().text("init").u64_le(seed).value());
  Rng shuffle_rng(Fnv1a().text("shuffle").u64_le(seed).value());

  // Stratified held-out split.
  std::vector<std::size_t> train_idx, val_idx;
  for (int c = 0; c < static_cast<int>(classes.size()); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
      if (ds.labels[i] == c) members.push_back(i);
    split_rng.shuffle(members);
    std::size_t n_val = static_cast<std::size_t>(std::lround(hp.val_fraction * static_cast<double>(members.size())));
    if (n_val >= members.size()) n_val = members.size() > 0 ? members.size() - 1 : 0;
    val_idx.insert(val_idx.end(), members.begin(), members.begin() + static_cast<long>(n_val));
    train_idx.insert(train_idx.end(), members.begin() + static_cast<long>(n_val), members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());

  TrainResult r;
  r.report.seed = seed;
  r.report.skipped = ds.skipped;
  r.report.n_train = train_idx.size();
  r.report.n_heldout = val_idx.size();
  Model& m = r.model;
  m = chart_classifier<float>(std::move(classes));

  double sum = 0, sum_sq = 0, count = 0;
  for (std::size_t i : train_idx)
    for (float v : ds.inputs[i]) {
      sum += v;
      sum_sq += static_cast<double>(v) * v;
      count += 1;
    }
  m.norm_mean = sum / count;
  const double var = sum_sq / count - m.norm_mean * m.norm_mean;
  m.norm_std = var > 1e-12 ? std::sqrt(var) : 1.0;

  he_uniform_init(m, init_rng);

  std::vector<std::vector<float>> standardized(ds.inputs.size());
  {
    Tensor<float> t;
    for (std::size_t i : train_idx) {
      t.data = ds.inputs[i];
      standardize(t, m);
      standardized[i] = std::move(t.data);
    }
  }

  Gradients<float> velocity = m.zero_gradients();
  std::vector<std::size_t> order = train_idx;
  for (int epoch = 1; epoch <= hp.epochs_max; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hp.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hp.batch));
      std::vector<const float*> inputs;
      std::vector<int> labels;
      for (std::size_t k = start; k < end; ++k) {
        inputs.push_back(standardized[order[k]].data());
        labels.push_back(ds.labels[order[k]]);
      }
      auto lg = loss_and_grad(m, inputs, labels);
      loss_sum += lg.loss * static_cast<double>(end - start);
      correct += lg.correct;
      const float mu = static_cast<float>(hp.momentum), lr = static_cast<float>(hp.lr);
      m.for_each_parameter([&](std::size_t li, std::vector<float>& w, std::vector<float>& b) {
        auto step = [&](std::vector<float>& p, std::vector<float>& v, const std::vector<float>& g) {
          for (std::size_t j = 0; j < p.size(); ++j) {
            v[j] = mu * v[j] - lr * g[j];
            p[j] += v[j];
          }
        };
        step(w, velocity.w[li], lg.grads.w[li]);
        step(b, velocity.b[li], lg.grads.b[li]);
      });
    }
    EpochStats st{epoch, loss_sum / static_cast<double>(order.size()),
                  static_cast<double>(correct) / static_cast<double>(order.size())};
    if (!std::isfinite(st.train_loss)) fail(errc::internal, "non-finite training loss at epoch " + std::to_string(epoch));
    r.report.epochs.push_back(st);
    r.report.epochs_run = epoch;
    if (on_epoch) on_epoch(st);
    if (st.train_accuracy >= hp.target_accuracy) break;
  }

  r.report.final_train_accuracy = accuracy_on(m, ds, train_idx);
  r.report.heldout_accuracy = accuracy_on(m, ds, val_idx);
  return r;
}

inline TrainResult train(const CorpusManifest& manifest, const HyperParams& hp, std::uint64_t seed,
                         const std::function<void(const EpochStats&)>& on_epoch = {}) {
  const auto classes = default_class_names();
  const auto ds = load_dataset(manifest, classes);
  return train(ds, hp, seed, classes, on_epoch);
}

inline nlohmann::json report_json(const TrainReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"train_accuracy", e.train_accuracy}});
  return {{"epochs", epochs},
          {"final_train_accuracy", r.final_train_accuracy},
          {"heldout_accuracy", r.heldout_accuracy},
          {"epochs_run", r.epochs_run},
          {"seed", r.seed},
          {"n_train", r.n_train},
          {"n_heldout", r.n_heldout},
          {"skipped", r.skipped}};
}

}  // namespace g2l::cnn
