#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "g2l/cnn/model_io.hpp"
#include "g2l/cnn/network.hpp"
#include "g2l/cnn/train.hpp"
#include "g2l/corpus.hpp"
#include "support/grad_check.hpp"

using namespace g2l;
using namespace g2l::cnn;
namespace fs = std::filesystem;

namespace {

Tensor<float> random_input(std::uint64_t seed, Shape3 s = {64, 64, 1}) {
  Tensor<float> t({s.h, s.w, s.c});
  Rng rng(seed);
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(-1.5, 1.5));
  return t;
}

Model random_model(std::uint64_t seed) {
  Model m = chart_classifier<float>(default_class_names());
  Rng rng(seed);
  he_uniform_init(m, rng);
  return m;
}

Dense<float>& last_dense(Model& m) {
  for (auto it = m.layers.rbegin(); it != m.layers.rend(); ++it)
    if (auto* d = std::get_if<Dense<float>>(&*it)) return *d;
  throw std::logic_error("no dense layer");
}

}  // namespace

TEST(Preprocess, ConstantImages) {
  const auto white = preprocess(create_image(640, 480, 3, 255));
  EXPECT_EQ(white.shape, (std::vector<int>{64, 64, 1}));
  for (float v : white.data) EXPECT_FLOAT_EQ(v, 1.0f);
  const auto black = preprocess(create_image(640, 480, 3, 0));
  for (float v : black.data) EXPECT_EQ(v, 0.0f);
}

TEST(Preprocess, CheckerboardAveragesToHalf) {
  auto img = create_image(128, 128, 1, 0);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      if ((x + y) % 2) img.set(x, y, kWhite);
  for (float v : preprocess(img).data) EXPECT_FLOAT_EQ(v, 0.5f);
}

TEST(Preprocess, RejectsSmallImages) {
  EXPECT_THROW(preprocess(create_image(63, 480, 1, 0)), error);
  EXPECT_THROW(preprocess(create_image(640, 47, 1, 0)), error);
  EXPECT_NO_THROW(preprocess(create_image(64, 48, 1, 0)));
}

TEST(Forward, ZeroWeightsGiveUniform) {
  const Model m = chart_classifier<float>(default_class_names());
  const auto p = m.forward(random_input(1));
  ASSERT_EQ(p.size(), 7u);
  for (float v : p) EXPECT_NEAR(v, 1.0 / 7.0, 1e-7);
  EXPECT_NEAR(1.0 / 7.0, 0.142857, 1e-6);
}

TEST(Forward, ProbabilitiesSumToOne) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Model m = random_model(s);
    const auto p = m.forward(random_input(100 + s));
    double sum = 0;
    for (float v : p) {
      EXPECT_GE(v, 0.0f);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Forward, ConstantLogitShiftInvariance) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Model m = random_model(s);
    const auto x = random_input(7 + s);
    const auto before = m.forward(x);
    for (auto& b : last_dense(m).b) b += 3.25f;
    const auto after = m.forward(x);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(before[i], after[i], 1e-6);
    EXPECT_EQ(std::max_element(before.begin(), before.end()) - before.begin(),
              std::max_element(after.begin(), after.end()) - after.begin());
  }
}

TEST(Forward, ShapeMismatchIsInvalidArgument) {
  const Model m = chart_classifier<float>(default_class_names());
  try {
    m.forward(random_input(1, {32, 32, 1}));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_argument);
  }
}

TEST(Forward, Deterministic) {
  const Model m = random_model(3);
  const auto x = random_input(4);
  EXPECT_EQ(m.forward(x), m.forward(x));
}

TEST(Loss, CertainPredictionHasZeroLoss) {
  Model m = chart_classifier<float>(default_class_names());
  last_dense(m).b[2] = 1000.0f;
  const auto x = random_input(1);
  const auto r = loss_and_grad(m, {x.data.data()}, {2});
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_EQ(r.correct, 1);
}

TEST(Loss, UniformPredictionIsLogSeven) {
  const Model m = chart_classifier<float>(default_class_names());
  const auto a = random_input(1), b = random_input(2);
  const auto r = loss_and_grad(m, {a.data.data(), b.data.data()}, {0, 6});
  EXPECT_NEAR(r.loss, std::log(7.0), 1e-6);
  EXPECT_NEAR(r.loss, 1.94591, 1e-5);
}

TEST(Loss, GradientShapesMirrorWeights) {
  const Model m = random_model(2);
  const auto a = random_input(1);
  const auto r = loss_and_grad(m, {a.data.data()}, {4});
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    if (const auto* c = std::get_if<Conv<float>>(&m.layers[i])) {
      EXPECT_EQ(r.grads.w[i].size(), c->w.size());
      EXPECT_EQ(r.grads.b[i].size(), c->b.size());
    } else if (const auto* d = std::get_if<Dense<float>>(&m.layers[i])) {
      EXPECT_EQ(r.grads.w[i].size(), d->w.size());
      EXPECT_EQ(r.grads.b[i].size(), d->b.size());
    } else {
      EXPECT_TRUE(r.grads.w[i].empty());
    }
  }
}

TEST(Loss, LabelOutOfRangeIsInvalidArgument) {
  const Model m = chart_classifier<float>(default_class_names());
  const auto a = random_input(1);
  EXPECT_THROW(loss_and_grad(m, {a.data.data()}, {7}), error);
  EXPECT_THROW(loss_and_grad(m, {a.data.data()}, {-1}), error);
  EXPECT_THROW(loss_and_grad(m, {}, {}), error);
}

// Central differences over every parameter of three toy networks, kinks excluded.
TEST(GradientCheck, MatchesCentralDifferences) {
  EXPECT_LE(g2l::testing::toy_network(1).parameter_count(), 1000u);
  const auto r = g2l::testing::gradient_check(3);
  EXPECT_GE(r.probes, 100);
  EXPECT_LE(r.kinks, r.probes / 10);
  EXPECT_EQ(r.over_tolerance, 0) << "max relative error " << r.worst;
  std::printf("gradient check: %d probes, %d excluded at kinks, max relative error %.3g\n", r.probes, r.kinks, r.worst);
}

TEST(ModelIo, SaveLoadIsExact) {
  Model m = random_model(9);
  m.norm_mean = 0.873;
  m.norm_std = 0.211;
  const auto path = fs::temp_directory_path() / "g2l_model_rt.json";
  save_model(m, path);
  const Model back = load_model(path);
  EXPECT_EQ(back.classes, m.classes);
  EXPECT_EQ(back.norm_mean, m.norm_mean);
  EXPECT_EQ(back.norm_std, m.norm_std);
  for (std::uint64_t s = 0; s < 5; ++s) EXPECT_EQ(back.forward(random_input(s)), m.forward(random_input(s)));
  EXPECT_EQ(model_to_string(back), model_to_string(m));
  fs::remove(path);
}

TEST(ModelIo, FloatsRoundTripBitExactly) {
  Rng rng(5);
  for (int i = 0; i < 100000; ++i) {
    float f;
    const std::uint32_t bits = static_cast<std::uint32_t>(rng.next());
    std::memcpy(&f, &bits, 4);
    if (!std::isfinite(f)) continue;
    const double d = g2l::cnn::detail::float_to_json_number(f);
    const double reparsed = nlohmann::json::parse(nlohmann::json(d).dump()).get<double>();
    EXPECT_EQ(static_cast<float>(reparsed), f);
  }
}

TEST(ModelIo, ClassCountMismatchFailsToLoad) {
  auto j = model_to_json(random_model(1));
  j["classes"].erase(j["classes"].size() - 1);
  try {
    model_from_json(j);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::model);
    EXPECT_NE(std::string(e.what()).find("6 classes"), std::string::npos) << e.what();
  }
}

TEST(ModelIo, UnknownKindIsNamed) {
  auto j = model_to_json(random_model(1));
  j["layers"][1]["kind"] = "swish";
  try {
    model_from_json(j);
    FAIL();
  } catch (const error& e) {
    EXPECT_NE(std::string(e.what()).find("swish"), std::string::npos) << e.what();
  }
}

TEST(ModelIo, VersionAndShapeChainErrors) {
  auto j = model_to_json(random_model(1));
  j["version"] = 2;
  EXPECT_THROW(model_from_json(j), error);
  j = model_to_json(random_model(1));
  j["layers"][3]["params"]["in_channels"] = 4;
  EXPECT_THROW(model_from_json(j), error);
  j = model_to_json(random_model(1));
  j["layers"][7]["weights"].erase(0);
  EXPECT_THROW(model_from_json(j), error);
  EXPECT_THROW(load_model(fs::temp_directory_path() / "g2l_no_such_model.json"), error);
}

class TinyCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "g2l_cnn_tiny";
    fs::remove_all(dir_);
    CorpusConfig cfg;
    cfg.counts = {{ChartClass::bar, 10}, {ChartClass::pie, 10}};
    cfg.master_seed = 21;
    cfg.out_dir = dir_;
    generate_corpus(cfg);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static fs::path dir_;
};
fs::path TinyCorpus::dir_;

TEST_F(TinyCorpus, LossDecreases) {
  HyperParams hp;
  hp.epochs_max = 30;
  hp.target_accuracy = 2.0;  // run every epoch
  const auto r = train(read_manifest(dir_), hp, 1);
  ASSERT_EQ(r.report.epochs_run, 30);
  EXPECT_LT(r.report.epochs.back().train_loss, r.report.epochs.front().train_loss);
  for (const auto& e : r.report.epochs) {
    EXPECT_GE(e.train_loss, 0);
    EXPECT_GE(e.train_accuracy, 0);
    EXPECT_LE(e.train_accuracy, 1);
  }
  EXPECT_EQ(r.report.n_train + r.report.n_heldout, 20u);
  EXPECT_EQ(r.report.n_heldout, 4u);
}

TEST_F(TinyCorpus, TrainingIsDeterministic) {
  HyperParams hp;
  hp.epochs_max = 5;
  const auto a = train(read_manifest(dir_), hp, 77);
  const auto b = train(read_manifest(dir_), hp, 77);
  EXPECT_EQ(model_to_string(a.model), model_to_string(b.model));
  const auto c = train(read_manifest(dir_), hp, 78);
  EXPECT_NE(model_to_string(a.model), model_to_string(c.model));
}

TEST_F(TinyCorpus, PredictConfidenceIsMaxProbability) {
  HyperParams hp;
  hp.epochs_max = 5;
  const auto r = train(read_manifest(dir_), hp, 3);
  const auto m = read_manifest(dir_);
  const auto img = read_image(m.image_file(m.items[0]));
  const auto p = predict(r.model, img);
  EXPECT_EQ(p.confidence, *std::max_element(p.probabilities.begin(), p.probabilities.end()));
  EXPECT_GT(p.confidence, 0);
  EXPECT_LE(p.confidence, 1);
}

TEST(Train, RequiresTwoClasses) {
  Dataset ds;
  ds.inputs.assign(4, std::vector<float>(64 * 64, 0.5f));
  ds.labels = {0, 0, 0, 0};
  EXPECT_THROW(train(ds, HyperParams{}, 1), error);
}

TEST(Train, TooManyUnreadableItemsAborts) {
  const auto dir = fs::temp_directory_path() / "g2l_cnn_broken";
  fs::remove_all(dir);
  CorpusConfig cfg;
  cfg.counts = {{ChartClass::bar, 5}, {ChartClass::pie, 5}};
  cfg.out_dir = dir;
  auto m = generate_corpus(cfg);
  write_text_file(m.image_file(m.items[0]), "not a png");
  EXPECT_THROW(load_dataset(read_manifest(dir), default_class_names()), error);
  fs::remove_all(dir);
}
