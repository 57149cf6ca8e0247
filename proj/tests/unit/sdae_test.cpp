#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "knock/sdae.hpp"

namespace fs = std::filesystem;

namespace knock {
namespace {

LabeledDataset blob_dataset(int n_classes, int per_class, int dim, std::uint64_t seed, double spread = 0.15) {
  Rng rng(seed);
  std::uniform_real_distribution<double> centre(-0.8, 0.8);
  std::normal_distribution<double> noise(0.0, spread);
  std::vector<Vector> centres;
  for (int c = 0; c < n_classes; ++c) {
    Vector v(dim);
    for (auto& x : v) x = centre(rng);
    centres.push_back(v);
  }
  LabeledDataset ds;
  ds.n_classes = n_classes;
  for (int c = 0; c < n_classes; ++c)
    for (int i = 0; i < per_class; ++i) {
      Vector x = centres[static_cast<std::size_t>(c)];
      for (auto& v : x) v = std::clamp(v + noise(rng), -1.0, 1.0);
      ds.examples.push_back({x, c});
    }
  return ds;
}

TrainConfig small_config(int pretrain = 20, int finetune = 20) {
  TrainConfig c;
  c.pretrain_epochs = pretrain;
  c.finetune_epochs = finetune;
  c.batch_size = 5;
  c.seed = 3;
  return c;
}

SdaeModel random_model(const LayerLayout& layout, Rng& rng) {
  SdaeModel m;
  m.layout = layout;
  std::normal_distribution<double> d(0.0, 0.3);
  for (std::size_t i = 1; i + 1 < layout.dims.size(); ++i) {
    DenseLayer l = DenseLayer::glorot(layout.dims[i], layout.dims[i - 1], rng);
    for (auto& v : l.b) v = d(rng);
    m.encoders.push_back(l);
  }
  m.head = DenseLayer::glorot(layout.n_classes(), layout.dims[layout.dims.size() - 2], rng);
  for (auto& v : m.head.b) v = d(rng);
  return m;
}

Vector random_window(Rng& rng, int dim) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(dim);
  for (auto& x : v) x = d(rng);
  return v;
}

TEST(LayerLayout, ParseAndValidate) {
  const LayerLayout l = LayerLayout::parse("500-200-200-200-30");
  EXPECT_EQ(l.dims, (std::vector<int>{500, 200, 200, 200, 30}));
  EXPECT_EQ(l.hidden(), (std::vector<int>{200, 200, 200}));
  EXPECT_EQ(l.to_string(), "500-200-200-200-30");
  EXPECT_EQ(LayerLayout::from_hidden(500, {100, 100, 100}, 30), LayerLayout::parse("500-100-100-100-30"));
  EXPECT_TRUE(LayerLayout::parse("500-30").hidden().empty());
  EXPECT_THROW(LayerLayout::parse("500"), InvalidArgument);
  EXPECT_THROW(LayerLayout::parse("500-0-30"), InvalidArgument);
  EXPECT_THROW(LayerLayout::parse("500-x-30"), InvalidArgument);
  EXPECT_THROW(LayerLayout::parse(""), InvalidArgument);
}

TEST(TrainConfig, Defaults) {
  const TrainConfig c;
  EXPECT_EQ(c.pretrain_epochs, 500);
  EXPECT_EQ(c.finetune_epochs, 100);
  EXPECT_EQ(c.pretrain_lr, 0.1);
  EXPECT_EQ(c.finetune_lr, 0.1);
  EXPECT_EQ(c.corruption_fraction, 0.25);
  EXPECT_EQ(c.batch_size, 20);
  TrainConfig bad = c;
  bad.pretrain_lr = 0.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = c;
  bad.finetune_epochs = -1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(PretrainStack, EncoderShapes) {
  const LabeledDataset ds = blob_dataset(3, 4, 50, 1);
  const auto r = pretrain_stack(ds.inputs(), LayerLayout::parse("50-20-20-20-3"), small_config(2));
  ASSERT_EQ(r.encoders.size(), 3u);
  EXPECT_EQ(r.encoders[0].W.rows(), 20);
  EXPECT_EQ(r.encoders[0].W.cols(), 50);
  EXPECT_EQ(r.encoders[1].W.rows(), 20);
  EXPECT_EQ(r.encoders[1].W.cols(), 20);
  EXPECT_EQ(r.encoders[2].W.cols(), 20);
  EXPECT_EQ(r.loss_histories.size(), 3u);
  EXPECT_EQ(r.loss_histories[0].size(), 2u);
}

TEST(PretrainStack, FullScaleShapes) {
  // Shapes only; one epoch over a handful of windows keeps this quick.
  const LabeledDataset ds = blob_dataset(2, 3, 500, 2);
  const auto r = pretrain_stack(ds.inputs(), LayerLayout::parse("500-200-200-200-30"), small_config(1));
  ASSERT_EQ(r.encoders.size(), 3u);
  EXPECT_EQ(r.encoders[0].W.rows(), 200);
  EXPECT_EQ(r.encoders[0].W.cols(), 500);
  EXPECT_EQ(r.encoders[1].W.rows(), 200);
  EXPECT_EQ(r.encoders[1].W.cols(), 200);
  EXPECT_EQ(r.encoders[2].W.rows(), 200);
  EXPECT_EQ(r.encoders[2].W.cols(), 200);
}

TEST(PretrainStack, NoHiddenLayers) {
  const LabeledDataset ds = blob_dataset(2, 3, 10, 3);
  EXPECT_TRUE(pretrain_stack(ds.inputs(), LayerLayout::parse("10-2"), small_config()).encoders.empty());
}

TEST(PretrainStack, LayerTwoSeesLayerOneCodes) {
  const LabeledDataset ds = blob_dataset(3, 5, 12, 4);
  std::vector<Matrix> seen;
  const auto r = pretrain_stack(ds.inputs(), LayerLayout::parse("12-8-6-3"), small_config(5),
                                [&](std::size_t, const Matrix& in) { seen.push_back(in); });
  ASSERT_EQ(seen.size(), 2u);
  ASSERT_EQ(seen[1].cols(), static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Vector& x = ds.examples[i].x;
    EXPECT_EQ(Vector(seen[0].col(static_cast<Eigen::Index>(i))), x);
    Vector code(8);
    for (int h = 0; h < 8; ++h) {
      double acc = r.encoders[0].b[h];
      for (int j = 0; j < 12; ++j) acc += r.encoders[0].W(h, j) * x[j];
      code[h] = std::tanh(acc);
    }
    EXPECT_LT((seen[1].col(static_cast<Eigen::Index>(i)) - code).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PretrainStack, DimensionMismatch) {
  const LabeledDataset ds = blob_dataset(2, 3, 10, 3);
  EXPECT_THROW(pretrain_stack(ds.inputs(), LayerLayout::parse("11-4-2"), small_config()), ShapeError);
}

TEST(FineTune, ZeroEpochsLeavesEncoders) {
  const LabeledDataset ds = blob_dataset(3, 5, 12, 5);
  const LayerLayout layout = LayerLayout::parse("12-6-3");
  const auto stack = pretrain_stack(ds.inputs(), layout, small_config(3));
  const SdaeModel a = fine_tune(stack.encoders, ds, layout, small_config(3, 0));
  const SdaeModel b = fine_tune(stack.encoders, ds, layout, small_config(3, 0));
  ASSERT_EQ(a.encoders.size(), 1u);
  EXPECT_EQ(a.encoders[0], stack.encoders[0]);
  EXPECT_EQ(a.head, b.head);
  EXPECT_TRUE(a.finetune_loss.empty());
  const SdaeModel trained = fine_tune(stack.encoders, ds, layout, small_config(3, 5));
  EXPECT_FALSE(trained.encoders[0] == stack.encoders[0]);
  EXPECT_FALSE(trained.head == a.head);
}

TEST(FineTune, SeparableTinyTask) {
  LabeledDataset ds;
  ds.n_classes = 2;
  ds.examples = {{Vector{{0.5, -0.5, 0.5, -0.5}}, 0}, {Vector{{-0.5, 0.5, -0.5, 0.5}}, 1}};
  TrainConfig c = small_config(100, 100);
  c.batch_size = 2;
  const SdaeModel m = train_sdae(ds, LayerLayout::parse("4-3-2"), c);
  EXPECT_EQ(predict(m, ds.examples[0].x).label, 0);
  EXPECT_EQ(predict(m, ds.examples[1].x).label, 1);
}

TEST(FineTune, DeterministicLoss) {
  const LabeledDataset ds = blob_dataset(3, 6, 10, 6);
  const auto a = train_sdae(ds, LayerLayout::parse("10-8-3"), small_config(5, 10));
  const auto b = train_sdae(ds, LayerLayout::parse("10-8-3"), small_config(5, 10));
  ASSERT_EQ(a.finetune_loss.size(), 10u);
  EXPECT_EQ(a.finetune_loss, b.finetune_loss);
  EXPECT_EQ(model_to_json(a), model_to_json(b));
}

TEST(FineTune, Errors) {
  LabeledDataset ds = blob_dataset(3, 2, 6, 7);
  ds.examples[0].label = 5;
  EXPECT_THROW(fine_tune({}, ds, LayerLayout::parse("6-3"), small_config()), InvalidArgument);
  EXPECT_THROW(fine_tune({}, LabeledDataset{}, LayerLayout::parse("6-3"), small_config()), InvalidArgument);
}

TEST(TrainSdae, LearnsBlobsAndLogsBothPhases) {
  const LabeledDataset ds = blob_dataset(4, 15, 30, 8);
  TrainingLog log;
  const SdaeModel m = train_sdae(ds, LayerLayout::parse("30-16-16-4"), small_config(20, 60), &log);
  m.check_chain();
  int correct = 0;
  for (const auto& e : ds.examples) correct += predict(m, e.x).label == e.label;
  EXPECT_GE(correct, 57);
  std::size_t pre = 0, fine = 0;
  for (const auto& e : log) (e.phase == "pretrain" ? pre : fine) += 1;
  EXPECT_EQ(pre, 40u);
  EXPECT_EQ(fine, 60u);
  EXPECT_EQ(log.front().layer, 1);
  EXPECT_EQ(log.back().layer, 0);
}

TEST(TrainSdae, GradientsThroughTheStack) {
  Rng rng(9);
  const SdaeModel m = random_model(LayerLayout::parse("12-7-5-4"), rng);
  Matrix x(12, 3);
  for (int c = 0; c < 3; ++c) x.col(c) = random_window(rng, 12);
  const auto layers = m.layers();
  const auto acts = m.activations();
  EXPECT_LT(grad_check(layers, acts, x, Target{std::vector<int>{0, 3, 1}}, 1e-5), 1e-6);
}

TEST(Predict, ZeroModelIsUniform) {
  SdaeModel m;
  m.layout = LayerLayout::parse("500-200-30");
  m.encoders = {DenseLayer::zeros(200, 500)};
  m.head = DenseLayer::zeros(30, 200);
  Rng rng(10);
  const Prediction p = predict(m, random_window(rng, 500));
  EXPECT_EQ(p.label, 0);
  for (int c = 0; c < 30; ++c) EXPECT_NEAR(p.probs[c], 1.0 / 30.0, 1e-15);
}

TEST(Predict, MatchesManualChain) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const SdaeModel m = random_model(LayerLayout::parse("20-9-7-5"), rng);
    const Vector x = random_window(rng, 20);
    Vector h = x;
    for (const auto& enc : m.encoders) {
      Dae dae{enc, DenseLayer::zeros(enc.in_dim(), enc.out_dim())};
      h = encode(dae, h);
    }
    Vector z = affine_forward(m.head, h);
    const double shift = z.maxCoeff();
    Vector e = (z.array() - shift).exp();
    const Vector probs = e / e.sum();
    const Prediction p = predict(m, x);
    EXPECT_LT((p.probs - probs).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(p.probs.sum(), 1.0, 1e-12);
    EXPECT_EQ(p.label, argmax(p.probs));
    const Prediction again = predict(m, x);
    EXPECT_EQ(again.probs, p.probs);
  }
  const SdaeModel m = random_model(LayerLayout::parse("20-9-5"), rng);
  EXPECT_THROW(predict(m, Vector::Zero(19)), ShapeError);
}

TEST(Argmax, FirstMaximum) {
  EXPECT_EQ(argmax(Vector{{0.2, 0.4, 0.4}}), 1);
  EXPECT_EQ(argmax(Vector::Zero(5)), 0);
}

TEST(ModelFile, RoundTripIsExact) {
  Rng rng(12);
  SdaeModel m = random_model(LayerLayout::parse("40-13-11-6"), rng);
  m.config.seed = 77;
  m.config.corruption_fraction = 0.1;
  const fs::path path = fs::temp_directory_path() / "knock_sdae_roundtrip.json";
  save_model(m, path);
  const SdaeModel back = load_model(path);
  EXPECT_EQ(back.layout, m.layout);
  EXPECT_EQ(back.config, m.config);
  ASSERT_EQ(back.encoders.size(), m.encoders.size());
  for (std::size_t i = 0; i < m.encoders.size(); ++i) EXPECT_EQ(back.encoders[i], m.encoders[i]);
  EXPECT_EQ(back.head, m.head);
  for (int i = 0; i < 100; ++i) {
    const Vector x = random_window(rng, 40);
    const Prediction a = predict(m, x), b = predict(back, x);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.probs, b.probs);
  }
  EXPECT_EQ(model_to_json(back), model_to_json(m));
}

TEST(ModelFile, EmptyHiddenLayers) {
  Rng rng(13);
  const SdaeModel m = random_model(LayerLayout::parse("8-3"), rng);
  const SdaeModel back = model_from_json(model_to_json(m));
  EXPECT_TRUE(back.encoders.empty());
  EXPECT_EQ(back.head, m.head);
}

TEST(ModelFile, Errors) {
  Rng rng(14);
  const SdaeModel m = random_model(LayerLayout::parse("6-4-3"), rng);
  nlohmann::json j = nlohmann::json::parse(model_to_json(m));

  nlohmann::json wrong_shape = j;
  wrong_shape["encoders"][0]["rows"] = 5;
  EXPECT_THROW(model_from_json(wrong_shape.dump()), ShapeError);

  nlohmann::json short_data = j;
  short_data["encoders"][0]["W"].erase(0);
  EXPECT_THROW(model_from_json(short_data.dump()), ShapeError);

  nlohmann::json chain = j;
  chain["layout"] = {6, 5, 3};
  EXPECT_THROW(model_from_json(chain.dump()), ShapeError);

  nlohmann::json version = j;
  version["format_version"] = 2;
  EXPECT_THROW(model_from_json(version.dump()), VersionError);

  EXPECT_THROW(model_from_json("{not json"), FormatError);
  nlohmann::json missing = j;
  missing.erase("head");
  EXPECT_THROW(model_from_json(missing.dump()), FormatError);
  EXPECT_THROW(load_model(fs::temp_directory_path() / "knock_no_such_model.json"), Error);
}

TEST(TrainingLog, CsvShape) {
  const fs::path path = fs::temp_directory_path() / "knock_training_log.csv";
  write_training_log_csv(path, {{"pretrain", 1, 1, 0.5}, {"finetune", 0, 1, 2.0}});
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "phase,layer,epoch,loss");
  std::getline(in, row);
  EXPECT_EQ(row.rfind("pretrain,1,1,", 0), 0u);
}

}  // namespace
}  // namespace knock
