#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "cgua/datagen.hpp"
#include "cgua/trainer.hpp"
#include "oracles.hpp"

using namespace cgua;

namespace {

World small_world(std::uint64_t seed, double sigma) {
  WorldConfig w;
  w.seed = seed;
  w.n_identities = 10;
  w.sightings_per_identity = 3;
  w.n_unpaired = 5;
  w.noise_sigma = sigma;
  return generate(w);
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.iters_per_epoch = 10;
  cfg.batch_size = 16;
  cfg.d_out = 8;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST(Encode, IdentityKeepsUnitInput) {
  Matrix x(1, 3);
  x << 0.6, 0.0, 0.8;
  EXPECT_EQ(encode(LinearEncoder::identity(3), x), x);
}

TEST(Encode, ScaleIsAbsorbed) {
  Matrix x(2, 2);
  x << 0.6, 0.8, 1.0, 0.0;
  const LinearEncoder doubled(2.0 * Matrix::Identity(2, 2));
  EXPECT_LE((encode(doubled, x) - x).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Encode, RandomOutputsAreUnit) {
  std::mt19937_64 gen(41);
  const auto enc = LinearEncoder::random(6, 4, 9);
  std::normal_distribution<double> normal;
  Matrix x(20, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
  const Matrix y = encode(enc, x);
  for (Eigen::Index i = 0; i < y.rows(); ++i) EXPECT_NEAR(y.row(i).norm(), 1.0, 1e-9);
}

TEST(Encode, ZeroProjectionThrows) {
  Matrix x(1, 2);
  x << 1, 0;
  Matrix w = Matrix::Zero(2, 2);
  w(1, 1) = 1;
  try {
    encode(LinearEncoder(w), x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVector);
  }
}

TEST(Backward, ZeroUpstreamGivesZero) {
  const auto enc = LinearEncoder::random(3, 2, 1);
  Matrix x(2, 3);
  x << 1, 2, 3, -1, 0, 1;
  EXPECT_EQ(backward(enc, x, Matrix::Zero(2, 2)), Matrix::Zero(3, 2));
}

TEST(Backward, HandExpandedTwoByTwo) {
  const double x1 = 0.3, x2 = -1.2;
  const double w11 = 0.7, w12 = -0.4, w21 = 0.5, w22 = 1.1;
  const double g1 = 0.25, g2 = -0.9;
  Matrix w(2, 2);
  w << w11, w12, w21, w22;
  Matrix x(1, 2);
  x << x1, x2;
  Matrix g(1, 2);
  g << g1, g2;

  // z = x W, n = |z|, y = z / n, L = g1 y1 + g2 y2.
  const double z1 = x1 * w11 + x2 * w21;
  const double z2 = x1 * w12 + x2 * w22;
  const double n = std::sqrt(z1 * z1 + z2 * z2);
  // dy1/dz1 = (n^2 - z1^2) / n^3, dy1/dz2 = -z1 z2 / n^3, and symmetrically.
  const double n3 = n * n * n;
  const double dl_dz1 = g1 * (n * n - z1 * z1) / n3 + g2 * (-z1 * z2) / n3;
  const double dl_dz2 = g1 * (-z1 * z2) / n3 + g2 * (n * n - z2 * z2) / n3;
  Matrix want(2, 2);
  want << x1 * dl_dz1, x1 * dl_dz2, x2 * dl_dz1, x2 * dl_dz2;

  EXPECT_LE((backward(LinearEncoder(w), x, g) - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Backward, MatchesFiniteDifferences) {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 5, din = 2 + trial % 4, dout = 2 + trial % 3;
    Matrix x(n, din), g(n, dout);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(gen);
    const auto enc = LinearEncoder::random(din, dout, trial);
    const Matrix analytic = backward(enc, x, g);

    // L(W) = sum of g .* encode(W, x).
    const std::vector<double> w0(enc.weights().data(), enc.weights().data() + enc.weights().size());
    auto loss = [&](const std::vector<double>& w) {
      Matrix wm = Eigen::Map<const Matrix>(w.data(), enc.weights().rows(), enc.weights().cols());
      return (encode(LinearEncoder(wm), x).array() * g.array()).sum();
    };
    const auto fd = oracle::finite_gradient(loss, w0);
    const std::vector<double> an(analytic.data(), analytic.data() + analytic.size());
    EXPECT_LE(oracle::relative_error(an, fd), 1e-5);
  }
}

TEST(TrainConfig, Validation) {
  EXPECT_NO_THROW(validate(TrainConfig{}));
  auto bad = [](auto mutate) {
    TrainConfig cfg;
    mutate(cfg);
    EXPECT_THROW(validate(cfg), Error);
  };
  bad([](TrainConfig& c) { c.epochs = 0; });
  bad([](TrainConfig& c) { c.batch_size = 0; });
  bad([](TrainConfig& c) { c.tau_c = 0; });
  bad([](TrainConfig& c) { c.lambda_reid = 1.5; });
  bad([](TrainConfig& c) { c.lambda_sim = -1; });
  bad([](TrainConfig& c) { c.momentum = 2; });
  bad([](TrainConfig& c) { c.d_out = 1; });
}

TEST(TrainConfig, Defaults) {
  const TrainConfig cfg;
  EXPECT_EQ(cfg.tau_c, 0.05);
  EXPECT_EQ(cfg.momentum, 0.1);
  EXPECT_EQ(cfg.lambda_sim, 0.1);
  EXPECT_EQ(cfg.lambda_reid, 0.8);
  EXPECT_EQ(cfg.batch_size, 64u);
}

TEST(Train, ZeroLearningRateFreezesWeights) {
  const auto world = small_world(1, 0.1);
  auto cfg = quick_config();
  cfg.lr = 0.0;
  const auto result = train(world.raw_features, world.catalog, cfg);
  EXPECT_EQ(result.encoder.weights(), initial_encoder(world.raw_features.cols(), cfg).weights());
  // Frozen weights give the same clustering every epoch.
  for (const auto& h : result.history) {
    EXPECT_EQ(h.n_clusters, result.history.front().n_clusters);
    EXPECT_EQ(h.n_paired, result.history.front().n_paired);
  }
}

TEST(Train, BitIdenticalAcrossRuns) {
  const auto world = small_world(2, 0.2);
  for (auto opt : {Optimizer::Sgd, Optimizer::Adam}) {
    auto cfg = quick_config();
    cfg.optimizer = opt;
    if (opt == Optimizer::Adam) cfg.lr = 3.5e-4;
    const auto a = train(world.raw_features, world.catalog, cfg);
    const auto b = train(world.raw_features, world.catalog, cfg);
    EXPECT_EQ(a.encoder.weights(), b.encoder.weights());
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) EXPECT_EQ(a.history[e].mean_loss, b.history[e].mean_loss);
  }
}

TEST(Train, LossFallsOnNoisyWorld) {
  const auto world = small_world(3, 0.3);
  TrainConfig cfg;
  cfg.epochs = 5;
  const auto result = train(world.raw_features, world.catalog, cfg);
  ASSERT_EQ(result.history.size(), 5u);
  EXPECT_LT(result.history[4].mean_loss, result.history[0].mean_loss);
}

TEST(Train, QueriesComeOnlyFromPairedClustersAndScenesStayUnique) {
  const auto world = small_world(5, 0.2);
  auto cfg = quick_config();
  cfg.record_batches = true;
  cfg.epochs = 1;
  for (std::size_t epochs : {1u, 2u, 3u}) {
    cfg.epochs = epochs;
    const auto result = train(world.raw_features, world.catalog, cfg);
    EXPECT_TRUE(satisfies_scene_uniqueness(result.last_assignment, world.catalog));
    ASSERT_TRUE(result.last_banks.has_value());
    const auto& banks = *result.last_banks;
    const auto [paired, unpaired] = split_paired_unpaired(result.last_assignment);
    EXPECT_EQ(banks.paired.size(), paired.size());
    EXPECT_EQ(banks.unpaired.size(), unpaired.size());
    std::set<std::size_t> singles;
    for (auto c : unpaired) singles.insert(result.last_assignment.clusters()[c][0]);
    for (const auto& batch : result.batches) {
      if (batch.epoch != epochs) continue;
      for (auto q : batch.queries) EXPECT_FALSE(singles.count(q)) << "unpaired instance " << q << " used as query";
    }
  }
}

TEST(Train, NoPairedClustersInFirstEpochThrows) {
  // Every instance in one scene: nothing can ever be linked.
  Matrix x(4, 3);
  x << 1, 0, 0, 0, 1, 0, 0, 0, 1, 0.6, 0.8, 0;
  const auto cat = SceneCatalog::from_image_of({0, 0, 0, 0});
  try {
    train(x, cat, quick_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoPairedClusters);
  }
}

TEST(Optimizer, ParsesNames) {
  EXPECT_EQ(parse_optimizer("sgd"), Optimizer::Sgd);
  EXPECT_EQ(parse_optimizer("adam"), Optimizer::Adam);
  EXPECT_THROW(parse_optimizer("rmsprop"), Error);
}
