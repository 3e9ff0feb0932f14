#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "fairbound/data.hpp"
#include "fairbound/learn.hpp"

using namespace fairbound;

TEST_CASE("regulator geometric growth and tie rule") {
  RegulatorState state;
  double lambda = 1.0;
  for (int i = 0; i < 3; ++i) {
    lambda = regulator_update(lambda, 0.5, 0.0, state, 1e-3, 1e6);
  }
  CHECK(lambda == doctest::Approx(1000.0));

  RegulatorState tie_state;
  CHECK(regulator_update(1.0, 0.0, 0.0, tie_state, 1e-3, 1e6) ==
        doctest::Approx(0.1));  // tie counts as satisfied

  RegulatorState clamp_state;
  CHECK(regulator_update(1e6, 1.0, 0.0, clamp_state, 1e-3, 1e6) == 1e6);
  CHECK(regulator_update(1e-3, -1.0, 0.0, clamp_state, 1e-3, 1e6) == 1e-3);
}

TEST_CASE("regulator factor shrinks on sign flips") {
  RegulatorState state;
  double lambda = 1.0;
  double prev_factor = 10.0;
  // alternate violated / satisfied
  for (int round = 0; round < 6; ++round) {
    const double mmd2 = round % 2 == 0 ? 1.0 : -1.0;
    lambda = regulator_update(lambda, mmd2, 0.0, state, 1e-3, 1e6);
    if (round >= 1) {
      CHECK(state.factor == doctest::Approx(std::max(
                                std::sqrt(prev_factor), 1.1)));
    }
    prev_factor = state.factor;
  }
  CHECK(state.factor >= 1.1);
}

TEST_CASE("unregularized autoencoder reduces reconstruction loss") {
  const Dataset d = synth_correlated(600, 0.5, 0.5, 0.5, 21);
  TrainConfig cfg;
  cfg.rep_dim = 8;
  cfg.rounds = 4;
  cfg.epochs_per_round = 2;
  cfg.batch_size = 128;
  cfg.lambda_init = 1e-3;  // clamp floor; stays there because mmd2 is tiny
  cfg.lambda_min = 1e-3;
  cfg.seed = 2;
  // force the regularizer off by the clamp range
  cfg.lambda_max = 1e-3;
  const EncoderModel model = train_fair_encoder(d, cfg);
  REQUIRE(model.history.size() == 4);
  CHECK(model.history.back().pretext_loss <
        model.history.front().pretext_loss);
  for (const auto& row : model.history) {
    CHECK(row.lambda >= cfg.lambda_min);
    CHECK(row.lambda <= cfg.lambda_max);
  }
}

TEST_CASE("training is reproducible under a fixed seed") {
  const Dataset d = synth_correlated(300, 0.6, 0.4, 0.5, 8);
  TrainConfig cfg;
  cfg.rep_dim = 4;
  cfg.rounds = 2;
  cfg.epochs_per_round = 1;
  cfg.batch_size = 64;
  cfg.seed = 5;
  const EncoderModel a = train_fair_encoder(d, cfg);
  const EncoderModel b = train_fair_encoder(d, cfg);
  for (size_t l = 0; l < a.enc.W.size(); ++l) {
    CHECK((a.enc.W[l] - b.enc.W[l]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(a.history.back().mmd2 == b.history.back().mmd2);
}

TEST_CASE("features independent of s stay fair without pressure") {
  // features carry no group signal at all; the encoder cannot leak s
  std::mt19937 rng(33);
  std::normal_distribution<double> g;
  Dataset d;
  d.features = Eigen::MatrixXd(400, 4);
  for (long i = 0; i < d.features.size(); ++i) d.features.data()[i] = g(rng);
  d.sensitive.resize(400);
  std::vector<int> y(400);
  std::bernoulli_distribution bern(0.5);
  for (long i = 0; i < 400; ++i) {
    d.sensitive[static_cast<size_t>(i)] = bern(rng) ? 1 : 0;
    y[static_cast<size_t>(i)] = bern(rng) ? 1 : 0;
  }
  d.targets.emplace_back("y", std::move(y));
  TrainConfig cfg;
  cfg.rep_dim = 4;
  cfg.rounds = 3;
  cfg.epochs_per_round = 2;
  cfg.batch_size = 100;
  cfg.seed = 3;
  const EncoderModel model = train_fair_encoder(d, cfg);
  // population MMD^2 is 0; allow generous sampling noise at n=400
  CHECK(std::abs(model.history.back().mmd2) < 0.01);
}

TEST_CASE("probe estimates on synthetic extremes") {
  std::mt19937 rng(55);
  std::bernoulli_distribution bern(0.5);
  const long n = 2000;
  std::vector<int> labels(n);
  for (long i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = bern(rng);

  SUBCASE("representation identical across groups: alpha near 0") {
    std::normal_distribution<double> g;
    Eigen::MatrixXd reps(n, 3);
    for (long i = 0; i < reps.size(); ++i) reps.data()[i] = g(rng);
    const auto est = estimate_alpha(reps, labels);
    CHECK(est.ba == doctest::Approx(0.5).epsilon(0.1));
    CHECK(est.coefficient <= 0.1);
  }
  SUBCASE("representation equals the label: alpha near 1, beta near 0") {
    Eigen::MatrixXd reps(n, 1);
    for (long i = 0; i < n; ++i) {
      reps(i, 0) = labels[static_cast<size_t>(i)];
    }
    const auto alpha = estimate_alpha(reps, labels);
    CHECK(alpha.ba >= 0.99);
    CHECK(alpha.coefficient >= 0.98);
    const auto beta = estimate_beta(reps, labels);
    CHECK(beta.coefficient <= 0.02);
  }
  SUBCASE("representation independent of the label: beta near 1") {
    std::normal_distribution<double> g;
    Eigen::MatrixXd reps(n, 2);
    for (long i = 0; i < reps.size(); ++i) reps.data()[i] = g(rng);
    const auto beta = estimate_beta(reps, labels);
    CHECK(beta.ba == doctest::Approx(0.5).epsilon(0.1));
    CHECK(beta.coefficient >= 0.8);
  }
}

TEST_CASE("probe rejects degenerate label sets") {
  Eigen::MatrixXd reps = Eigen::MatrixXd::Random(20, 2);
  std::vector<int> ones(20, 1);
  CHECK_THROWS_AS(train_probe(reps, ones, {}), EmptyGroup);
  std::vector<int> bad(20, 0);
  bad[3] = 2;
  CHECK_THROWS_AS(train_probe(reps, bad, {}), MalformedData);
}

TEST_CASE("history CSV serialization") {
  const std::string path = "history_test.csv";
  write_history_csv(path, {{1, 0.5, 0.01, 1.0}, {2, 0.4, -0.001, 10.0}});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "round,pretext_loss,mmd2,lambda");
  std::getline(in, line);
  CHECK(line.substr(0, 2) == "1,");
  in.close();
  std::remove(path.c_str());
}
