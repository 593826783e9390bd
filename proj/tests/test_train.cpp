#include "doctest.h"

#include <Eigen/Core>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "gtsd/train.hpp"

using namespace gtsd;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::bad_format;
}

std::vector<std::vector<std::string>> bundled_corpus() {
  std::ifstream in(GTSD_CORPUS_PATH);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> corpus;
  std::string line;
  while (std::getline(in, line)) {
    auto words = split_tokens(line);
    if (!words.empty()) corpus.push_back(std::move(words));
  }
  REQUIRE(corpus.size() > 100);
  return corpus;
}

DiffusionModel tiny_model() {
  DiffusionModel m;
  m.vocab = Vocab({"v0", "v1", "v2", "v3", "v4"});
  m.embedding.resize(5, 1);
  m.embedding << 0.9, -0.8, 0.5, -0.3, 0.2;
  m.sched = build_schedule(10);
  CounterRng rng(55, "init");
  m.denoiser = Denoiser::init(DenoiserConfig{1, 1, 1, 2, 0}, rng);
  m.L = 10;
  return m;
}

std::vector<std::vector<std::string>> inline_corpus() {
  std::vector<std::vector<std::string>> corpus;
  const std::vector<std::string> nouns{"cat", "dog", "bird", "fox"};
  const std::vector<std::string> verbs{"runs", "sleeps", "sings"};
  const std::vector<std::string> tails{"today", "quietly", "alone", "outside"};
  for (size_t a = 0; a < nouns.size(); ++a)
    for (size_t b = 0; b < verbs.size(); ++b)
      corpus.push_back({"the", nouns[a], verbs[b], tails[(a + b) % 4], tails[(a + 2 * b + 1) % 4]});
  return corpus;
}

}  // namespace

TEST_CASE("zero network reduces the loss to its closed form") {
  DiffusionModel m = tiny_model();
  m.denoiser = Denoiser(DenoiserConfig{1, 1, 1, 2, 0});  // all parameters zero
  const std::vector<std::string> sentence{"v0", "v1", "v2", "v3", "v4"};
  const int t = 6;
  Eigen::MatrixXd eps(5, 1);
  eps << 0.3, -1.1, 0.7, 0.4, -0.9;

  const LossProbe probe = training_loss(m, sentence, t, eps);
  const double ab = m.sched.alpha_bar(t);
  // eps_hat = 0, so x0_hat = x_t / sqrt(ab); prompt rows are masked out and
  // the rest leave (1-ab)/ab * |eps_j|^2 each.
  const double want = (1.0 - ab) / ab * (0.4 * 0.4 + 0.9 * 0.9) / 2.0;
  CHECK(probe.loss == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("training_loss gradients match central differences on 9 parameters") {
  DiffusionModel m = tiny_model();
  REQUIRE(m.denoiser.param_count() == 9);
  const std::vector<std::string> sentence{"v0", "v3", "v1", "v4"};
  const int t = 7;
  CounterRng rng(56, "eps");
  Eigen::MatrixXd eps(4, 1);
  for (int j = 0; j < 4; ++j) eps(j, 0) = rng.next_gaussian();

  const LossProbe probe = training_loss(m, sentence, t, eps);
  REQUIRE(probe.grad_theta.size() == 9);

  for (Eigen::Index p = 0; p < 9; ++p) {
    const double h = 1e-5 * std::max(1.0, std::abs(m.denoiser.theta()[p]));
    const double orig = m.denoiser.theta()[p];
    m.denoiser.theta()[p] = orig + h;
    const double up = training_loss(m, sentence, t, eps).loss;
    m.denoiser.theta()[p] = orig - h;
    const double down = training_loss(m, sentence, t, eps).loss;
    m.denoiser.theta()[p] = orig;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(probe.grad_theta[p]), 1e-8});
    CHECK(std::abs(fd - probe.grad_theta[p]) / denom < 1e-4);
  }
}

TEST_CASE("embedding gradients cover clamped, noised, and repeated tokens") {
  DiffusionModel m = tiny_model();
  // v1 appears both inside the prompt and in the predicted span.
  const std::vector<std::string> sentence{"v0", "v1", "v2", "v1", "v4", "v3"};
  const int t = 4;
  CounterRng rng(57, "eps");
  Eigen::MatrixXd eps(6, 1);
  for (int j = 0; j < 6; ++j) eps(j, 0) = rng.next_gaussian();

  const LossProbe probe = training_loss(m, sentence, t, eps);
  REQUIRE(probe.grad_embedding.rows() == 5);
  REQUIRE(probe.grad_embedding.cols() == 1);

  for (Eigen::Index v = 0; v < 5; ++v) {
    const double h = 1e-6;
    const double orig = m.embedding(v, 0);
    m.embedding(v, 0) = orig + h;
    const double up = training_loss(m, sentence, t, eps).loss;
    m.embedding(v, 0) = orig - h;
    const double down = training_loss(m, sentence, t, eps).loss;
    m.embedding(v, 0) = orig;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(probe.grad_embedding(v, 0)), 1e-8});
    CHECK(std::abs(fd - probe.grad_embedding(v, 0)) / denom < 1e-4);
  }
}

TEST_CASE("training_loss validation") {
  DiffusionModel m = tiny_model();
  Eigen::MatrixXd eps = Eigen::MatrixXd::Zero(4, 1);
  CHECK(code_of([&] { training_loss(m, {"v0", "v1", "v2", "zebra"}, 3, eps); }) ==
        Errc::unknown_token);
  CHECK(code_of([&] { training_loss(m, {"v0", "v1", "v2"}, 3, Eigen::MatrixXd::Zero(3, 1)); }) ==
        Errc::bad_format);
  CHECK(code_of([&] { training_loss(m, {"v0", "v1", "v2", "v3"}, 3, Eigen::MatrixXd::Zero(5, 1)); }) ==
        Errc::shape_mismatch);
  CHECK(code_of([&] { training_loss(m, {"v0", "v1", "v2", "v3"}, 11, eps); }) ==
        Errc::step_out_of_range);
}

TEST_CASE("train is reproducible from its seed") {
  const auto corpus = inline_corpus();
  TrainConfig cfg;
  cfg.net = DenoiserConfig{4, 8, 1, 4, 4};
  cfg.schedule_steps = 50;
  cfg.L = 12;
  cfg.epochs = 4;
  cfg.batch = 4;

  const DiffusionModel a = train(corpus, cfg, 99);
  const DiffusionModel b = train(corpus, cfg, 99);
  const DiffusionModel c = train(corpus, cfg, 100);
  CHECK(a.denoiser.theta() == b.denoiser.theta());
  CHECK(a.embedding == b.embedding);
  CHECK(a.denoiser.theta() != c.denoiser.theta());
}

TEST_CASE("zero learning rate leaves the initialization untouched") {
  const auto corpus = inline_corpus();
  TrainConfig cfg;
  cfg.net = DenoiserConfig{4, 8, 1, 4, 4};
  cfg.schedule_steps = 50;
  cfg.L = 12;
  cfg.batch = 4;

  TrainConfig frozen = cfg;
  frozen.epochs = 3;
  frozen.lr = 0.0;
  cfg.epochs = 0;

  const DiffusionModel init = train(corpus, cfg, 7);
  const DiffusionModel after = train(corpus, frozen, 7);
  CHECK(init.denoiser.theta() == after.denoiser.theta());
  CHECK(init.embedding == after.embedding);
}

TEST_CASE("trained embedding rows stay unit norm") {
  const auto corpus = inline_corpus();
  TrainConfig cfg;
  cfg.net = DenoiserConfig{4, 8, 1, 4, 4};
  cfg.schedule_steps = 50;
  cfg.L = 12;
  cfg.epochs = 3;
  cfg.batch = 4;
  const DiffusionModel m = train(corpus, cfg, 13);
  for (Eigen::Index r = 0; r < m.embedding.rows(); ++r) {
    CHECK(std::abs(m.embedding.row(r).norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("vocabulary keeps first-appearance order") {
  const auto corpus = inline_corpus();
  TrainConfig cfg;
  cfg.net = DenoiserConfig{4, 8, 1, 4, 4};
  cfg.schedule_steps = 50;
  cfg.L = 12;
  cfg.epochs = 0;
  const DiffusionModel m = train(corpus, cfg, 1);
  CHECK(m.vocab.token(0) == "the");
  CHECK(m.vocab.token(1) == "cat");
  CHECK(m.vocab.token(2) == "runs");
}

TEST_CASE("loss declines over twenty epochs on the bundled corpus") {
  const auto corpus = bundled_corpus();
  TrainConfig cfg;
  cfg.epochs = 21;
  std::vector<double> losses;
  const DiffusionModel m = train(corpus, cfg, 42, &losses);
  REQUIRE(losses.size() == 21);
  for (double v : losses) CHECK(v > 0.0);
  CHECK(losses[20] < losses[0]);
  // The decline is substantial, not a rounding artifact.
  CHECK(losses[20] < 0.5 * losses[0]);
  CHECK(m.vocab.size() > 100);
}

TEST_CASE("train validation") {
  TrainConfig cfg;
  cfg.net = DenoiserConfig{4, 8, 1, 4, 4};
  cfg.schedule_steps = 50;
  cfg.L = 12;
  CHECK(code_of([&] { train({}, cfg, 1); }) == Errc::empty_corpus);
  CHECK(code_of([&] { train({{"a", "b", "c"}}, cfg, 1); }) == Errc::bad_format);
  CHECK(code_of([&] {
          train({{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m"}}, cfg, 1);
        }) == Errc::length_overflow);
  TrainConfig bad = cfg;
  bad.epochs = -1;
  CHECK(code_of([&] { train({{"a", "b", "c", "d"}}, bad, 1); }) == Errc::bad_range);
}
