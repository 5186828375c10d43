#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "aero/kto.hpp"

using namespace aero;

namespace {

EngineConfig test_config(double beta = 0.1, double lp = 1.0, double ln = 1.0) {
  EngineConfig c;
  c.kto_beta = beta;
  c.lambda_pos = lp;
  c.lambda_neg = ln;
  return c;
}

ScoredRecord scored(int label, double logp_policy, double logp_ref) {
  ScoredRecord r;
  r.record.label = label;
  r.record.role = label == 1 ? RecordRole::solver : RecordRole::generator;
  r.logp_policy = logp_policy;
  r.logp_ref = logp_ref;
  return r;
}

// Long-double recomputation, independent of the implementation path.
long double value_oracle(int label, long double reward, long double z0, long double beta,
                         long double lambda_p, long double lambda_n) {
  auto sigma = [](long double x) { return 1.0L / (1.0L + std::exp(-x)); };
  if (label == 1) return lambda_p * sigma(beta * (reward - z0));
  return lambda_n * sigma(beta * (z0 - reward));
}

}  // namespace

TEST_CASE("implied reward is the log-likelihood ratio") {
  CHECK(implied_reward(scored(1, -5.0, -5.0)) == 0.0);
  CHECK(implied_reward(scored(1, -4.0, -5.0)) == 1.0);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-30.0, 0.0);
  for (int i = 0; i < 500; ++i) {
    double a = dist(rng);
    double b = dist(rng);
    CHECK(implied_reward(scored(1, a, b)) == Catch::Approx(a - b).margin(1e-12));
  }
}

TEST_CASE("implied reward rejects non-finite inputs") {
  CHECK_THROWS_AS(implied_reward(scored(1, std::nan(""), 0.0)), numeric_error);
  CHECK_THROWS_AS(implied_reward(scored(1, 0.0, -INFINITY)), numeric_error);
}

TEST_CASE("value at the reference point is half the class weight") {
  auto config = test_config();
  CHECK(kto_value(scored(1, -5.0, -5.0), 0.0, config) == 0.5);
  CHECK(kto_value(scored(0, -5.0, -5.0), 0.0, config) == 0.5);
  auto weighted = test_config(0.1, 2.0, 0.25);
  CHECK(kto_value(scored(1, -5.0, -5.0), 0.0, weighted) == 1.0);
  CHECK(kto_value(scored(0, -5.0, -5.0), 0.0, weighted) == 0.125);
}

TEST_CASE("value saturates at lambda for a large reward gap") {
  auto config = test_config(0.1);
  // reward - z0 = 10/beta, so the logistic argument is exactly 10.
  double v = kto_value(scored(1, 100.0, 0.0), 0.0, config);
  CHECK(v == Catch::Approx(0.9999546021312976).margin(1e-12));
}

TEST_CASE("values stay strictly inside (0, lambda) for finite inputs") {
  // |beta * gap| is kept below ~37 where the logistic is still strictly
  // inside (0, 1) in double precision.
  auto config = test_config(0.1, 1.5, 0.5);
  for (double reward : {-300.0, -5.0, 0.0, 5.0, 300.0}) {
    double vp = kto_value(scored(1, reward, 0.0), 0.0, config);
    CHECK(vp > 0.0);
    CHECK(vp < 1.5);
    double vn = kto_value(scored(0, reward, 0.0), 0.0, config);
    CHECK(vn > 0.0);
    CHECK(vn < 0.5);
  }
}

TEST_CASE("loss on a single record at the reference point") {
  auto config = test_config();
  std::vector<ScoredRecord> batch = {scored(1, -2.0, -2.0)};
  CHECK(kto_loss(batch, 0.0, config) == 0.5);
}

TEST_CASE("loss vanishes for saturated desirable records") {
  auto config = test_config();
  std::vector<ScoredRecord> batch = {scored(1, 500.0, 0.0), scored(1, 600.0, 0.0)};
  CHECK(kto_loss(batch, 0.0, config) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("loss rejects an empty batch") {
  auto config = test_config();
  std::vector<ScoredRecord> empty;
  CHECK_THROWS_AS(kto_loss(empty, 0.0, config), numeric_error);
  CHECK_THROWS_AS(estimate_z0(empty), numeric_error);
}

TEST_CASE("loss matches a scalar recomputation on random batches") {
  auto config = test_config(0.3, 1.25, 0.75);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> logp(-40.0, 0.0);
  std::vector<ScoredRecord> batch;
  for (int i = 0; i < 1000; ++i)
    batch.push_back(scored(i % 3 == 0 ? 0 : 1, logp(rng), logp(rng)));
  double z0 = estimate_z0(batch);
  long double expected = 0.0L;
  for (const auto& rec : batch) {
    long double lambda = rec.record.label == 1 ? config.lambda_pos : config.lambda_neg;
    expected += lambda - value_oracle(rec.record.label, rec.logp_policy - rec.logp_ref, z0,
                                      config.kto_beta, config.lambda_pos, config.lambda_neg);
  }
  expected /= batch.size();
  CHECK(kto_loss(batch, z0, config) == Catch::Approx(static_cast<double>(expected)).margin(1e-12));
}

TEST_CASE("reference point estimate is the non-negative mean reward") {
  std::vector<ScoredRecord> zeros = {scored(1, -1.0, -1.0), scored(0, -2.0, -2.0)};
  CHECK(estimate_z0(zeros) == 0.0);
  std::vector<ScoredRecord> clamped = {scored(1, 1.0, 0.0), scored(1, -3.0, 0.0)};
  CHECK(estimate_z0(clamped) == 0.0);  // mean is -1, floored at 0
  std::vector<ScoredRecord> positive = {scored(1, 2.0, 0.0), scored(1, 4.0, 0.0)};
  CHECK(estimate_z0(positive) == 3.0);
}

TEST_CASE("value is monotone in the policy log-probability") {
  auto config = test_config(0.2);
  const double eps = 1e-5;
  for (double base : {-10.0, -3.0, 0.5, 4.0}) {
    double up = kto_value(scored(1, base + eps, -1.0), 0.3, config);
    double down = kto_value(scored(1, base - eps, -1.0), 0.3, config);
    CHECK(up > down);
    double nup = kto_value(scored(0, base + eps, -1.0), 0.3, config);
    double ndown = kto_value(scored(0, base - eps, -1.0), 0.3, config);
    CHECK(nup < ndown);
  }
}

TEST_CASE("raising a desirable record's policy likelihood lowers the loss") {
  auto config = test_config();
  std::vector<ScoredRecord> batch = {scored(1, -4.0, -4.0), scored(0, -2.0, -3.0)};
  double before = kto_loss(batch, 0.0, config);
  batch[0].logp_policy += 0.5;
  double after = kto_loss(batch, 0.0, config);
  CHECK(after < before);
}

TEST_CASE("doubling beta halves the reward gap needed for the same value") {
  auto config1 = test_config(0.17);
  auto config2 = test_config(0.34);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> gap(-64.0, 64.0);
  for (int i = 0; i < 200; ++i) {
    double delta = gap(rng);
    double v1 = kto_value(scored(1, delta, 0.0), 0.0, config1);
    double v2 = kto_value(scored(1, delta / 2.0, 0.0), 0.0, config2);
    CHECK(v1 == Catch::Approx(v2).margin(1e-12));
  }
}
