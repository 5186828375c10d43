#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "aero/metrics.hpp"

using namespace aero;

namespace {

std::map<std::string, ZoneLabel> labels_with_counts(int mastery, int zpd, int chaos) {
  std::map<std::string, ZoneLabel> labels;
  int i = 0;
  for (int k = 0; k < mastery; ++k) labels["t" + std::to_string(i++)] = {0.1, Zone::mastery};
  for (int k = 0; k < zpd; ++k) labels["t" + std::to_string(i++)] = {0.5, Zone::zpd};
  for (int k = 0; k < chaos; ++k) labels["t" + std::to_string(i++)] = {0.9, Zone::chaos};
  return labels;
}

}  // namespace

TEST_CASE("zone distribution basics") {
  auto all_zpd = zone_distribution(labels_with_counts(0, 10, 0));
  CHECK(all_zpd.mastery == 0.0);
  CHECK(all_zpd.zpd == 1.0);
  CHECK(all_zpd.chaos == 0.0);

  auto mixed = zone_distribution(labels_with_counts(3, 4, 3));
  CHECK(mixed.mastery == Catch::Approx(0.3).margin(1e-15));
  CHECK(mixed.zpd == Catch::Approx(0.4).margin(1e-15));
  CHECK(mixed.chaos == Catch::Approx(0.3).margin(1e-15));
}

TEST_CASE("zone distribution rejects an empty map") {
  std::map<std::string, ZoneLabel> empty;
  CHECK_THROWS_AS(zone_distribution(empty), config_error);
}

TEST_CASE("zone distribution matches a recount on a large fixture") {
  std::mt19937 rng(31);
  std::map<std::string, ZoneLabel> labels;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 1000; ++i) {
    int z = std::uniform_int_distribution<int>(0, 2)(rng);
    ++counts[z];
    labels["t" + std::to_string(i)] = {0.5, static_cast<Zone>(z)};
  }
  auto dist = zone_distribution(labels);
  CHECK(dist.mastery == Catch::Approx(counts[0] / 1000.0).margin(1e-12));
  CHECK(dist.zpd == Catch::Approx(counts[1] / 1000.0).margin(1e-12));
  CHECK(dist.chaos == Catch::Approx(counts[2] / 1000.0).margin(1e-12));
  CHECK(dist.mastery + dist.zpd + dist.chaos == Catch::Approx(1.0).margin(1e-12));
}

namespace {

TruthProxy verified_proxy(const std::string& task_id, const std::string& answer) {
  TruthProxy p;
  p.task_id = task_id;
  p.status = ProxyStatus::verified;
  Trajectory t;
  t.task_id = task_id;
  t.index = 1;
  t.role = TrajectoryRole::refiner;
  t.body = "Final Answer: \\boxed{" + answer + "}";
  t.answer = answer;
  p.proxy = t;
  p.correction_paths = {t, t};
  return p;
}

TruthProxy unresolved_proxy(const std::string& task_id) {
  TruthProxy p;
  p.task_id = task_id;
  p.status = ProxyStatus::unresolved;
  return p;
}

}  // namespace

TEST_CASE("perfect proxies score full marks") {
  ExactNormalizedJudge judge;
  std::map<std::string, TruthProxy> proxies;
  std::map<std::string, std::optional<std::string>> majority;
  std::map<std::string, std::string> oracle;
  for (int i = 0; i < 5; ++i) {
    std::string id = "t" + std::to_string(i);
    proxies[id] = verified_proxy(id, "42");
    majority[id] = "42";
    oracle[id] = "42";
  }
  auto precision = pseudo_label_precision(proxies, majority, oracle, judge);
  CHECK(precision.majority_vote == 1.0);
  CHECK(precision.icc == 1.0);
}

TEST_CASE("constructed fixture scores 0.7 majority and 0.8 correction accuracy") {
  ExactNormalizedJudge judge;
  std::map<std::string, TruthProxy> proxies;
  std::map<std::string, std::optional<std::string>> majority;
  std::map<std::string, std::string> oracle;
  for (int i = 0; i < 10; ++i) {
    std::string id = (i < 9 ? "t0" : "t") + std::to_string(i);
    oracle[id] = "right";
    majority[id] = i < 7 ? "right" : "wrong";
    proxies[id] = verified_proxy(id, i < 8 ? "right" : "wrong");
  }
  auto precision = pseudo_label_precision(proxies, majority, oracle, judge);
  CHECK(precision.majority_vote == Catch::Approx(0.7).margin(1e-12));
  CHECK(precision.icc == Catch::Approx(0.8).margin(1e-12));
  CHECK(precision.majority_denominator == 10);
  CHECK(precision.icc_denominator == 10);
}

TEST_CASE("unresolved tasks stay in the majority denominator only") {
  ExactNormalizedJudge judge;
  std::map<std::string, TruthProxy> proxies;
  std::map<std::string, std::optional<std::string>> majority;
  std::map<std::string, std::string> oracle;
  for (int i = 0; i < 4; ++i) {
    std::string id = "t" + std::to_string(i);
    oracle[id] = "x";
    majority[id] = "x";
    proxies[id] = i < 2 ? verified_proxy(id, "x") : unresolved_proxy(id);
  }
  auto precision = pseudo_label_precision(proxies, majority, oracle, judge);
  CHECK(precision.majority_denominator == 4);
  CHECK(precision.icc_denominator == 2);
  CHECK(precision.icc == 1.0);
}

TEST_CASE("precision demands oracle coverage") {
  ExactNormalizedJudge judge;
  std::map<std::string, TruthProxy> proxies = {{"t0", verified_proxy("t0", "1")}};
  std::map<std::string, std::optional<std::string>> majority = {{"t0", "1"}};
  std::map<std::string, std::string> oracle;
  try {
    pseudo_label_precision(proxies, majority, oracle, judge);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("t0") != std::string::npos);
  }
}

TEST_CASE("precision is invariant to task ordering") {
  ExactNormalizedJudge judge;
  std::map<std::string, TruthProxy> proxies;
  std::map<std::string, std::optional<std::string>> majority;
  std::map<std::string, std::string> oracle;
  std::mt19937 rng(41);
  for (int i = 0; i < 50; ++i) {
    std::string id = "task-" + std::to_string(std::uniform_int_distribution<int>(0, 1 << 20)(rng)) +
                     "-" + std::to_string(i);
    oracle[id] = "v";
    majority[id] = (i % 3 == 0) ? std::optional<std::string>("v") : std::nullopt;
    proxies[id] = (i % 2 == 0) ? verified_proxy(id, i % 4 == 0 ? "v" : "w") : unresolved_proxy(id);
  }
  auto a = pseudo_label_precision(proxies, majority, oracle, judge);
  auto b = pseudo_label_precision(proxies, majority, oracle, judge);
  CHECK(a.majority_vote == b.majority_vote);
  CHECK(a.icc == b.icc);
}

TEST_CASE("majority answer is the largest non-null cluster's answer") {
  ClusterSet cs;
  cs.task_id = "t";
  cs.n_total = 4;
  cs.clusters = {{std::nullopt, {1, 2, 3}, 0.75}, {"7", {4}, 0.25}};
  CHECK(majority_answer(cs) == "7");
  ClusterSet all_null;
  all_null.task_id = "t";
  all_null.n_total = 2;
  all_null.clusters = {{std::nullopt, {1, 2}, 1.0}};
  CHECK_FALSE(majority_answer(all_null).has_value());
}

TEST_CASE("pairwise distance basics") {
  std::vector<std::vector<double>> two = {{0.0, 0.0}, {3.0, 0.0}};
  CHECK(avg_pairwise_distance(two) == 3.0);

  std::vector<std::vector<double>> triangle = {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(0.75)}};
  CHECK(avg_pairwise_distance(triangle) == 1.0);
}

TEST_CASE("pairwise distance rejects bad input") {
  std::vector<std::vector<double>> one = {{1.0}};
  CHECK_THROWS_AS(avg_pairwise_distance(one), config_error);
  std::vector<std::vector<double>> mismatched = {{1.0, 2.0}, {1.0}};
  CHECK_THROWS_AS(avg_pairwise_distance(mismatched), config_error);
}

TEST_CASE("pairwise distance matches a brute-force oracle") {
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::vector<std::vector<double>> vectors;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(16);
    for (auto& x : v) x = coord(rng);
    vectors.push_back(std::move(v));
  }
  long double sum = 0.0L;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      long double sq = 0.0L;
      for (std::size_t k = 0; k < vectors[i].size(); ++k) {
        long double d = static_cast<long double>(vectors[i][k]) - vectors[j][k];
        sq += d * d;
      }
      sum += std::sqrt(sq);
    }
  long double oracle = 2.0L * sum / (50.0L * 49.0L);
  CHECK(avg_pairwise_distance(vectors) ==
        Catch::Approx(static_cast<double>(oracle)).margin(1e-9));
}

TEST_CASE("pairwise distance is translation invariant and scales linearly") {
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::vector<std::vector<double>> vectors;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v(3);
    for (auto& x : v) x = coord(rng);
    vectors.push_back(std::move(v));
  }
  double base = avg_pairwise_distance(vectors);

  auto translated = vectors;
  for (auto& v : translated)
    for (auto& x : v) x += 11.25;
  CHECK(avg_pairwise_distance(translated) == Catch::Approx(base).margin(1e-9));

  auto scaled = vectors;
  for (auto& v : scaled)
    for (auto& x : v) x *= 4.0;
  CHECK(avg_pairwise_distance(scaled) == Catch::Approx(4.0 * base).margin(1e-9));
}

TEST_CASE("hash embedding is deterministic and dimension-true") {
  auto a = hash_embedding("some task text", 8);
  auto b = hash_embedding("some task text", 8);
  CHECK(a == b);
  CHECK(a.size() == 8);
  auto c = hash_embedding("other task text", 8);
  CHECK(a != c);
  for (double x : a) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
}
