#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "aero/core.hpp"
#include "aero/detail/sha256.hpp"
#include "aero/serde.hpp"

using namespace aero;

namespace {

// Small well-formed round: two tasks, one fully processed.
RoundState make_fixture() {
  RoundState state;
  state.round = 1;
  state.config_hash = "cfg";
  state.rng_seed = 7;

  Task a{task_id_for(1, "q-a"), 1, "q-a", {{"domain", "math"}}, TaskOrigin::synthetic};
  Task b{task_id_for(1, "q-b"), 1, "q-b", {}, TaskOrigin::synthetic};
  state.tasks = {a, b};

  state.trajectories = {
      {a.id, 1, "... \\boxed{4}", "4", TrajectoryRole::solver},
      {a.id, 2, "... \\boxed{4}", "4", TrajectoryRole::solver},
      {a.id, 3, "... \\boxed{5}", "5", TrajectoryRole::solver},
  };

  ClusterSet cs;
  cs.task_id = a.id;
  cs.n_total = 3;
  cs.clusters = {{"4", {1, 2}, 2.0 / 3.0}, {"5", {3}, 1.0 / 3.0}};
  state.cluster_sets = {cs};

  state.zone_labels[a.id] = {0.4, Zone::zpd};
  state.zone_labels[b.id] = {0.1, Zone::mastery};

  Trajectory c1{a.id, 1, "Final Answer: \\boxed{4}", "4", TrajectoryRole::refiner};
  Trajectory c2{a.id, 2, "Final Answer: \\boxed{4}", "4", TrajectoryRole::refiner};
  TruthProxy proxy{a.id, ProxyStatus::verified, c1, {c1, c2}};
  state.proxies[a.id] = proxy;

  state.generator_dataset = {
      {RecordRole::generator, 1, a.id, "ctx", "q-a", 1, 1.0},
      {RecordRole::generator, 1, b.id, "ctx", "q-b", 0, 1.0},
  };
  state.refiner_dataset = {
      {RecordRole::refiner, 1, a.id, "ctx", "fix", 1, 1.0},
  };
  return state;
}

}  // namespace

TEST_CASE("sha256 matches FIPS 180-4 vectors") {
  CHECK(detail::sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(detail::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(detail::sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  std::string million(1000000, 'a');
  CHECK(detail::sha256_hex(million) ==
        "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("task ids are content addressed") {
  CHECK(task_id_for(1, "q") == task_id_for(1, "q"));
  CHECK(task_id_for(1, "q") != task_id_for(2, "q"));
  CHECK(task_id_for(1, "q") != task_id_for(1, "p"));
  CHECK(task_id_for(1, "q").size() == 16);
}

TEST_CASE("validate_round_state accepts a well-formed fixture") {
  CHECK(validate_round_state(make_fixture()).empty());
}

TEST_CASE("validate_round_state flags a dangling trajectory reference") {
  auto state = make_fixture();
  state.trajectories.push_back({"feedbeef00000000", 1, "x", std::nullopt, TrajectoryRole::solver});
  auto violations = validate_round_state(state);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("unknown task") != std::string::npos);
}

TEST_CASE("validate_round_state flags cluster sizes that miss one member") {
  auto state = make_fixture();
  // Drop one member but leave n_total alone: sizes now sum to n_total - 1.
  state.cluster_sets[0].clusters[0].member_indices.pop_back();
  state.cluster_sets[0].clusters[0].frequency = 1.0 / 3.0;
  auto violations = validate_round_state(state);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("sum to 2") != std::string::npos);
}

TEST_CASE("validate_round_state flags non-positive refiner labels") {
  auto state = make_fixture();
  state.refiner_dataset[0].label = 0;
  auto violations = validate_round_state(state);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("refiner") != std::string::npos);
}

TEST_CASE("round state serializes and deserializes to an equal value") {
  auto state = make_fixture();
  REQUIRE(validate_round_state(state).empty());
  nlohmann::json j = state;
  auto back = j.get<RoundState>();
  CHECK(back == state);

  // Round-trip through text too, since that is what lands on disk.
  auto reparsed = nlohmann::json::parse(j.dump()).get<RoundState>();
  CHECK(reparsed == state);
}

TEST_CASE("cluster frequencies sum to one") {
  auto state = make_fixture();
  for (const auto& cs : state.cluster_sets) {
    double sum = 0.0;
    for (const auto& c : cs.clusters) sum += c.frequency;
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("engine config validation") {
  EngineConfig config;
  CHECK_NOTHROW(config.validate());
  SECTION("bad thresholds") {
    config.zpd_low = 0.8;
    config.zpd_high = 0.3;
    CHECK_THROWS_AS(config.validate(), config_error);
  }
  SECTION("n too small") {
    config.samples_per_task = 1;
    CHECK_THROWS_AS(config.validate(), config_error);
  }
  SECTION("beta must be positive") {
    config.kto_beta = 0.0;
    CHECK_THROWS_AS(config.validate(), config_error);
  }
}

TEST_CASE("config digest is stable and sensitive") {
  EngineConfig a;
  EngineConfig b;
  CHECK(config_digest(a) == config_digest(b));
  b.samples_per_task = 8;
  CHECK(config_digest(a) != config_digest(b));
}
