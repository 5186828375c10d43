#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <string>
#include <vector>

#include "aero/synthesis.hpp"
#include "aero/zpd.hpp"

using namespace aero;

namespace {

EngineConfig test_config() {
  EngineConfig c;
  c.lambda_pos = 1.0;
  c.lambda_neg = 1.0;
  return c;
}

Task make_task(const std::string& id, int round = 1) {
  return Task{id, round, "question for " + id, {}, TaskOrigin::synthetic};
}

Trajectory solver_traj(const std::string& task_id, int index,
                       std::optional<std::string> answer) {
  Trajectory t;
  t.task_id = task_id;
  t.index = index;
  t.body = answer ? "solution with \\boxed{" + *answer + "}" : "solution without a box";
  t.answer = std::move(answer);
  t.role = TrajectoryRole::solver;
  return t;
}

Trajectory refiner_traj(const std::string& task_id, int slot,
                        std::optional<std::string> answer) {
  Trajectory t;
  t.task_id = task_id;
  t.index = slot;
  t.body = answer ? "Final Answer: \\boxed{" + *answer + "}" : "no definitive correction";
  t.answer = std::move(answer);
  t.role = TrajectoryRole::refiner;
  return t;
}

TruthProxy make_proxy(const std::string& task_id, std::optional<std::string> r1,
                      std::optional<std::string> r2) {
  TruthProxy p;
  p.task_id = task_id;
  p.correction_paths = {refiner_traj(task_id, 1, r1), refiner_traj(task_id, 2, r2)};
  if (r1 && r2 && *r1 == *r2) {
    p.status = ProxyStatus::verified;
    p.proxy = p.correction_paths[0];
  } else {
    p.status = ProxyStatus::unresolved;
  }
  return p;
}

}  // namespace

TEST_CASE("generator dataset labels by zone indicator alone") {
  auto config = test_config();
  std::vector<Task> tasks = {make_task("A"), make_task("B"), make_task("C")};
  std::map<std::string, ZoneLabel> labels = {
      {"A", {0.5, Zone::zpd}}, {"B", {0.1, Zone::mastery}}, {"C", {0.9, Zone::chaos}}};
  auto records = build_generator_dataset(tasks, labels, config);
  REQUIRE(records.size() == 3);
  CHECK(records[0].label == 1);
  CHECK(records[1].label == 0);
  CHECK(records[2].label == 0);
  for (const auto& rec : records) {
    CHECK(rec.role == RecordRole::generator);
    CHECK(rec.context == std::string(prompts::kGenerator));
  }
  CHECK(records[0].output == "question for A");
}

TEST_CASE("generator dataset with every task in the band") {
  auto config = test_config();
  std::vector<Task> tasks = {make_task("A"), make_task("B")};
  std::map<std::string, ZoneLabel> labels = {{"A", {0.4, Zone::zpd}}, {"B", {0.6, Zone::zpd}}};
  auto records = build_generator_dataset(tasks, labels, config);
  for (const auto& rec : records) CHECK(rec.label == 1);
}

TEST_CASE("generator dataset positive count matches a zone recount") {
  auto config = test_config();
  std::vector<Task> tasks;
  std::map<std::string, ZoneLabel> labels;
  int expected = 0;
  for (int i = 0; i < 1000; ++i) {
    auto t = make_task("task" + std::to_string(i));
    double h = (i % 101) / 100.0;
    labels[t.id] = classify_zone(h, config);
    if (labels[t.id].zone == Zone::zpd) ++expected;
    tasks.push_back(std::move(t));
  }
  auto records = build_generator_dataset(tasks, labels, config);
  int positives = 0;
  for (const auto& rec : records) positives += rec.label;
  CHECK(static_cast<int>(records.size()) == 1000);
  CHECK(positives == expected);
}

TEST_CASE("solver dataset labels against the verified proxy") {
  auto config = test_config();
  ExactNormalizedJudge judge;
  std::vector<Task> tasks = {make_task("A")};
  std::vector<Trajectory> trajectories = {
      solver_traj("A", 1, "9"), solver_traj("A", 2, "7"), solver_traj("A", 3, "9")};
  std::map<std::string, TruthProxy> proxies = {{"A", make_proxy("A", "9", "9")}};
  auto records = build_solver_dataset(tasks, trajectories, proxies, judge, config);
  REQUIRE(records.size() == 3);
  CHECK(records[0].label == 1);
  CHECK(records[1].label == 0);
  CHECK(records[2].label == 1);
  CHECK(records[0].context == "question for A");
  CHECK(records[0].output == trajectories[0].body);
}

TEST_CASE("unresolved tasks contribute no solver records") {
  auto config = test_config();
  ExactNormalizedJudge judge;
  std::vector<Task> tasks = {make_task("A")};
  std::vector<Trajectory> trajectories = {solver_traj("A", 1, "9")};
  std::map<std::string, TruthProxy> proxies = {{"A", make_proxy("A", "9", "11")}};
  CHECK(build_solver_dataset(tasks, trajectories, proxies, judge, config).empty());
}

TEST_CASE("answer-less solver trajectories get label zero") {
  auto config = test_config();
  ExactNormalizedJudge judge;
  std::vector<Task> tasks = {make_task("A")};
  std::vector<Trajectory> trajectories = {solver_traj("A", 1, std::nullopt),
                                          solver_traj("A", 2, "9")};
  std::map<std::string, TruthProxy> proxies = {{"A", make_proxy("A", "9", "9")}};
  auto records = build_solver_dataset(tasks, trajectories, proxies, judge, config);
  REQUIRE(records.size() == 2);
  CHECK(records[0].label == 0);
  CHECK(records[1].label == 1);
}

namespace {

struct RefinerFixture {
  std::vector<Task> tasks;
  std::map<std::string, std::pair<Cluster, Cluster>> top2;
  std::vector<Trajectory> trajectories;
  std::map<std::string, TruthProxy> proxies;
};

// One task whose two top clusters answered (c1, c2); corrections (r1, r2).
RefinerFixture refiner_case(const std::string& c1, const std::string& c2,
                            std::optional<std::string> r1, std::optional<std::string> r2) {
  RefinerFixture f;
  f.tasks = {make_task("A")};
  f.trajectories = {solver_traj("A", 1, c1), solver_traj("A", 2, c2)};
  Cluster first{c1, {1}, 0.5};
  Cluster second{c2, {2}, 0.5};
  f.top2 = {{"A", {first, second}}};
  f.proxies = {{"A", make_proxy("A", std::move(r1), std::move(r2))}};
  return f;
}

}  // namespace

TEST_CASE("refiner dataset keeps corrections that fix a wrong cluster") {
  auto config = test_config();
  ExactNormalizedJudge judge;
  auto f = refiner_case("7", "9", "9", "9");
  auto records =
      build_refiner_dataset(f.tasks, f.top2, f.trajectories, f.proxies, judge, config);
  REQUIRE(records.size() == 1);
  CHECK(records[0].label == 1);
  // The record context embeds the flawed cluster-1 solution.
  CHECK(records[0].context.find("\\boxed{7}") != std::string::npos);
  CHECK(records[0].output.find("\\boxed{9}") != std::string::npos);
}

TEST_CASE("refiner dataset emits two records when both clusters were wrong") {
  auto config = test_config();
  ExactNormalizedJudge judge;
  auto f = refiner_case("7", "8", "9", "9");
  auto records =
      build_refiner_dataset(f.tasks, f.top2, f.trajectories, f.proxies, judge, config);
  CHECK(records.size() == 2);
  for (const auto& rec : records) CHECK(rec.label == 1);
}

TEST_CASE("a cluster that already matches the proxy is excluded") {
  auto config = test_config();
  ExactNormalizedJudge judge;
  auto f = refiner_case("9", "7", "9", "9");
  auto records =
      build_refiner_dataset(f.tasks, f.top2, f.trajectories, f.proxies, judge, config);
  REQUIRE(records.size() == 1);
  CHECK(records[0].context.find("\\boxed{7}") != std::string::npos);
}

TEST_CASE("unresolved tasks contribute no refiner records") {
  auto config = test_config();
  ExactNormalizedJudge judge;
  auto f = refiner_case("7", "8", "9", "11");
  CHECK(build_refiner_dataset(f.tasks, f.top2, f.trajectories, f.proxies, judge, config).empty());
}

namespace {

std::vector<PreferenceRecord> dummy_records(RecordRole role, int round, int count) {
  std::vector<PreferenceRecord> out;
  for (int i = 0; i < count; ++i) {
    PreferenceRecord rec;
    rec.role = role;
    rec.round = round;
    rec.task_id = "r" + std::to_string(round) + "-" + std::to_string(i);
    rec.context = "ctx";
    rec.output = "out";
    rec.label = role == RecordRole::refiner ? 1 : i % 2;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

TEST_CASE("round-1 staggered batch is the generator dataset alone") {
  InMemorySource source;
  source.put(RecordRole::generator, 1, dummy_records(RecordRole::generator, 1, 10));
  source.put(RecordRole::solver, 1, dummy_records(RecordRole::solver, 1, 5));
  source.put(RecordRole::refiner, 1, dummy_records(RecordRole::refiner, 1, 2));
  auto batch = assemble_staggered_batch(1, source);
  REQUIRE(batch.size() == 10);
  for (const auto& rec : batch) CHECK(rec.role == RecordRole::generator);
}

TEST_CASE("staggered batch pairs current generator data with prior-round data") {
  InMemorySource source;
  for (int r = 1; r <= 3; ++r) {
    source.put(RecordRole::generator, r, dummy_records(RecordRole::generator, r, 1000));
    source.put(RecordRole::solver, r, dummy_records(RecordRole::solver, r, r == 2 ? 480 : 100));
    source.put(RecordRole::refiner, r, dummy_records(RecordRole::refiner, r, r == 2 ? 60 : 10));
  }
  auto batch = assemble_staggered_batch(3, source);
  CHECK(batch.size() == 1000 + 480 + 60);
  // Ordering: generator block, then solver, then refiner, stable within each.
  CHECK(batch.front().role == RecordRole::generator);
  CHECK(batch[1000].role == RecordRole::solver);
  CHECK(batch[1000].round == 2);
  CHECK(batch.back().role == RecordRole::refiner);
  CHECK(batch.back().round == 2);
}

TEST_CASE("staggered batch requires the prior-round datasets") {
  InMemorySource source;
  source.put(RecordRole::generator, 2, dummy_records(RecordRole::generator, 2, 10));
  try {
    assemble_staggered_batch(2, source);
    FAIL("expected scheduling_error");
  } catch (const scheduling_error& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("synchronous batch unions the same round") {
  InMemorySource source;
  source.put(RecordRole::generator, 1, dummy_records(RecordRole::generator, 1, 1000));
  source.put(RecordRole::solver, 1, dummy_records(RecordRole::solver, 1, 512));
  source.put(RecordRole::refiner, 1, dummy_records(RecordRole::refiner, 1, 40));
  CHECK(assemble_synchronous_batch(1, source).size() == 1552);
}

TEST_CASE("an empty refiner dataset still assembles") {
  InMemorySource source;
  source.put(RecordRole::generator, 1, dummy_records(RecordRole::generator, 1, 4));
  source.put(RecordRole::solver, 1, dummy_records(RecordRole::solver, 1, 3));
  source.put(RecordRole::refiner, 1, {});
  CHECK(assemble_synchronous_batch(1, source).size() == 7);
}

TEST_CASE("synchronous batch requires same-round datasets") {
  InMemorySource source;
  source.put(RecordRole::generator, 1, dummy_records(RecordRole::generator, 1, 4));
  CHECK_THROWS_AS(assemble_synchronous_batch(2, source), scheduling_error);
}

TEST_CASE("assembly is deterministic") {
  InMemorySource source;
  source.put(RecordRole::generator, 2, dummy_records(RecordRole::generator, 2, 50));
  source.put(RecordRole::solver, 1, dummy_records(RecordRole::solver, 1, 20));
  source.put(RecordRole::refiner, 1, dummy_records(RecordRole::refiner, 1, 5));
  CHECK(assemble_staggered_batch(2, source) == assemble_staggered_batch(2, source));
}
