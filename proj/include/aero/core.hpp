#pragma once

// Shared domain types for the dual-loop pipeline: tasks, trajectories,
// answer clusters, zone labels, truth proxies, preference records, and the
// per-round state bundle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aero/detail/sha256.hpp"
#include "aero/errors.hpp"

namespace aero {

enum class TaskOrigin { endpoint, synthetic };
enum class TrajectoryRole { solver, refiner };
enum class Zone { mastery, zpd, chaos };
enum class ProxyStatus { verified, unresolved };
enum class RecordRole { generator, solver, refiner };

/// Content-addressed task identifier, stable across reruns of the same
/// round with the same question.
inline std::string task_id_for(int round, std::string_view question) {
  detail::Sha256 h;
  std::string prefix = "task/" + std::to_string(round) + "/";
  h.update(prefix);
  h.update(question);
  return detail::to_hex(h.finish()).substr(0, 16);
}

/// A synthesized question plus metadata; the unit flowing through a round.
struct Task {
  std::string id;
  int round = 1;
  std::string question;
  std::map<std::string, std::string> meta;
  TaskOrigin origin = TaskOrigin::synthetic;

  bool operator==(const Task&) const = default;
};

/// One reasoning path with its extracted final answer. `answer` is absent
/// exactly when boxed extraction failed on `body`.
struct Trajectory {
  std::string task_id;
  int index = 1;  // 1-based sample ordinal; correction slot for refiner paths
  std::string body;
  std::optional<std::string> answer;
  TrajectoryRole role = TrajectoryRole::solver;

  bool operator==(const Trajectory&) const = default;
};

/// One semantic answer group. A null cluster (no representative) holds the
/// trajectories without an extractable answer.
struct Cluster {
  std::optional<std::string> representative;
  std::vector<int> member_indices;  // in assignment order, earliest first
  double frequency = 0.0;           // |members| / n_total

  bool is_null() const { return !representative.has_value(); }
  int size() const { return static_cast<int>(member_indices.size()); }
  int first_member() const { return member_indices.empty() ? -1 : member_indices.front(); }

  bool operator==(const Cluster&) const = default;
};

/// The partition of one task's trajectories, ordered by descending size
/// with ties broken by the earliest first-member index.
struct ClusterSet {
  std::string task_id;
  std::vector<Cluster> clusters;
  int n_total = 0;

  bool operator==(const ClusterSet&) const = default;
};

struct ZoneLabel {
  double entropy = 0.0;
  Zone zone = Zone::mastery;

  bool operator==(const ZoneLabel&) const = default;
};

/// Outcome of counterfactual correction for one task. When verified, the
/// proxy is the correction path launched from the top cluster.
struct TruthProxy {
  std::string task_id;
  ProxyStatus status = ProxyStatus::unresolved;
  std::optional<Trajectory> proxy;
  std::vector<Trajectory> correction_paths;  // the two refiner paths, slot order

  bool operator==(const TruthProxy&) const = default;
};

/// A (context, output, binary label) triple destined for one of the three
/// role datasets. `lambda_hint` carries the weight downstream trainers
/// should apply to the record's label class.
struct PreferenceRecord {
  RecordRole role = RecordRole::generator;
  int round = 1;
  std::string task_id;
  std::string context;
  std::string output;
  int label = 0;
  double lambda_hint = 1.0;

  bool operator==(const PreferenceRecord&) const = default;
};

struct RetryPolicy {
  int max_attempts = 4;
  int base_delay_ms = 250;
  int max_delay_ms = 8000;
  double multiplier = 2.0;
};

enum class BackendKind { endpoint, synthetic };
enum class Schedule { staggered, synchronous };

struct EndpointSettings {
  std::string base_url = "http://localhost:8000/v1";
  std::string model = "default";
  std::string api_key_env = "AERO_API_KEY";
  int max_in_flight = 4;
  int timeout_ms = 120000;
  std::string audit_log;  // empty = no wire audit
};

/// Knobs for the deterministic synthetic population used in desk-scale
/// experiments; see backends.hpp for the dynamics.
struct SyntheticSettings {
  double solver_skill = 0.30;
  double refiner_boost = 0.25;
  double steepness = 10.0;          // slope of the correctness response
  double learning_rate = 0.08;      // skill gained per fully on-target batch
  double anchor_gain = 1.0;         // how fast the generator re-targets
  double co_round_damping = 0.15;   // re-targeting damp when solver data is same-round
  double difficulty_spread = 0.12;
  double missing_answer_rate = 0.03;
  int distractors_per_task = 12;
};

struct EngineConfig {
  int tasks_per_round = 1000;   // m
  int samples_per_task = 16;    // n
  double zpd_low = 0.3;         // entropy band lower edge (inclusive)
  double zpd_high = 0.7;        // entropy band upper edge (inclusive)
  double kto_beta = 0.1;
  double lambda_pos = 1.0;
  double lambda_neg = 1.0;
  double temperature = 1.0;
  int max_tokens = 4096;
  int rounds = 5;
  double zpd_margin = 0.05;  // staggered-vs-synchronous acceptance margin
  std::uint64_t rng_seed = 17;
  BackendKind backend = BackendKind::synthetic;
  Schedule schedule = Schedule::staggered;
  RetryPolicy retry;
  EndpointSettings endpoint;
  SyntheticSettings synthetic;

  void validate() const {
    if (tasks_per_round < 1) throw config_error("tasks_per_round must be >= 1");
    if (samples_per_task < 2) throw config_error("samples_per_task must be >= 2");
    if (!(zpd_low >= 0.0 && zpd_low < zpd_high && zpd_high <= 1.0))
      throw config_error("zone thresholds must satisfy 0 <= zpd_low < zpd_high <= 1");
    if (!(kto_beta > 0.0)) throw config_error("kto_beta must be > 0");
    if (rounds < 1) throw config_error("rounds must be >= 1");
    if (retry.max_attempts < 1) throw config_error("retry.max_attempts must be >= 1");
  }
};

/// Everything one round produced. Cross-references are by task id;
/// trajectories here are the solver samples (refiner paths live inside
/// their TruthProxy).
struct RoundState {
  int round = 1;
  std::string config_hash;
  std::uint64_t rng_seed = 0;
  std::vector<Task> tasks;
  std::vector<Trajectory> trajectories;
  std::vector<ClusterSet> cluster_sets;
  std::map<std::string, ZoneLabel> zone_labels;
  std::map<std::string, TruthProxy> proxies;
  std::map<std::string, std::string> skips;  // task id -> reason ICC was not attempted
  std::vector<PreferenceRecord> generator_dataset;
  std::vector<PreferenceRecord> solver_dataset;
  std::vector<PreferenceRecord> refiner_dataset;

  bool operator==(const RoundState&) const = default;
};

/// Structural invariant check. Violations are data, not failures: an empty
/// result means the state is internally consistent.
inline std::vector<std::string> validate_round_state(const RoundState& state) {
  std::vector<std::string> violations;
  auto flag = [&](std::string msg) { violations.push_back(std::move(msg)); };

  std::set<std::string> task_ids;
  for (const auto& task : state.tasks) {
    if (!task_ids.insert(task.id).second) flag("duplicate task id " + task.id);
    if (task.question.empty()) flag("task " + task.id + " has an empty question");
    if (task.round < 1) flag("task " + task.id + " has round < 1");
  }

  std::map<std::string, std::set<int>> solver_indices;
  for (const auto& traj : state.trajectories) {
    if (!task_ids.count(traj.task_id))
      flag("trajectory references unknown task " + traj.task_id);
    if (traj.role == TrajectoryRole::solver &&
        !solver_indices[traj.task_id].insert(traj.index).second)
      flag("duplicate solver trajectory index " + std::to_string(traj.index) +
           " for task " + traj.task_id);
  }

  for (const auto& cs : state.cluster_sets) {
    if (!task_ids.count(cs.task_id)) flag("cluster set references unknown task " + cs.task_id);
    int total = 0;
    std::set<int> seen;
    for (const auto& cluster : cs.clusters) {
      total += cluster.size();
      for (int idx : cluster.member_indices)
        if (!seen.insert(idx).second)
          flag("trajectory index " + std::to_string(idx) + " appears in two clusters of task " +
               cs.task_id);
      if (cs.n_total > 0) {
        double expected = static_cast<double>(cluster.size()) / cs.n_total;
        if (cluster.frequency != expected)
          flag("cluster frequency mismatch in task " + cs.task_id);
      }
    }
    if (total != cs.n_total) {
      flag("cluster sizes of task " + cs.task_id + " sum to " + std::to_string(total) +
           ", expected n_total=" + std::to_string(cs.n_total));
    } else if (solver_indices.count(cs.task_id) && seen != solver_indices.at(cs.task_id)) {
      flag("cluster members of task " + cs.task_id +
           " do not cover its solver trajectory indices");
    }
    for (std::size_t i = 1; i < cs.clusters.size(); ++i) {
      const auto& prev = cs.clusters[i - 1];
      const auto& cur = cs.clusters[i];
      bool ordered = prev.size() > cur.size() ||
                     (prev.size() == cur.size() && prev.first_member() < cur.first_member());
      if (!ordered) flag("clusters of task " + cs.task_id + " are not in canonical order");
    }
  }

  for (const auto& [task_id, label] : state.zone_labels) {
    if (!task_ids.count(task_id)) flag("zone label references unknown task " + task_id);
    if (!(label.entropy >= 0.0 && label.entropy <= 1.0))
      flag("entropy out of [0,1] for task " + task_id);
  }

  for (const auto& [task_id, proxy] : state.proxies) {
    if (!task_ids.count(task_id)) flag("proxy references unknown task " + task_id);
    if (proxy.status == ProxyStatus::verified) {
      if (proxy.correction_paths.size() != 2)
        flag("verified proxy for task " + task_id + " lacks two correction paths");
      else if (!proxy.correction_paths[0].answer || !proxy.correction_paths[1].answer)
        flag("verified proxy for task " + task_id + " has a correction without an answer");
      if (!proxy.proxy)
        flag("verified proxy for task " + task_id + " has no proxy trajectory");
      else if (proxy.correction_paths.size() == 2 &&
               !(*proxy.proxy == proxy.correction_paths[0]))
        flag("verified proxy for task " + task_id + " is not the first correction path");
    }
  }

  for (const auto& rec : state.refiner_dataset)
    if (rec.label != 1) flag("refiner record with non-positive label for task " + rec.task_id);
  for (const auto* dataset :
       {&state.generator_dataset, &state.solver_dataset, &state.refiner_dataset})
    for (const auto& rec : *dataset)
      if (!task_ids.count(rec.task_id))
        flag("preference record references unknown task " + rec.task_id);

  return violations;
}

}  // namespace aero
