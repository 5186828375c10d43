#pragma once

// Tri-role preference-dataset synthesis from one round's verified
// experience, plus staggered/synchronous batch assembly across rounds.

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aero/clustering.hpp"
#include "aero/core.hpp"
#include "aero/errors.hpp"
#include "aero/prompts.hpp"

namespace aero {

namespace synthesis_detail {

inline double lambda_for(int label, const EngineConfig& config) {
  return label == 1 ? config.lambda_pos : config.lambda_neg;
}

inline const Task& task_by_id(const std::vector<Task>& tasks, const std::string& id) {
  for (const auto& task : tasks)
    if (task.id == id) return task;
  throw data_error("no task with id " + id);
}

}  // namespace synthesis_detail

/// One record per generated task, labeled by the zone indicator alone:
/// 1 inside the productive band, 0 outside. ICC outcomes do not affect
/// these labels. Context is the fixed generation prompt so the record
/// trains as prompt -> completion.
inline std::vector<PreferenceRecord> build_generator_dataset(
    const std::vector<Task>& tasks, const std::map<std::string, ZoneLabel>& labels,
    const EngineConfig& config) {
  std::vector<PreferenceRecord> records;
  records.reserve(tasks.size());
  for (const auto& task : tasks) {
    auto it = labels.find(task.id);
    if (it == labels.end())
      throw config_error("build_generator_dataset: task " + task.id + " has no zone label");
    PreferenceRecord rec;
    rec.role = RecordRole::generator;
    rec.round = task.round;
    rec.task_id = task.id;
    rec.context = std::string(prompts::kGenerator);
    rec.output = task.question;
    rec.label = it->second.zone == Zone::zpd ? 1 : 0;
    rec.lambda_hint = synthesis_detail::lambda_for(rec.label, config);
    records.push_back(std::move(rec));
  }
  return records;
}

/// For every task with a verified proxy: one record per solver trajectory,
/// labeled by judged equivalence of its answer against the proxy answer.
/// Answer-less trajectories are labeled 0; unresolved tasks contribute
/// nothing.
inline std::vector<PreferenceRecord> build_solver_dataset(
    const std::vector<Task>& tasks, std::span<const Trajectory> trajectories,
    const std::map<std::string, TruthProxy>& proxies, EquivalenceJudge& judge,
    const EngineConfig& config) {
  std::vector<PreferenceRecord> records;
  for (const auto& task : tasks) {
    auto it = proxies.find(task.id);
    if (it == proxies.end() || it->second.status != ProxyStatus::verified) continue;
    const std::string& proxy_answer = *it->second.proxy->answer;
    for (const auto& traj : trajectories) {
      if (traj.task_id != task.id || traj.role != TrajectoryRole::solver) continue;
      PreferenceRecord rec;
      rec.role = RecordRole::solver;
      rec.round = task.round;
      rec.task_id = task.id;
      rec.context = task.question;
      rec.output = traj.body;
      rec.label = traj.answer && judge.equivalent(*traj.answer, proxy_answer) ? 1 : 0;
      rec.lambda_hint = synthesis_detail::lambda_for(rec.label, config);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

/// Positive-only correction records: for each verified task and each of its
/// two source clusters, keep the correction path iff the cluster's original
/// answer misses the proxy while the correction reaches it (both tested
/// through the semantic judge, matching the solver-dataset equality).
inline std::vector<PreferenceRecord> build_refiner_dataset(
    const std::vector<Task>& tasks,
    const std::map<std::string, std::pair<Cluster, Cluster>>& top2,
    std::span<const Trajectory> trajectories, const std::map<std::string, TruthProxy>& proxies,
    EquivalenceJudge& judge, const EngineConfig& config) {
  std::vector<PreferenceRecord> records;
  for (const auto& task : tasks) {
    auto proxy_it = proxies.find(task.id);
    if (proxy_it == proxies.end() || proxy_it->second.status != ProxyStatus::verified) continue;
    auto top_it = top2.find(task.id);
    if (top_it == top2.end())
      throw data_error("build_refiner_dataset: verified task " + task.id +
                       " has no top-2 clusters");
    const TruthProxy& proxy = proxy_it->second;
    const std::string& proxy_answer = *proxy.proxy->answer;
    const Cluster* source_clusters[2] = {&top_it->second.first, &top_it->second.second};
    for (int j = 0; j < 2; ++j) {
      const Cluster& cluster = *source_clusters[j];
      const Trajectory& correction = proxy.correction_paths.at(j);
      bool cluster_wrong = !judge.equivalent(*cluster.representative, proxy_answer);
      bool correction_right =
          correction.answer && judge.equivalent(*correction.answer, proxy_answer);
      if (!(cluster_wrong && correction_right)) continue;

      const Trajectory* flawed = nullptr;
      for (const auto& traj : trajectories)
        if (traj.task_id == task.id && traj.role == TrajectoryRole::solver &&
            traj.index == cluster.first_member())
          flawed = &traj;
      if (!flawed)
        throw data_error("build_refiner_dataset: flawed trajectory missing for task " + task.id);

      PreferenceRecord rec;
      rec.role = RecordRole::refiner;
      rec.round = task.round;
      rec.task_id = task.id;
      rec.context = prompts::refiner_input(task.question, flawed->body);
      rec.output = correction.body;
      rec.label = 1;
      rec.lambda_hint = synthesis_detail::lambda_for(1, config);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

/// Read surface the batch assemblers pull datasets from; implemented by the
/// on-disk round store and by in-memory fixtures in tests.
class DatasetSource {
public:
  virtual ~DatasetSource() = default;
  virtual bool has_round(int round) const = 0;
  virtual const std::vector<PreferenceRecord>& dataset(RecordRole role, int round) const = 0;
};

/// Map-backed source for tests and ad-hoc assembly.
class InMemorySource : public DatasetSource {
public:
  void put(RecordRole role, int round, std::vector<PreferenceRecord> records) {
    datasets_[{round, role}] = std::move(records);
    rounds_.insert(round);
  }

  bool has_round(int round) const override { return rounds_.count(round) > 0; }

  const std::vector<PreferenceRecord>& dataset(RecordRole role, int round) const override {
    auto it = datasets_.find({round, role});
    if (it == datasets_.end())
      throw scheduling_error("no " + enum_name_for(role) + " dataset for round " +
                             std::to_string(round));
    return it->second;
  }

private:
  static std::string enum_name_for(RecordRole role) {
    switch (role) {
      case RecordRole::generator: return "generator";
      case RecordRole::solver: return "solver";
      case RecordRole::refiner: return "refiner";
    }
    return "?";
  }

  std::map<std::pair<int, RecordRole>, std::vector<PreferenceRecord>> datasets_;
  std::set<int> rounds_;
};

namespace synthesis_detail {

inline void append_dataset(std::vector<PreferenceRecord>& out, const DatasetSource& source,
                           RecordRole role, int round) {
  if (!source.has_round(round)) {
    std::string name = role == RecordRole::generator ? "generator"
                       : role == RecordRole::solver  ? "solver"
                                                     : "refiner";
    throw scheduling_error("round " + std::to_string(round) + " " + name +
                           " dataset is not available");
  }
  const auto& records = source.dataset(role, round);
  out.insert(out.end(), records.begin(), records.end());
}

}  // namespace synthesis_detail

/// Round-1 batches are generator-only; later rounds pair current generator
/// data with the previous round's solver and refiner data. Ordering is
/// generator, solver, refiner, stable within each dataset.
inline std::vector<PreferenceRecord> assemble_staggered_batch(int round,
                                                              const DatasetSource& source) {
  if (round < 1) throw scheduling_error("round must be >= 1");
  std::vector<PreferenceRecord> batch;
  synthesis_detail::append_dataset(batch, source, RecordRole::generator, round);
  if (round > 1) {
    synthesis_detail::append_dataset(batch, source, RecordRole::solver, round - 1);
    synthesis_detail::append_dataset(batch, source, RecordRole::refiner, round - 1);
  }
  return batch;
}

/// Same-round union of all three datasets; the baseline schedule.
inline std::vector<PreferenceRecord> assemble_synchronous_batch(int round,
                                                                const DatasetSource& source) {
  if (round < 1) throw scheduling_error("round must be >= 1");
  std::vector<PreferenceRecord> batch;
  synthesis_detail::append_dataset(batch, source, RecordRole::generator, round);
  synthesis_detail::append_dataset(batch, source, RecordRole::solver, round);
  synthesis_detail::append_dataset(batch, source, RecordRole::refiner, round);
  return batch;
}

}  // namespace aero
