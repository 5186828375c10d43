#pragma once

// Greedy one-pass semantic answer clustering with a pluggable equivalence
// judge. Answer-less trajectories land in a dedicated null cluster that
// still counts toward the sample total, keeping cluster frequencies a
// proper distribution.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aero/answers.hpp"
#include "aero/core.hpp"
#include "aero/errors.hpp"

namespace aero {

/// Binary answer-equivalence oracle. Verdicts are cached under an
/// order-normalized pair key, which makes every judge deterministic per
/// pair within a run and symmetric by construction; f(a,a) is 1 without
/// consulting the backing implementation.
class EquivalenceJudge {
public:
  virtual ~EquivalenceJudge() = default;

  bool equivalent(const std::string& a, const std::string& b) {
    if (a == b) return true;
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    bool verdict = judge_pair(key.first, key.second);
    std::lock_guard lock(mutex_);
    auto [it, inserted] = cache_.try_emplace(std::move(key), verdict);
    return it->second;  // first verdict wins if two threads raced
  }

  bool cached(const std::string& a, const std::string& b) const {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    std::lock_guard lock(mutex_);
    return cache_.count(key) > 0;
  }

  std::size_t cache_size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
  }

protected:
  /// Uncached verdict for a canonically ordered, non-identical pair.
  virtual bool judge_pair(const std::string& a, const std::string& b) = 0;

private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, bool> cache_;
};

/// Textual equality after whitespace normalization. This is an equivalence
/// relation, so greedy clustering with it matches the transitive-closure
/// partition exactly.
class ExactNormalizedJudge : public EquivalenceJudge {
protected:
  bool judge_pair(const std::string& a, const std::string& b) override {
    return normalize_answer(a) == normalize_answer(b);
  }
};

inline bool judge_equivalent(const std::string& a, const std::string& b,
                             EquivalenceJudge& judge) {
  return judge.equivalent(a, b);
}

/// Partitions one task's trajectories into answer clusters. Trajectories
/// are scanned in sample order; each answer joins the first existing
/// cluster (creation order) whose representative seed it matches, else it
/// seeds a new cluster. The result is reordered canonically: descending
/// size, ties broken by earliest first-member index.
inline ClusterSet cluster_trajectories(std::span<const Trajectory> trajectories,
                                       EquivalenceJudge& judge) {
  if (trajectories.empty()) throw config_error("cluster_trajectories: empty trajectory list");
  const std::string& task_id = trajectories.front().task_id;
  for (const auto& t : trajectories)
    if (t.task_id != task_id)
      throw config_error("cluster_trajectories: trajectories span multiple tasks");

  std::vector<const Trajectory*> ordered;
  ordered.reserve(trajectories.size());
  for (const auto& t : trajectories) ordered.push_back(&t);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Trajectory* a, const Trajectory* b) { return a->index < b->index; });

  std::vector<Cluster> clusters;  // creation order during the pass
  Cluster null_cluster;           // representative stays empty

  for (const Trajectory* traj : ordered) {
    if (!traj->answer) {
      null_cluster.member_indices.push_back(traj->index);
      continue;
    }
    bool placed = false;
    for (auto& cluster : clusters) {
      try {
        if (judge.equivalent(*traj->answer, *cluster.representative)) {
          cluster.member_indices.push_back(traj->index);
          placed = true;
          break;
        }
      } catch (const transport_error& e) {
        throw clustering_error(std::string("judge failed: ") + e.what(), *traj->answer,
                               *cluster.representative);
      }
    }
    if (!placed) {
      Cluster fresh;
      fresh.representative = *traj->answer;
      fresh.member_indices.push_back(traj->index);
      clusters.push_back(std::move(fresh));
    }
  }

  if (!null_cluster.member_indices.empty()) clusters.push_back(std::move(null_cluster));

  ClusterSet result;
  result.task_id = task_id;
  result.n_total = static_cast<int>(trajectories.size());
  for (auto& cluster : clusters) {
    cluster.frequency = static_cast<double>(cluster.size()) / result.n_total;
    result.clusters.push_back(std::move(cluster));
  }
  std::stable_sort(result.clusters.begin(), result.clusters.end(),
                   [](const Cluster& a, const Cluster& b) {
                     if (a.size() != b.size()) return a.size() > b.size();
                     return a.first_member() < b.first_member();
                   });
  return result;
}

}  // namespace aero
