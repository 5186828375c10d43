#pragma once

// Independent counterfactual correction: re-solve a task from its two top
// answer clusters under the assumption each is wrong, and mint a truth
// proxy when the corrections converge.

#include <span>
#include <string>
#include <utility>

#include "aero/clustering.hpp"
#include "aero/core.hpp"
#include "aero/errors.hpp"
#include "aero/model_backend.hpp"

namespace aero {

/// The two largest non-null clusters. The cluster set is already in
/// canonical order (size desc, earliest first member), so this is the
/// first two clusters with a representative.
inline std::pair<Cluster, Cluster> select_top2(const ClusterSet& clusters) {
  const Cluster* first = nullptr;
  const Cluster* second = nullptr;
  for (const auto& cluster : clusters.clusters) {
    if (cluster.is_null()) continue;
    if (!first) {
      first = &cluster;
    } else if (!second) {
      second = &cluster;
      break;
    }
  }
  if (!first || !second)
    throw not_enough_clusters("task " + clusters.task_id +
                              " has fewer than two non-null answer clusters");
  return {*first, *second};
}

namespace icc_detail {

inline const Trajectory& first_member_body(const Cluster& cluster,
                                           std::span<const Trajectory> trajectories,
                                           const std::string& task_id) {
  for (const auto& traj : trajectories)
    if (traj.index == cluster.first_member() && traj.role == TrajectoryRole::solver)
      return traj;
  throw data_error("task " + task_id + ": cluster first member " +
                   std::to_string(cluster.first_member()) + " not found among trajectories");
}

}  // namespace icc_detail

/// Runs the two correction passes for one task. Each top cluster is
/// represented by the full body of its first-member trajectory. The proxy,
/// when minted, is the correction path launched from the top cluster. A
/// correction without an extractable answer counts as non-convergent.
/// Always issues exactly two refiner requests.
inline TruthProxy run_icc(const Task& task, const std::pair<Cluster, Cluster>& top2,
                          std::span<const Trajectory> trajectories, ModelBackend& backend,
                          EquivalenceJudge& judge) {
  const Trajectory& flawed_1 = icc_detail::first_member_body(top2.first, trajectories, task.id);
  const Trajectory& flawed_2 = icc_detail::first_member_body(top2.second, trajectories, task.id);

  Trajectory correction_1 = backend.request_correction(task, flawed_1.body);
  correction_1.index = 1;
  Trajectory correction_2 = backend.request_correction(task, flawed_2.body);
  correction_2.index = 2;

  TruthProxy result;
  result.task_id = task.id;
  result.correction_paths = {correction_1, correction_2};

  bool converged = correction_1.answer && correction_2.answer &&
                   judge.equivalent(*correction_1.answer, *correction_2.answer);
  if (converged) {
    result.status = ProxyStatus::verified;
    result.proxy = correction_1;
  } else {
    result.status = ProxyStatus::unresolved;
  }
  return result;
}

}  // namespace aero
