#pragma once

// Normalized Shannon entropy over answer-cluster frequencies and the
// three-zone classification it induces.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "aero/core.hpp"
#include "aero/errors.hpp"

namespace aero {

/// Entropy of the cluster-frequency distribution, normalized by log2(n) to
/// [0,1]. 0 means total consensus, 1 maximum divergence. The null cluster
/// counts like any other so the frequencies stay a distribution.
///
/// Computed as sum(c)/n - sum(c*log2(c)) / (n*log2(n)), which is the
/// normalized -sum(P log2 P) with P = c/n rearranged over integer sizes;
/// the rearrangement makes the consensus and all-singleton cases land on
/// exactly 0.0 and 1.0.
inline double normalized_entropy(const ClusterSet& clusters, int n) {
  if (n < 2) throw config_error("normalized_entropy: sample count must be >= 2");
  if (clusters.clusters.empty()) throw config_error("normalized_entropy: empty cluster set");
  double size_sum = 0.0;
  double weighted_log_sum = 0.0;
  for (const auto& cluster : clusters.clusters) {
    double c = static_cast<double>(cluster.size());
    if (c <= 0.0) continue;  // empty cluster contributes a 0*log(0) term
    size_sum += c;
    weighted_log_sum += c * std::log2(c);
  }
  double value = size_sum / n - weighted_log_sum / (n * std::log2(static_cast<double>(n)));
  if (value < 0.0) return 0.0;  // clamp round-off drift back into [0,1]
  if (value > 1.0) return 1.0;
  return value;
}

/// Zone boundaries are inclusive on both ends of the band: entropy in
/// [zpd_low, zpd_high] is the productive middle zone.
inline ZoneLabel classify_zone(double entropy, const EngineConfig& config) {
  ZoneLabel label;
  label.entropy = entropy;
  if (entropy < config.zpd_low)
    label.zone = Zone::mastery;
  else if (entropy <= config.zpd_high)
    label.zone = Zone::zpd;
  else
    label.zone = Zone::chaos;
  return label;
}

/// Keeps exactly the tasks labeled with the middle zone, preserving input
/// order. Every task must be labeled.
inline std::vector<Task> filter_zpd(const std::vector<Task>& tasks,
                                    const std::map<std::string, ZoneLabel>& labels) {
  std::vector<Task> kept;
  for (const auto& task : tasks) {
    auto it = labels.find(task.id);
    if (it == labels.end()) throw config_error("filter_zpd: task " + task.id + " has no zone label");
    if (it->second.zone == Zone::zpd) kept.push_back(task);
  }
  return kept;
}

}  // namespace aero
