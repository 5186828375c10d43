#pragma once

// Round-over-round analytics: zone distribution, pseudo-label precision
// against an operator-supplied oracle, and average pairwise embedding
// distance as a curriculum-diversity proxy.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aero/clustering.hpp"
#include "aero/core.hpp"
#include "aero/detail/sha256.hpp"
#include "aero/errors.hpp"

namespace aero {

struct ZoneDistribution {
  double mastery = 0.0;
  double zpd = 0.0;
  double chaos = 0.0;
};

inline ZoneDistribution zone_distribution(const std::map<std::string, ZoneLabel>& labels) {
  if (labels.empty()) throw config_error("zone_distribution: empty label map");
  ZoneDistribution dist;
  for (const auto& [id, label] : labels) {
    switch (label.zone) {
      case Zone::mastery: dist.mastery += 1.0; break;
      case Zone::zpd: dist.zpd += 1.0; break;
      case Zone::chaos: dist.chaos += 1.0; break;
    }
  }
  double total = static_cast<double>(labels.size());
  dist.mastery /= total;
  dist.zpd /= total;
  dist.chaos /= total;
  return dist;
}

struct LabelPrecision {
  double majority_vote = 0.0;
  double icc = 0.0;
  int majority_denominator = 0;
  int icc_denominator = 0;
};

/// Accuracy of the two pseudo-labeling routes against oracle answers.
/// Majority voting is scored over every ICC-attempted task (verified or
/// unresolved); the correction route only over verified ones, since
/// unresolved tasks mint no proxy. `majority_answers` maps a task to its
/// largest-cluster answer, absent when the largest cluster is the null one.
inline LabelPrecision pseudo_label_precision(
    const std::map<std::string, TruthProxy>& proxies,
    const std::map<std::string, std::optional<std::string>>& majority_answers,
    const std::map<std::string, std::string>& oracle_answers, EquivalenceJudge& judge) {
  LabelPrecision out;
  int mv_hits = 0;
  int icc_hits = 0;
  for (const auto& [task_id, proxy] : proxies) {
    auto oracle_it = oracle_answers.find(task_id);
    if (oracle_it == oracle_answers.end())
      throw config_error("pseudo_label_precision: no oracle answer for task " + task_id);
    const std::string& oracle = oracle_it->second;

    auto mv_it = majority_answers.find(task_id);
    if (mv_it == majority_answers.end())
      throw config_error("pseudo_label_precision: no majority answer entry for task " + task_id);
    ++out.majority_denominator;
    if (mv_it->second && judge.equivalent(*mv_it->second, oracle)) ++mv_hits;

    if (proxy.status == ProxyStatus::verified) {
      ++out.icc_denominator;
      if (judge.equivalent(*proxy.proxy->answer, oracle)) ++icc_hits;
    }
  }
  out.majority_vote =
      out.majority_denominator > 0 ? static_cast<double>(mv_hits) / out.majority_denominator : 0.0;
  out.icc = out.icc_denominator > 0 ? static_cast<double>(icc_hits) / out.icc_denominator : 0.0;
  return out;
}

/// The largest non-null cluster's representative answer, if any.
inline std::optional<std::string> majority_answer(const ClusterSet& clusters) {
  for (const auto& cluster : clusters.clusters)
    if (!cluster.is_null()) return cluster.representative;
  return std::nullopt;
}

/// Mean Euclidean distance over all vector pairs, computed exactly with the
/// O(m^2) double loop. Dimension-agnostic.
inline double avg_pairwise_distance(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2)
    throw config_error("avg_pairwise_distance: need at least two vectors");
  std::size_t dim = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != dim) throw config_error("avg_pairwise_distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        double diff = vectors[i][k] - vectors[j][k];
        sq += diff * diff;
      }
      sum += std::sqrt(sq);
    }
  }
  double m = static_cast<double>(vectors.size());
  return (2.0 * sum) / (m * (m - 1.0));
}

/// Deterministic hash-based text embedding for tests and offline metric
/// smoke runs; not a semantic encoder.
inline std::vector<double> hash_embedding(std::string_view text, int dim) {
  if (dim < 1) throw config_error("hash_embedding: dimension must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    std::string keyed = std::to_string(k) + "\x1f";
    keyed.append(text);
    std::uint64_t h = detail::sha256_prefix64(keyed);
    out[static_cast<std::size_t>(k)] =
        static_cast<double>(h) / static_cast<double>(std::numeric_limits<std::uint64_t>::max()) *
            2.0 -
        1.0;
  }
  return out;
}

}  // namespace aero
