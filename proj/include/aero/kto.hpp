#pragma once

// Reference KTO value/loss kernels over caller-supplied per-record
// log-probabilities. No gradients here; this validates exported datasets
// and audits scores produced by an external trainer.

#include <cmath>
#include <span>
#include <vector>

#include "aero/core.hpp"
#include "aero/errors.hpp"

namespace aero {

struct ScoredRecord {
  PreferenceRecord record;
  double logp_policy = 0.0;
  double logp_ref = 0.0;
};

/// Numerically stable logistic function.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

/// Log-ratio of policy to reference likelihood for the record's output.
inline double implied_reward(const ScoredRecord& rec) {
  if (!std::isfinite(rec.logp_policy) || !std::isfinite(rec.logp_ref))
    throw numeric_error("implied_reward: non-finite log-probability");
  return rec.logp_policy - rec.logp_ref;
}

/// Prospect-theoretic utility of one record around the reference point z0:
/// desirable outputs gain with reward above z0, undesirable ones with
/// reward below it.
inline double kto_value(const ScoredRecord& rec, double z0, const EngineConfig& config) {
  double reward = implied_reward(rec);
  if (rec.record.label == 1)
    return config.lambda_pos * logistic(config.kto_beta * (reward - z0));
  return config.lambda_neg * logistic(config.kto_beta * (z0 - reward));
}

/// Mean of (lambda_y - v) over the batch, lambda_y being the weight of the
/// record's label class.
inline double kto_loss(std::span<const ScoredRecord> batch, double z0,
                       const EngineConfig& config) {
  if (batch.empty()) throw numeric_error("kto_loss: empty batch");
  double sum = 0.0;
  for (const auto& rec : batch) {
    double lambda = rec.record.label == 1 ? config.lambda_pos : config.lambda_neg;
    sum += lambda - kto_value(rec, z0, config);
  }
  return sum / static_cast<double>(batch.size());
}

/// Plug-in reference point: the batch-mean implied reward, floored at zero
/// because it estimates a KL divergence. Callers with an externally
/// computed z0 pass that instead.
inline double estimate_z0(std::span<const ScoredRecord> batch) {
  if (batch.empty()) throw numeric_error("estimate_z0: empty batch");
  double sum = 0.0;
  for (const auto& rec : batch) sum += implied_reward(rec);
  double mean = sum / static_cast<double>(batch.size());
  return mean < 0.0 ? 0.0 : mean;
}

}  // namespace aero
