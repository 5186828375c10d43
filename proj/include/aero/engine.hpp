#pragma once

// Round lifecycle driver: generate -> sample -> cluster -> zone -> correct
// -> synthesize -> assemble -> (synthetic) train, with resumable
// checkpointing, plus the batch exporter and the score/label audits.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aero/backends.hpp"
#include "aero/clustering.hpp"
#include "aero/core.hpp"
#include "aero/errors.hpp"
#include "aero/icc.hpp"
#include "aero/kto.hpp"
#include "aero/metrics.hpp"
#include "aero/store.hpp"
#include "aero/synthesis.hpp"
#include "aero/zpd.hpp"

namespace aero {

/// Per-round RNG stream seed, derived from the master seed so rounds are
/// independently reproducible and resume does not disturb later rounds.
inline std::uint64_t round_seed(std::uint64_t master_seed, int round) {
  return detail::sha256_prefix64("round-rng/" + std::to_string(master_seed) + "/" +
                                 std::to_string(round));
}

class Engine {
public:
  Engine(EngineConfig config, std::filesystem::path out_dir)
      : config_(std::move(config)), store_(std::move(out_dir)) {
    config_.validate();
    config_hash_ = config_digest(config_);
  }

  RoundStore& store() { return store_; }
  const EngineConfig& config() const { return config_; }

  /// Runs rounds 1..total against an injected backend/judge pair. Completed
  /// rounds on disk are verified and skipped; a half-written round is
  /// discarded and regenerated. `world` is non-null in synthetic mode and
  /// evolves across rounds (restored from the checkpoint on resume).
  void run_rounds(int total, ModelBackend& backend, EquivalenceJudge& judge,
                  SyntheticWorld* world) {
    store_.init_run(config_hash_, config_.rng_seed);
    int done = store_.completed_rounds();
    for (int t = done; t >= 1; --t) store_.load_round(t);  // digest verification
    if (world && done > 0) {
      auto world_state = store_.load_world_state(done);
      if (world_state) world->state_from_json(*world_state);
    }
    for (int t = done + 1; t <= total; ++t) run_one_round(t, backend, judge, world);
  }

  /// Self-contained variant: builds the backend stack the config names.
  void run_rounds(int total) {
    if (config_.backend == BackendKind::synthetic) {
      SyntheticBackend backend(SyntheticWorld(config_.synthetic, config_.rng_seed));
      ExactNormalizedJudge judge;
      run_rounds(total, backend, judge, &backend.world());
    } else {
      ChatClient client(config_.endpoint, config_.retry);
      EndpointBackend backend(client, config_);
      RemoteJudge judge(client);
      run_rounds(total, backend, judge, nullptr);
    }
  }

private:
  void run_one_round(int t, ModelBackend& backend, EquivalenceJudge& judge,
                     SyntheticWorld* world) {
    // Clears any half-written leftovers from an interrupted attempt; throws
    // instead if the directory is already complete (gapped store).
    store_.discard_incomplete_round(t);
    std::uint64_t seed = round_seed(config_.rng_seed, t);
    if (world) world->reseed(seed);

    RoundState state;
    state.round = t;
    state.config_hash = config_hash_;
    state.rng_seed = seed;
    state.tasks = backend.generate_tasks(config_.tasks_per_round, t);

    for (const auto& task : state.tasks) {
      auto trajectories = backend.sample_solutions(task, config_.samples_per_task);
      state.trajectories.insert(state.trajectories.end(), trajectories.begin(),
                                trajectories.end());
      auto clusters = cluster_trajectories(trajectories, judge);
      double entropy = normalized_entropy(clusters, config_.samples_per_task);
      state.zone_labels[task.id] = classify_zone(entropy, config_);
      state.cluster_sets.push_back(std::move(clusters));
    }

    std::map<std::string, std::pair<Cluster, Cluster>> top2;
    for (std::size_t i = 0; i < state.tasks.size(); ++i) {
      const Task& task = state.tasks[i];
      if (state.zone_labels.at(task.id).zone != Zone::zpd) continue;
      const ClusterSet& clusters = state.cluster_sets[i];
      try {
        top2[task.id] = select_top2(clusters);
      } catch (const not_enough_clusters& e) {
        state.skips[task.id] = e.what();
        continue;
      }
      auto task_trajectories = trajectories_of(state, task.id);
      state.proxies[task.id] =
          run_icc(task, top2[task.id], task_trajectories, backend, judge);
    }

    state.generator_dataset = build_generator_dataset(state.tasks, state.zone_labels, config_);
    state.solver_dataset =
        build_solver_dataset(state.tasks, state.trajectories, state.proxies, judge, config_);
    state.refiner_dataset = build_refiner_dataset(state.tasks, top2, state.trajectories,
                                                  state.proxies, judge, config_);

    auto violations = validate_round_state(state);
    if (!violations.empty())
      throw data_error("round " + std::to_string(t) +
                       " failed invariant checks before persisting: " + violations.front());

    auto batch = assemble_training_batch(t, state);
    std::optional<nlohmann::json> world_state;
    if (world) {
      *world = apply_synthetic_training(*world, batch);
      world_state = world->state_to_json();
    }

    store_.save_round(state, round_metrics(state, batch, world), world_state);
  }

  std::vector<Trajectory> trajectories_of(const RoundState& state, const std::string& task_id) {
    std::vector<Trajectory> out;
    for (const auto& traj : state.trajectories)
      if (traj.task_id == task_id) out.push_back(traj);
    return out;
  }

  /// Current-round datasets come from memory; prior-round ones from the
  /// store, so resume sees identical inputs.
  std::vector<PreferenceRecord> assemble_training_batch(int t, const RoundState& state) {
    InMemorySource source;
    source.put(RecordRole::generator, t, state.generator_dataset);
    source.put(RecordRole::solver, t, state.solver_dataset);
    source.put(RecordRole::refiner, t, state.refiner_dataset);
    if (t > 1) {
      auto prev = store_.load_round(t - 1);
      source.put(RecordRole::generator, t - 1, prev.generator_dataset);
      source.put(RecordRole::solver, t - 1, prev.solver_dataset);
      source.put(RecordRole::refiner, t - 1, prev.refiner_dataset);
    }
    return config_.schedule == Schedule::staggered ? assemble_staggered_batch(t, source)
                                                   : assemble_synchronous_batch(t, source);
  }

  nlohmann::json round_metrics(const RoundState& state,
                               const std::vector<PreferenceRecord>& batch,
                               const SyntheticWorld* world) {
    auto dist = zone_distribution(state.zone_labels);
    int verified = 0;
    int unresolved = 0;
    for (const auto& [id, proxy] : state.proxies)
      (proxy.status == ProxyStatus::verified ? verified : unresolved) += 1;
    double entropy_sum = 0.0;
    for (const auto& [id, label] : state.zone_labels) entropy_sum += label.entropy;
    std::size_t missing = 0;
    for (const auto& traj : state.trajectories)
      if (!traj.answer) ++missing;

    nlohmann::json j{
        {"round", state.round},
        {"zone_distribution",
         {{"mastery", dist.mastery}, {"zpd", dist.zpd}, {"chaos", dist.chaos}}},
        {"mean_entropy", entropy_sum / static_cast<double>(state.zone_labels.size())},
        {"null_answer_fraction",
         state.trajectories.empty()
             ? 0.0
             : static_cast<double>(missing) / static_cast<double>(state.trajectories.size())},
        {"counts",
         {{"tasks", state.tasks.size()},
          {"zpd_tasks", static_cast<std::size_t>(dist.zpd * state.tasks.size() + 0.5)},
          {"verified", verified},
          {"unresolved", unresolved},
          {"skipped", state.skips.size()},
          {"generator_records", state.generator_dataset.size()},
          {"solver_records", state.solver_dataset.size()},
          {"refiner_records", state.refiner_dataset.size()},
          {"training_batch_records", batch.size()}}}};
    if (world) {
      j["solver_skill"] = world->solver_skill();
      j["curriculum_anchor"] = world->curriculum_anchor();
    }
    return j;
  }

  EngineConfig config_;
  std::string config_hash_;
  RoundStore store_;
};

// ---------------------------------------------------------------------------
// Batch export

/// Writes one training batch as line-delimited JSON: a schema header line,
/// one record per line, and a trailing checksum line over all preceding
/// bytes. Output is byte-deterministic for a given store.
inline void export_batch(const RoundStore& store, int round, Schedule schedule,
                         const std::filesystem::path& path) {
  std::vector<PreferenceRecord> batch = schedule == Schedule::staggered
                                            ? assemble_staggered_batch(round, store)
                                            : assemble_synchronous_batch(round, store);
  std::ostringstream body;
  body << nlohmann::json{{"schema", "aero/batch@1"},
                         {"round", round},
                         {"schedule", enum_name(schedule)}}
              .dump()
       << '\n';
  for (const auto& rec : batch) body << nlohmann::json(rec).dump() << '\n';
  std::string content = body.str();
  content += nlohmann::json{{"checksum", "sha256:" + detail::sha256_hex(content)}}.dump() + "\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// ---------------------------------------------------------------------------
// KTO score audit

struct KtoAuditReport {
  std::size_t records = 0;
  double z0 = 0.0;
  bool z0_overridden = false;
  double loss = 0.0;
  std::map<std::string, double> mean_value_per_role;
  std::map<std::string, std::size_t> records_per_role;
  bool monotonicity_ok = true;
  std::size_t monotonicity_checks = 0;
};

/// Replays externally produced log-probabilities through the reference
/// kernels. Lines hold role, label, logp_policy, logp_ref; a leading
/// schema line and blank lines are tolerated. Any other malformed line is
/// an error carrying its line number.
inline KtoAuditReport audit_kto(const std::filesystem::path& scores_path,
                                const EngineConfig& config,
                                std::optional<double> z0_override = std::nullopt) {
  std::ifstream in(scores_path);
  if (!in) throw data_error("cannot read " + scores_path.string());

  std::vector<ScoredRecord> batch;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto parsed = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object())
      throw data_error(scores_path.string() + ":" + std::to_string(line_no) +
                       ": malformed scored record");
    if (line_no == 1 && parsed.contains("schema")) continue;
    try {
      ScoredRecord rec;
      rec.record.role = enum_from_name<RecordRole>(parsed.at("role").get<std::string>());
      rec.record.label = parsed.at("label").get<int>();
      if (rec.record.label != 0 && rec.record.label != 1)
        throw data_error("label outside {0,1}");
      rec.logp_policy = parsed.at("logp_policy").get<double>();
      rec.logp_ref = parsed.at("logp_ref").get<double>();
      if (parsed.contains("round_of_origin"))
        rec.record.round = parsed.at("round_of_origin").get<int>();
      batch.push_back(rec);
    } catch (const std::exception& e) {
      throw data_error(scores_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (batch.empty()) throw data_error(scores_path.string() + ": no scored records");

  KtoAuditReport report;
  report.records = batch.size();
  report.z0_overridden = z0_override.has_value();
  report.z0 = z0_override ? *z0_override : estimate_z0(batch);
  report.loss = kto_loss(batch, report.z0, config);

  std::map<std::string, double> value_sum;
  for (const auto& rec : batch) {
    std::string role = enum_name(rec.record.role);
    value_sum[role] += kto_value(rec, report.z0, config);
    report.records_per_role[role] += 1;
  }
  for (const auto& [role, sum] : value_sum)
    report.mean_value_per_role[role] = sum / static_cast<double>(report.records_per_role[role]);

  // Monotonicity spot-checks: nudging the policy log-probability must move
  // the value in the label's direction.
  const double eps = 1e-4;
  std::size_t stride = std::max<std::size_t>(1, batch.size() / 32);
  for (std::size_t i = 0; i < batch.size(); i += stride) {
    ScoredRecord up = batch[i];
    up.logp_policy += eps;
    ScoredRecord down = batch[i];
    down.logp_policy -= eps;
    double delta = kto_value(up, report.z0, config) - kto_value(down, report.z0, config);
    bool ok = batch[i].record.label == 1 ? delta > 0.0 : delta < 0.0;
    report.monotonicity_ok = report.monotonicity_ok && ok;
    ++report.monotonicity_checks;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Pseudo-label evaluation

struct LabelEvalReport {
  LabelPrecision precision;
  std::vector<std::string> tasks_without_oracle;  // scored tasks skipped
  std::vector<std::string> unknown_oracle_ids;    // oracle entries with no task
};

/// Oracle file: one JSON object mapping task id -> reference answer.
inline std::map<std::string, std::string> load_oracle_answers(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read " + path.string());
  nlohmann::json parsed = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object())
    throw data_error(path.string() + ": oracle file must be a JSON object of id -> answer");
  std::map<std::string, std::string> oracle;
  for (const auto& [id, answer] : parsed.items()) {
    if (!answer.is_string())
      throw data_error(path.string() + ": oracle answer for " + id + " must be a string");
    oracle[id] = answer.get<std::string>();
  }
  return oracle;
}

/// Scores majority voting and the correction route for one stored round
/// against an oracle answer file. Tasks the oracle does not cover are
/// listed and skipped, not fatal.
inline LabelEvalReport eval_labels(const RoundStore& store, int round,
                                   const std::filesystem::path& oracle_path,
                                   EquivalenceJudge& judge) {
  RoundState state = store.load_round(round);
  auto oracle = load_oracle_answers(oracle_path);

  LabelEvalReport report;
  std::map<std::string, std::optional<std::string>> majority;
  std::map<std::string, TruthProxy> scored;
  std::map<std::string, const ClusterSet*> clusters_by_task;
  for (const auto& cs : state.cluster_sets) clusters_by_task[cs.task_id] = &cs;

  for (const auto& [task_id, proxy] : state.proxies) {
    if (!oracle.count(task_id)) {
      report.tasks_without_oracle.push_back(task_id);
      continue;
    }
    scored[task_id] = proxy;
    auto it = clusters_by_task.find(task_id);
    majority[task_id] =
        it == clusters_by_task.end() ? std::nullopt : majority_answer(*it->second);
  }
  std::set<std::string> task_ids;
  for (const auto& task : state.tasks) task_ids.insert(task.id);
  for (const auto& [id, answer] : oracle)
    if (!task_ids.count(id)) report.unknown_oracle_ids.push_back(id);

  std::map<std::string, std::string> covered_oracle;
  for (const auto& [id, proxy] : scored) covered_oracle[id] = oracle.at(id);
  if (!scored.empty())
    report.precision = pseudo_label_precision(scored, majority, covered_oracle, judge);
  return report;
}

}  // namespace aero
