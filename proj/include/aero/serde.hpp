#pragma once

// JSON (de)serialization for the domain types. Field sets are exhaustive so
// persisted state round-trips losslessly; loaders reject unknown enum tags.

#include <string>

#include <json.hpp>

#include "aero/core.hpp"
#include "aero/errors.hpp"

namespace aero {

namespace serde_detail {

template <typename Enum>
struct EnumNames;

template <>
struct EnumNames<TaskOrigin> {
  static constexpr std::pair<TaskOrigin, const char*> values[] = {
      {TaskOrigin::endpoint, "endpoint"}, {TaskOrigin::synthetic, "synthetic"}};
};
template <>
struct EnumNames<TrajectoryRole> {
  static constexpr std::pair<TrajectoryRole, const char*> values[] = {
      {TrajectoryRole::solver, "solver"}, {TrajectoryRole::refiner, "refiner"}};
};
template <>
struct EnumNames<Zone> {
  static constexpr std::pair<Zone, const char*> values[] = {
      {Zone::mastery, "mastery"}, {Zone::zpd, "zpd"}, {Zone::chaos, "chaos"}};
};
template <>
struct EnumNames<ProxyStatus> {
  static constexpr std::pair<ProxyStatus, const char*> values[] = {
      {ProxyStatus::verified, "verified"}, {ProxyStatus::unresolved, "unresolved"}};
};
template <>
struct EnumNames<RecordRole> {
  static constexpr std::pair<RecordRole, const char*> values[] = {
      {RecordRole::generator, "generator"},
      {RecordRole::solver, "solver"},
      {RecordRole::refiner, "refiner"}};
};
template <>
struct EnumNames<Schedule> {
  static constexpr std::pair<Schedule, const char*> values[] = {
      {Schedule::staggered, "staggered"}, {Schedule::synchronous, "synchronous"}};
};
template <>
struct EnumNames<BackendKind> {
  static constexpr std::pair<BackendKind, const char*> values[] = {
      {BackendKind::endpoint, "endpoint"}, {BackendKind::synthetic, "synthetic"}};
};

}  // namespace serde_detail

template <typename Enum>
std::string enum_name(Enum value) {
  for (const auto& [v, name] : serde_detail::EnumNames<Enum>::values)
    if (v == value) return name;
  throw data_error("unknown enum value");
}

template <typename Enum>
Enum enum_from_name(const std::string& name) {
  for (const auto& [v, n] : serde_detail::EnumNames<Enum>::values)
    if (name == n) return v;
  throw data_error("unknown enum tag: " + name);
}

inline void to_json(nlohmann::json& j, const Task& t) {
  j = nlohmann::json{{"id", t.id},
                     {"round", t.round},
                     {"question", t.question},
                     {"meta", t.meta},
                     {"origin", enum_name(t.origin)}};
}

inline void from_json(const nlohmann::json& j, Task& t) {
  j.at("id").get_to(t.id);
  j.at("round").get_to(t.round);
  j.at("question").get_to(t.question);
  j.at("meta").get_to(t.meta);
  t.origin = enum_from_name<TaskOrigin>(j.at("origin").get<std::string>());
}

inline void to_json(nlohmann::json& j, const Trajectory& t) {
  j = nlohmann::json{{"task_id", t.task_id},
                     {"index", t.index},
                     {"body", t.body},
                     {"answer", t.answer ? nlohmann::json(*t.answer) : nlohmann::json(nullptr)},
                     {"role", enum_name(t.role)}};
}

inline void from_json(const nlohmann::json& j, Trajectory& t) {
  j.at("task_id").get_to(t.task_id);
  j.at("index").get_to(t.index);
  j.at("body").get_to(t.body);
  const auto& answer = j.at("answer");
  t.answer = answer.is_null() ? std::nullopt : std::optional<std::string>(answer.get<std::string>());
  t.role = enum_from_name<TrajectoryRole>(j.at("role").get<std::string>());
}

inline void to_json(nlohmann::json& j, const Cluster& c) {
  j = nlohmann::json{
      {"representative",
       c.representative ? nlohmann::json(*c.representative) : nlohmann::json(nullptr)},
      {"member_indices", c.member_indices},
      {"frequency", c.frequency}};
}

inline void from_json(const nlohmann::json& j, Cluster& c) {
  const auto& rep = j.at("representative");
  c.representative = rep.is_null() ? std::nullopt : std::optional<std::string>(rep.get<std::string>());
  j.at("member_indices").get_to(c.member_indices);
  j.at("frequency").get_to(c.frequency);
}

inline void to_json(nlohmann::json& j, const ClusterSet& cs) {
  j = nlohmann::json{{"task_id", cs.task_id}, {"clusters", cs.clusters}, {"n_total", cs.n_total}};
}

inline void from_json(const nlohmann::json& j, ClusterSet& cs) {
  j.at("task_id").get_to(cs.task_id);
  j.at("clusters").get_to(cs.clusters);
  j.at("n_total").get_to(cs.n_total);
}

inline void to_json(nlohmann::json& j, const ZoneLabel& z) {
  j = nlohmann::json{{"entropy", z.entropy}, {"zone", enum_name(z.zone)}};
}

inline void from_json(const nlohmann::json& j, ZoneLabel& z) {
  j.at("entropy").get_to(z.entropy);
  z.zone = enum_from_name<Zone>(j.at("zone").get<std::string>());
}

inline void to_json(nlohmann::json& j, const TruthProxy& p) {
  j = nlohmann::json{{"task_id", p.task_id},
                     {"status", enum_name(p.status)},
                     {"proxy", p.proxy ? nlohmann::json(*p.proxy) : nlohmann::json(nullptr)},
                     {"correction_paths", p.correction_paths}};
}

inline void from_json(const nlohmann::json& j, TruthProxy& p) {
  j.at("task_id").get_to(p.task_id);
  p.status = enum_from_name<ProxyStatus>(j.at("status").get<std::string>());
  const auto& proxy = j.at("proxy");
  p.proxy = proxy.is_null() ? std::nullopt : std::optional<Trajectory>(proxy.get<Trajectory>());
  j.at("correction_paths").get_to(p.correction_paths);
}

inline void to_json(nlohmann::json& j, const PreferenceRecord& r) {
  j = nlohmann::json{{"role", enum_name(r.role)},
                     {"round_of_origin", r.round},
                     {"task_id", r.task_id},
                     {"context", r.context},
                     {"output", r.output},
                     {"label", r.label},
                     {"lambda", r.lambda_hint}};
}

inline void from_json(const nlohmann::json& j, PreferenceRecord& r) {
  r.role = enum_from_name<RecordRole>(j.at("role").get<std::string>());
  j.at("round_of_origin").get_to(r.round);
  j.at("task_id").get_to(r.task_id);
  j.at("context").get_to(r.context);
  j.at("output").get_to(r.output);
  j.at("label").get_to(r.label);
  j.at("lambda").get_to(r.lambda_hint);
}

inline void to_json(nlohmann::json& j, const RoundState& s) {
  nlohmann::json zones = nlohmann::json::object();
  for (const auto& [id, label] : s.zone_labels) zones[id] = label;
  nlohmann::json proxies = nlohmann::json::object();
  for (const auto& [id, proxy] : s.proxies) proxies[id] = proxy;
  j = nlohmann::json{{"round", s.round},
                     {"config_hash", s.config_hash},
                     {"rng_seed", s.rng_seed},
                     {"tasks", s.tasks},
                     {"trajectories", s.trajectories},
                     {"cluster_sets", s.cluster_sets},
                     {"zone_labels", zones},
                     {"proxies", proxies},
                     {"skips", s.skips},
                     {"generator_dataset", s.generator_dataset},
                     {"solver_dataset", s.solver_dataset},
                     {"refiner_dataset", s.refiner_dataset}};
}

inline void from_json(const nlohmann::json& j, RoundState& s) {
  j.at("round").get_to(s.round);
  j.at("config_hash").get_to(s.config_hash);
  j.at("rng_seed").get_to(s.rng_seed);
  j.at("tasks").get_to(s.tasks);
  j.at("trajectories").get_to(s.trajectories);
  j.at("cluster_sets").get_to(s.cluster_sets);
  s.zone_labels.clear();
  for (const auto& [id, label] : j.at("zone_labels").items())
    s.zone_labels[id] = label.get<ZoneLabel>();
  s.proxies.clear();
  for (const auto& [id, proxy] : j.at("proxies").items())
    s.proxies[id] = proxy.get<TruthProxy>();
  j.at("skips").get_to(s.skips);
  j.at("generator_dataset").get_to(s.generator_dataset);
  j.at("solver_dataset").get_to(s.solver_dataset);
  j.at("refiner_dataset").get_to(s.refiner_dataset);
}

/// Canonical digest of the config fields that shape round content, stamped
/// into run metadata and round manifests so resumes detect drift. Transport
/// and run-extent knobs (retries, timeouts, concurrency cap, audit path,
/// round count, acceptance margin) are deliberately excluded: changing them
/// cannot change what a round produces.
inline std::string config_digest(const EngineConfig& c) {
  nlohmann::json j{{"tasks_per_round", c.tasks_per_round},
                   {"samples_per_task", c.samples_per_task},
                   {"zpd_low", c.zpd_low},
                   {"zpd_high", c.zpd_high},
                   {"kto_beta", c.kto_beta},
                   {"lambda_pos", c.lambda_pos},
                   {"lambda_neg", c.lambda_neg},
                   {"temperature", c.temperature},
                   {"max_tokens", c.max_tokens},
                   {"rng_seed", c.rng_seed},
                   {"backend", enum_name(c.backend)},
                   {"schedule", enum_name(c.schedule)},
                   {"endpoint",
                    {{"base_url", c.endpoint.base_url}, {"model", c.endpoint.model}}},
                   {"synthetic",
                    {{"solver_skill", c.synthetic.solver_skill},
                     {"refiner_boost", c.synthetic.refiner_boost},
                     {"steepness", c.synthetic.steepness},
                     {"learning_rate", c.synthetic.learning_rate},
                     {"anchor_gain", c.synthetic.anchor_gain},
                     {"co_round_damping", c.synthetic.co_round_damping},
                     {"difficulty_spread", c.synthetic.difficulty_spread},
                     {"missing_answer_rate", c.synthetic.missing_answer_rate},
                     {"distractors_per_task", c.synthetic.distractors_per_task}}}};
  return detail::sha256_hex(j.dump());
}

}  // namespace aero
