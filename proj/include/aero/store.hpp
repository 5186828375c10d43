#pragma once

// On-disk round store. One directory per round holds the round's artifacts
// as self-describing JSONL files plus a manifest with per-file digests;
// completed rounds are immutable and digest-verified on every load.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aero/core.hpp"
#include "aero/detail/sha256.hpp"
#include "aero/errors.hpp"
#include "aero/serde.hpp"
#include "aero/synthesis.hpp"

namespace aero {

namespace store_detail {

inline std::string schema_header(const std::string& name) {
  nlohmann::json j{{"schema", "aero/" + name + "@1"}};
  return j.dump();
}

template <typename T>
std::string jsonl_dump(const std::string& name, const std::vector<T>& items) {
  std::ostringstream out;
  out << schema_header(name) << '\n';
  for (const auto& item : items) out << nlohmann::json(item).dump() << '\n';
  return out.str();
}

template <typename T>
std::vector<T> jsonl_parse(const std::string& name, const std::string& text,
                           const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != schema_header(name))
    throw data_error(origin + ": missing or wrong schema header");
  std::vector<T> items;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto parsed = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) throw data_error(origin + ": malformed record line");
    items.push_back(parsed.get<T>());
  }
  return items;
}

}  // namespace store_detail

class RoundStore : public DatasetSource {
public:
  explicit RoundStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path round_dir(int round) const {
    char name[32];
    std::snprintf(name, sizeof name, "round_%04d", round);
    return root_ / "rounds" / name;
  }

  bool round_complete(int round) const {
    return std::filesystem::exists(round_dir(round) / "manifest.json");
  }

  /// Highest t such that rounds 1..t all have manifests.
  int completed_rounds() const {
    int t = 0;
    while (round_complete(t + 1)) ++t;
    return t;
  }

  /// Persists a completed round. The manifest is written last so an
  /// interrupted save never looks complete.
  void save_round(const RoundState& state, const nlohmann::json& metrics,
                  const std::optional<nlohmann::json>& world_state) {
    namespace fs = std::filesystem;
    if (round_complete(state.round))
      throw data_error("refusing to overwrite completed round " + std::to_string(state.round));
    fs::path dir = round_dir(state.round);
    fs::create_directories(dir);

    std::map<std::string, std::string> files;
    files["tasks.jsonl"] = store_detail::jsonl_dump("tasks", state.tasks);
    files["trajectories.jsonl"] = store_detail::jsonl_dump("trajectories", state.trajectories);
    files["clusters.jsonl"] = store_detail::jsonl_dump("clusters", state.cluster_sets);

    std::ostringstream zones;
    zones << store_detail::schema_header("zones") << '\n';
    for (const auto& [task_id, label] : state.zone_labels) {
      nlohmann::json line = label;
      line["task_id"] = task_id;
      zones << line.dump() << '\n';
    }
    files["zones.jsonl"] = zones.str();

    std::vector<TruthProxy> proxies;
    for (const auto& [id, proxy] : state.proxies) proxies.push_back(proxy);
    files["proxies.jsonl"] = store_detail::jsonl_dump("proxies", proxies);

    std::ostringstream skips;
    skips << store_detail::schema_header("skips") << '\n';
    for (const auto& [task_id, reason] : state.skips)
      skips << nlohmann::json{{"task_id", task_id}, {"reason", reason}}.dump() << '\n';
    files["skips.jsonl"] = skips.str();

    files["dataset_generator.jsonl"] =
        store_detail::jsonl_dump("dataset_generator", state.generator_dataset);
    files["dataset_solver.jsonl"] =
        store_detail::jsonl_dump("dataset_solver", state.solver_dataset);
    files["dataset_refiner.jsonl"] =
        store_detail::jsonl_dump("dataset_refiner", state.refiner_dataset);

    nlohmann::json metrics_doc = metrics;
    metrics_doc["schema"] = "aero/metrics@1";
    files["metrics.json"] = metrics_doc.dump(2) + "\n";

    if (world_state) {
      nlohmann::json world_doc = *world_state;
      world_doc["schema"] = "aero/world@1";
      files["world.json"] = world_doc.dump(2) + "\n";
    }

    nlohmann::json digests = nlohmann::json::object();
    for (const auto& [name, content] : files) {
      write_file(dir / name, content);
      digests[name] = detail::sha256_hex(content);
    }
    nlohmann::json manifest{{"schema", "aero/manifest@1"},
                            {"round", state.round},
                            {"config_hash", state.config_hash},
                            {"rng_seed", state.rng_seed},
                            {"counts",
                             {{"tasks", state.tasks.size()},
                              {"trajectories", state.trajectories.size()},
                              {"proxies", state.proxies.size()},
                              {"generator_records", state.generator_dataset.size()},
                              {"solver_records", state.solver_dataset.size()},
                              {"refiner_records", state.refiner_dataset.size()}}},
                            {"files", digests}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    cache_.erase(state.round);
  }

  /// Loads a completed round, verifying every file against the manifest
  /// digests first.
  RoundState load_round(int round) const {
    auto cached = cache_.find(round);
    if (cached != cache_.end()) return cached->second;

    namespace fs = std::filesystem;
    fs::path dir = round_dir(round);
    nlohmann::json manifest = read_manifest(round);

    std::map<std::string, std::string> files;
    for (const auto& [name, digest] : manifest.at("files").items()) {
      std::string content = read_file(dir / name);
      if (detail::sha256_hex(content) != digest.get<std::string>())
        throw data_error("digest mismatch for " + (dir / name).string() +
                         "; round directory was modified after completion");
      files[name] = std::move(content);
    }

    RoundState state;
    state.round = manifest.at("round").get<int>();
    state.config_hash = manifest.at("config_hash").get<std::string>();
    state.rng_seed = manifest.at("rng_seed").get<std::uint64_t>();
    auto origin = dir.string();
    state.tasks = store_detail::jsonl_parse<Task>("tasks", files.at("tasks.jsonl"), origin);
    state.trajectories = store_detail::jsonl_parse<Trajectory>(
        "trajectories", files.at("trajectories.jsonl"), origin);
    state.cluster_sets =
        store_detail::jsonl_parse<ClusterSet>("clusters", files.at("clusters.jsonl"), origin);

    std::istringstream zones(files.at("zones.jsonl"));
    std::string line;
    std::getline(zones, line);
    while (std::getline(zones, line)) {
      if (line.empty()) continue;
      auto parsed = nlohmann::json::parse(line);
      state.zone_labels[parsed.at("task_id").get<std::string>()] = parsed.get<ZoneLabel>();
    }

    for (auto& proxy :
         store_detail::jsonl_parse<TruthProxy>("proxies", files.at("proxies.jsonl"), origin))
      state.proxies[proxy.task_id] = std::move(proxy);

    std::istringstream skips(files.at("skips.jsonl"));
    std::getline(skips, line);
    while (std::getline(skips, line)) {
      if (line.empty()) continue;
      auto parsed = nlohmann::json::parse(line);
      state.skips[parsed.at("task_id").get<std::string>()] =
          parsed.at("reason").get<std::string>();
    }

    state.generator_dataset = store_detail::jsonl_parse<PreferenceRecord>(
        "dataset_generator", files.at("dataset_generator.jsonl"), origin);
    state.solver_dataset = store_detail::jsonl_parse<PreferenceRecord>(
        "dataset_solver", files.at("dataset_solver.jsonl"), origin);
    state.refiner_dataset = store_detail::jsonl_parse<PreferenceRecord>(
        "dataset_refiner", files.at("dataset_refiner.jsonl"), origin);

    cache_[round] = state;
    return state;
  }

  std::optional<nlohmann::json> load_world_state(int round) const {
    namespace fs = std::filesystem;
    fs::path path = round_dir(round) / "world.json";
    if (!fs::exists(path)) return std::nullopt;
    nlohmann::json manifest = read_manifest(round);
    std::string content = read_file(path);
    if (detail::sha256_hex(content) !=
        manifest.at("files").at("world.json").get<std::string>())
      throw data_error("digest mismatch for " + path.string());
    return nlohmann::json::parse(content);
  }

  nlohmann::json load_metrics(int round) const {
    nlohmann::json manifest = read_manifest(round);
    std::string content = read_file(round_dir(round) / "metrics.json");
    if (detail::sha256_hex(content) !=
        manifest.at("files").at("metrics.json").get<std::string>())
      throw data_error("digest mismatch for " + (round_dir(round) / "metrics.json").string());
    return nlohmann::json::parse(content);
  }

  /// Removes an incomplete (manifest-less) round directory so the round can
  /// be regenerated. Refuses to touch completed rounds.
  void discard_incomplete_round(int round) {
    namespace fs = std::filesystem;
    if (round_complete(round))
      throw data_error("refusing to discard completed round " + std::to_string(round));
    fs::remove_all(round_dir(round));
  }

  // DatasetSource
  bool has_round(int round) const override { return round_complete(round); }

  const std::vector<PreferenceRecord>& dataset(RecordRole role, int round) const override {
    if (!round_complete(round))
      throw scheduling_error("round " + std::to_string(round) + " is not in the store");
    auto state = load_round(round);  // populates cache_
    const RoundState& cached = cache_.at(round);
    switch (role) {
      case RecordRole::generator: return cached.generator_dataset;
      case RecordRole::solver: return cached.solver_dataset;
      case RecordRole::refiner: return cached.refiner_dataset;
    }
    throw scheduling_error("unknown record role");
  }

  // Run-level metadata -------------------------------------------------------

  void init_run(const std::string& config_hash, std::uint64_t seed) {
    namespace fs = std::filesystem;
    fs::create_directories(root_);
    fs::path path = root_ / "run.json";
    if (fs::exists(path)) {
      auto existing = nlohmann::json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
      if (existing.is_discarded() || !existing.is_object() || !existing.contains("config_hash") ||
          !existing.contains("rng_seed"))
        throw data_error("malformed run metadata at " + path.string());
      if (existing.at("config_hash").get<std::string>() != config_hash)
        throw data_error("run directory was produced with a different configuration; "
                         "refusing to resume");
      if (existing.at("rng_seed").get<std::uint64_t>() != seed)
        throw data_error("run directory was produced with a different seed; refusing to resume");
      return;
    }
    nlohmann::json run{{"schema", "aero/run@1"}, {"config_hash", config_hash}, {"rng_seed", seed}};
    write_file(path, run.dump(2) + "\n");
  }

private:
  nlohmann::json read_manifest(int round) const {
    namespace fs = std::filesystem;
    fs::path path = round_dir(round) / "manifest.json";
    if (!fs::exists(path))
      throw data_error("round " + std::to_string(round) + " has no manifest at " + path.string());
    auto manifest = nlohmann::json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
    if (manifest.is_discarded() || !manifest.is_object() ||
        manifest.value("schema", "") != "aero/manifest@1")
      throw data_error("malformed manifest for round " + std::to_string(round));
    return manifest;
  }

  static void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw data_error("short write to " + path.string());
  }

  static std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  }

  std::filesystem::path root_;
  mutable std::map<int, RoundState> cache_;
};

}  // namespace aero
