#pragma once

// The two ModelBackend implementations plus the remote equivalence judge.
//
// EndpointBackend drives real models over the chat-completions protocol.
// SyntheticWorld/SyntheticBackend simulate a learner population for
// desk-scale experiments: correctness responds to a latent skill-vs-
// difficulty gap, and training batches move the skill.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aero/answers.hpp"
#include "aero/chat_client.hpp"
#include "aero/clustering.hpp"
#include "aero/core.hpp"
#include "aero/detail/sha256.hpp"
#include "aero/errors.hpp"
#include "aero/model_backend.hpp"
#include "aero/prompts.hpp"

namespace aero {

// ---------------------------------------------------------------------------
// Endpoint backend

class EndpointBackend : public ModelBackend {
public:
  EndpointBackend(ChatClient& client, const EngineConfig& config)
      : client_(client), config_(config) {}

  void set_generator_prompt(std::string tmpl) { generator_prompt_ = std::move(tmpl); }
  void set_solver_prompt(std::string tmpl) { solver_prompt_ = std::move(tmpl); }
  void set_refiner_prompt(std::string tmpl) { refiner_prompt_ = std::move(tmpl); }

  /// One generation request per task; malformed outputs are rejected and
  /// re-requested up to the retry budget, then fail with the raw payload.
  /// A question already seen this round counts as malformed: task ids are
  /// content-addressed, so duplicates cannot coexist in a round.
  std::vector<Task> generate_tasks(int count, int round) override {
    std::vector<Task> tasks;
    tasks.reserve(count);
    std::set<std::string> questions;
    for (int i = 0; i < count; ++i) {
      std::string last_payload;
      std::optional<Task> task;
      for (int attempt = 0; attempt < config_.retry.max_attempts && !task; ++attempt) {
        auto response = client_.complete(chat(generator_prompt_, 1));
        last_payload = response.texts.at(0);
        task = parse_generated_task(last_payload, round);
        if (task && !questions.insert(task->question).second) task.reset();
      }
      if (!task)
        throw transport_error(
            "generator kept returning malformed or duplicate output; last payload: " +
            last_payload);
      tasks.push_back(std::move(*task));
    }
    return tasks;
  }

  std::vector<Trajectory> sample_solutions(const Task& task, int count) override {
    auto response =
        client_.complete(chat(prompts::compose_solver_prompt(solver_prompt_, task.question), count));
    std::vector<Trajectory> out;
    out.reserve(count);
    for (int j = 0; j < count; ++j) {
      Trajectory t;
      t.task_id = task.id;
      t.index = j + 1;
      t.body = response.texts.at(j);
      t.answer = extract_boxed_answer(t.body);
      t.role = TrajectoryRole::solver;
      out.push_back(std::move(t));
    }
    return out;
  }

  Trajectory request_correction(const Task& task, const std::string& flawed_solution) override {
    auto response = client_.complete(
        chat(prompts::compose_refiner_prompt(refiner_prompt_, task.question, flawed_solution), 1));
    Trajectory t;
    t.task_id = task.id;
    t.index = 1;
    t.body = response.texts.at(0);
    t.answer = extract_boxed_answer(t.body);
    t.role = TrajectoryRole::refiner;
    return t;
  }

private:
  ChatRequest chat(std::string prompt, int n) const {
    ChatRequest request;
    request.model = client_.model();
    request.messages = {{"user", std::move(prompt)}};
    request.temperature = config_.temperature;
    request.n = n;
    request.max_tokens = config_.max_tokens;
    return request;
  }

  /// Strict one-object schema: a JSON object with a non-empty "question"
  /// and an optional "meta" object (knowledge_points list is flattened).
  static std::optional<Task> parse_generated_task(const std::string& payload, int round) {
    auto parsed = nlohmann::json::parse(payload, nullptr, /*allow_exceptions=*/false);
    if (!parsed.is_object()) return std::nullopt;
    for (const auto& [key, value] : parsed.items())
      if (key != "question" && key != "meta") return std::nullopt;
    if (!parsed.contains("question") || !parsed["question"].is_string()) return std::nullopt;
    Task task;
    task.question = parsed["question"].get<std::string>();
    if (task.question.empty()) return std::nullopt;
    if (parsed.contains("meta")) {
      if (!parsed["meta"].is_object()) return std::nullopt;
      for (const auto& [key, value] : parsed["meta"].items()) {
        if (value.is_string()) {
          task.meta[key] = value.get<std::string>();
        } else if (key == "knowledge_points" && value.is_array()) {
          std::string joined;
          for (const auto& point : value) {
            if (!point.is_string()) return std::nullopt;
            if (!joined.empty()) joined += "; ";
            joined += point.get<std::string>();
          }
          task.meta[key] = joined;
        } else {
          return std::nullopt;
        }
      }
    }
    task.round = round;
    task.origin = TaskOrigin::endpoint;
    task.id = task_id_for(round, task.question);
    return task;
  }

  ChatClient& client_;
  EngineConfig config_;
  std::string generator_prompt_{prompts::kGenerator};
  std::string solver_prompt_{prompts::kSolver};
  std::string refiner_prompt_{prompts::kRefiner};
};

/// LLM-backed equivalence judge speaking the same wire protocol. A verdict
/// must be the strict one-key boolean object; one reprompt is allowed
/// before the pair is scored non-equivalent.
class RemoteJudge : public EquivalenceJudge {
public:
  explicit RemoteJudge(ChatClient& client, double temperature = 0.0)
      : client_(client), temperature_(temperature) {}

  int reprompts = 0;   // observability for tests and audits
  int giveups = 0;

protected:
  bool judge_pair(const std::string& a, const std::string& b) override {
    for (int attempt = 0; attempt < 2; ++attempt) {
      ChatRequest request;
      request.model = client_.model();
      request.messages = {{"user", prompts::render_judge_prompt(prompts::kJudge, a, b)}};
      request.temperature = temperature_;
      request.n = 1;
      auto response = client_.complete(request);
      if (auto verdict = parse_verdict(response.texts.at(0))) return *verdict;
      ++reprompts;
    }
    ++giveups;
    std::cerr << "[aero] judge returned no parseable verdict for a pair; scoring 0\n";
    return false;
  }

private:
  static std::optional<bool> parse_verdict(const std::string& text) {
    auto parsed = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (!parsed.is_object() || parsed.size() != 1 || !parsed.contains("equivalent") ||
        !parsed["equivalent"].is_boolean())
      return std::nullopt;
    return parsed["equivalent"].get<bool>();
  }

  ChatClient& client_;
  double temperature_;
};

// ---------------------------------------------------------------------------
// Synthetic world

/// Deterministic learner population. All randomness flows from one seeded
/// stream with a fixed draw order:
///   - per minted task: two unit draws (Box-Muller normal for difficulty)
///   - per solver sample: one unit draw (answer present?), then one unit
///     draw (correct?), then one integer draw (distractor pick) only when
///     the answer is wrong
///   - per correction: the same triple as a solver sample
///
/// A sample is correct with probability sigmoid(steepness * (skill - d)).
/// Tasks are minted with difficulty centered on the generator's current
/// frontier estimate (the curriculum anchor), which is what generator-role
/// training updates; solver-role training moves the skill itself.
class SyntheticWorld {
public:
  SyntheticWorld(SyntheticSettings settings, std::uint64_t seed)
      : settings_(settings),
        skill_(settings.solver_skill),
        anchor_(settings.solver_skill),
        rng_(seed) {}

  const SyntheticSettings& settings() const { return settings_; }
  double solver_skill() const { return skill_; }
  double curriculum_anchor() const { return anchor_; }

  void reseed(std::uint64_t seed) { rng_.seed(seed); }

  double success_probability(double difficulty) const {
    return sigmoid(settings_.steepness * (skill_ - difficulty));
  }

  std::vector<Task> mint_tasks(int count, int round) {
    skill_at_generation_[round] = skill_;
    std::vector<Task> tasks;
    tasks.reserve(count);
    for (int i = 0; i < count; ++i) {
      double difficulty = clamp01(anchor_ + settings_.difficulty_spread * next_normal());
      Task task;
      task.round = round;
      task.origin = TaskOrigin::synthetic;
      task.question = "Synthetic benchmark task " + std::to_string(round) + "-" +
                      std::to_string(i + 1) + " [unit " +
                      detail::sha256_hex("unit/" + std::to_string(round) + "/" + std::to_string(i))
                          .substr(0, 8) +
                      "]: determine the canonical integer value of this unit.";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", difficulty);
      task.meta = {{"difficulty", buf},
                   {"domain", "synthetic"},
                   {"knowledge_points", "deterministic benchmark"},
                   {"background", "Entry from the seeded synthetic task pool."}};
      task.id = task_id_for(round, task.question);
      tasks.push_back(std::move(task));
    }
    return tasks;
  }

  std::vector<Trajectory> sample_solutions(const Task& task, int count) {
    double difficulty = task_difficulty(task);
    double p = success_probability(difficulty);
    std::vector<Trajectory> out;
    out.reserve(count);
    for (int j = 1; j <= count; ++j) {
      Trajectory t;
      t.task_id = task.id;
      t.index = j;
      t.role = TrajectoryRole::solver;
      auto answer = draw_answer(task, p);
      if (answer) {
        t.body = "Derivation for sample " + std::to_string(j) +
                 ": the unit reduces step by step to \\boxed{" + *answer + "}.";
        t.answer = answer;
      } else {
        t.body = "Derivation for sample " + std::to_string(j) +
                 ": the reduction stalls before reaching a final value.";
      }
      out.push_back(std::move(t));
    }
    return out;
  }

  Trajectory request_correction(const Task& task, const std::string&) {
    double difficulty = task_difficulty(task);
    double p = std::min(1.0, success_probability(difficulty) + settings_.refiner_boost);
    Trajectory t;
    t.task_id = task.id;
    t.index = 1;
    t.role = TrajectoryRole::refiner;
    auto answer = draw_answer(task, p);
    if (answer) {
      t.body =
          "Thinking Process: the candidate solution misreads the unit.\n"
          "Correct Solution: re-deriving from the unit definition.\n"
          "Final Answer: \\boxed{" + *answer + "}";
      t.answer = answer;
    } else {
      t.body =
          "Thinking Process: the candidate solution misreads the unit.\n"
          "Correct Solution: the re-derivation does not close.\n"
          "Final Answer: undetermined";
    }
    return t;
  }

  static std::string ground_truth(const Task& task) {
    return std::to_string(100 + detail::sha256_prefix64("truth/" + task.question) % 900);
  }

  double skill_at_generation(int round, double fallback) const {
    auto it = skill_at_generation_.find(round);
    return it == skill_at_generation_.end() ? fallback : it->second;
  }

  void set_training_state(double skill, double anchor,
                          std::map<int, double> skill_history) {
    skill_ = skill;
    anchor_ = anchor;
    skill_at_generation_ = std::move(skill_history);
  }

  nlohmann::json state_to_json() const {
    nlohmann::json history = nlohmann::json::object();
    for (const auto& [round, skill] : skill_at_generation_)
      history[std::to_string(round)] = skill;
    return {{"solver_skill", skill_}, {"curriculum_anchor", anchor_}, {"skill_history", history}};
  }

  void state_from_json(const nlohmann::json& j) {
    skill_ = j.at("solver_skill").get<double>();
    anchor_ = j.at("curriculum_anchor").get<double>();
    skill_at_generation_.clear();
    for (const auto& [round, skill] : j.at("skill_history").items())
      skill_at_generation_[std::stoi(round)] = skill.get<double>();
  }

private:
  friend SyntheticWorld apply_synthetic_training(const SyntheticWorld&,
                                                 std::span<const PreferenceRecord>);

  static double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
  }

  static double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

  double next_unit() {
    return static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0);  // [0, 1)
  }

  double next_normal() {
    double u1 = next_unit();
    double u2 = next_unit();
    if (u1 <= 0.0) u1 = 5e-324;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  static double task_difficulty(const Task& task) {
    auto it = task.meta.find("difficulty");
    if (it == task.meta.end())
      throw data_error("synthetic task " + task.id + " carries no difficulty");
    return std::strtod(it->second.c_str(), nullptr);
  }

  std::optional<std::string> draw_answer(const Task& task, double p_correct) {
    if (next_unit() < settings_.missing_answer_rate) return std::nullopt;
    if (next_unit() < p_correct) return ground_truth(task);
    std::uint64_t pick = rng_() % static_cast<std::uint64_t>(settings_.distractors_per_task);
    std::uint64_t base = detail::sha256_prefix64("distract/" + task.question);
    return std::to_string(1000 + (base + pick * 7919) % 9000);
  }

  SyntheticSettings settings_;
  double skill_;
  double anchor_;
  std::map<int, double> skill_at_generation_;
  std::mt19937_64 rng_;
};

/// One training step of the synthetic learner. The skill gains
/// learning_rate scaled by the batch's fraction of band-origin records
/// (generator records labeled 1, plus all solver/refiner records, which
/// only ever come from band tasks).
///
/// Generator records also re-aim the curriculum anchor at the skill that
/// was current when their round was diagnosed. When the same batch carries
/// solver/refiner data from that same round, the re-aim is damped: those
/// tasks are being mastered in the very same update, so their difficulty
/// reading is stale on arrival. A one-round offset between generator and
/// solver data leaves the re-aim intact.
inline SyntheticWorld apply_synthetic_training(const SyntheticWorld& world,
                                               std::span<const PreferenceRecord> batch) {
  SyntheticWorld next = world;
  if (batch.empty()) return next;

  std::size_t band_origin = 0;
  std::size_t generator_total = 0;
  std::size_t generator_positive = 0;
  int generator_round = 0;
  bool co_round_solver_data = false;
  for (const auto& rec : batch) {
    if (rec.role == RecordRole::generator) {
      ++generator_total;
      generator_round = std::max(generator_round, rec.round);
      if (rec.label == 1) {
        ++generator_positive;
        ++band_origin;
      }
    } else {
      ++band_origin;
    }
  }
  for (const auto& rec : batch)
    if (rec.role != RecordRole::generator && rec.round == generator_round && generator_total > 0)
      co_round_solver_data = true;

  double fraction = static_cast<double>(band_origin) / static_cast<double>(batch.size());
  next.skill_ = SyntheticWorld::clamp01(world.skill_ +
                                        world.settings_.learning_rate * fraction);

  if (generator_total > 0) {
    double positive_share =
        static_cast<double>(generator_positive) / static_cast<double>(generator_total);
    double weight = world.settings_.anchor_gain * positive_share;
    if (co_round_solver_data) weight *= world.settings_.co_round_damping;
    double target = world.skill_at_generation(generator_round, world.skill_);
    next.anchor_ = SyntheticWorld::clamp01(world.anchor_ + weight * (target - world.anchor_));
  }
  return next;
}

/// ModelBackend adapter over a SyntheticWorld.
class SyntheticBackend : public ModelBackend {
public:
  explicit SyntheticBackend(SyntheticWorld world) : world_(std::move(world)) {}

  SyntheticWorld& world() { return world_; }
  const SyntheticWorld& world() const { return world_; }
  void set_world(SyntheticWorld world) { world_ = std::move(world); }

  std::vector<Task> generate_tasks(int count, int round) override {
    return world_.mint_tasks(count, round);
  }
  std::vector<Trajectory> sample_solutions(const Task& task, int count) override {
    return world_.sample_solutions(task, count);
  }
  Trajectory request_correction(const Task& task, const std::string& flawed) override {
    return world_.request_correction(task, flawed);
  }

private:
  SyntheticWorld world_;
};

}  // namespace aero
