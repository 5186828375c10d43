// Command-line surface for the dual-loop pipeline: run rounds, export
// training batches, audit external KTO scores, evaluate pseudo-labels, and
// dump per-round metrics.
//
// Exit codes: 0 success, 1 usage/config error, 2 backend failure,
// 3 data corruption.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "aero/config.hpp"
#include "aero/engine.hpp"

namespace {

namespace fs = std::filesystem;
using namespace aero;

EngineConfig resolve_config(const std::string& config_path, std::optional<std::uint64_t> seed) {
  EngineConfig config = config_path.empty() ? EngineConfig{} : load_config_file(config_path);
  if (seed) config.rng_seed = *seed;
  config.validate();
  return config;
}

int cmd_run(const EngineConfig& config, const std::string& out_dir, int rounds) {
  Engine engine(config, out_dir);
  engine.run_rounds(rounds);
  int done = engine.store().completed_rounds();
  std::cout << "completed " << done << " round(s) under " << out_dir << "\n";
  for (int t = 1; t <= done; ++t) {
    auto metrics = engine.store().load_metrics(t);
    const auto& zones = metrics.at("zone_distribution");
    std::cout << "round " << t << ": zpd=" << zones.at("zpd").get<double>()
              << " mastery=" << zones.at("mastery").get<double>()
              << " chaos=" << zones.at("chaos").get<double>();
    if (metrics.contains("solver_skill"))
      std::cout << " skill=" << metrics.at("solver_skill").get<double>();
    std::cout << "\n";
  }
  return 0;
}

int cmd_export(const std::string& store_dir, int round, const std::string& schedule_name,
               const std::string& out_path) {
  RoundStore store(store_dir);
  Schedule schedule = enum_from_name<Schedule>(schedule_name);
  export_batch(store, round, schedule, out_path);
  std::ifstream in(out_path);
  std::string line;
  std::string last;
  std::size_t records = 0;
  while (std::getline(in, line))
    if (!line.empty()) {
      last = line;
      ++records;
    }
  std::cout << "wrote " << (records >= 2 ? records - 2 : 0) << " records to " << out_path << "\n"
            << last << "\n";
  return 0;
}

int cmd_audit_kto(const EngineConfig& config, const std::string& scores_path,
                  std::optional<double> z0) {
  auto report = audit_kto(scores_path, config, z0);
  std::cout << "records: " << report.records << "\n"
            << "z0 (" << (report.z0_overridden ? "supplied" : "estimated")
            << "): " << report.z0 << "\n"
            << "loss: " << report.loss << "\n";
  for (const auto& [role, mean] : report.mean_value_per_role)
    std::cout << "mean value [" << role << "]: " << mean << " over "
              << report.records_per_role.at(role) << " record(s)\n";
  std::cout << "monotonicity: " << (report.monotonicity_ok ? "ok" : "VIOLATED") << " ("
            << report.monotonicity_checks << " spot checks)\n";
  return report.monotonicity_ok ? 0 : 3;
}

int cmd_eval_labels(const std::string& store_dir, int round, const std::string& oracle_path) {
  RoundStore store(store_dir);
  ExactNormalizedJudge judge;
  auto report = eval_labels(store, round, oracle_path, judge);
  std::cout << "majority-vote accuracy: " << report.precision.majority_vote << " ("
            << report.precision.majority_denominator << " task(s))\n"
            << "correction accuracy:    " << report.precision.icc << " ("
            << report.precision.icc_denominator << " task(s))\n";
  if (!report.tasks_without_oracle.empty()) {
    std::cout << "skipped " << report.tasks_without_oracle.size()
              << " task(s) with no oracle entry:\n";
    for (const auto& id : report.tasks_without_oracle) std::cout << "  " << id << "\n";
  }
  if (!report.unknown_oracle_ids.empty()) {
    std::cout << report.unknown_oracle_ids.size() << " oracle id(s) match no task\n";
  }
  return 0;
}

int cmd_metrics(const std::string& store_dir, const std::string& report_path,
                const std::string& table_path, const std::string& embeddings_path,
                int hash_dim) {
  RoundStore store(store_dir);
  int rounds = store.completed_rounds();
  if (rounds == 0) throw data_error("no completed rounds under " + store_dir);

  std::optional<nlohmann::json> embeddings;
  if (!embeddings_path.empty()) {
    std::ifstream in(embeddings_path);
    if (!in) throw data_error("cannot read " + embeddings_path);
    auto parsed = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object())
      throw data_error(embeddings_path + ": embeddings file must be a JSON object");
    embeddings = std::move(parsed);
  }

  nlohmann::json report = nlohmann::json::array();
  std::ostringstream table;
  table << "round\tmastery\tzpd\tchaos\tmean_entropy\tnull_fraction\td_avg\n";
  for (int t = 1; t <= rounds; ++t) {
    auto metrics = store.load_metrics(t);
    double d_avg = -1.0;
    if (embeddings || hash_dim > 0) {
      auto state = store.load_round(t);
      std::vector<std::vector<double>> vectors;
      for (const auto& task : state.tasks) {
        if (embeddings) {
          if (!embeddings->contains(task.id)) continue;
          vectors.push_back(embeddings->at(task.id).get<std::vector<double>>());
        } else {
          vectors.push_back(hash_embedding(task.question, hash_dim));
        }
      }
      if (vectors.size() >= 2) {
        d_avg = avg_pairwise_distance(vectors);
        metrics["d_avg"] = d_avg;
        metrics["d_avg_vectors"] = vectors.size();
      }
    }
    const auto& zones = metrics.at("zone_distribution");
    table << t << '\t' << zones.at("mastery").get<double>() << '\t'
          << zones.at("zpd").get<double>() << '\t' << zones.at("chaos").get<double>() << '\t'
          << metrics.at("mean_entropy").get<double>() << '\t'
          << metrics.at("null_answer_fraction").get<double>() << '\t' << d_avg << '\n';
    report.push_back(metrics);
  }

  if (report_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream out(report_path, std::ios::trunc);
    out << report.dump(2) << "\n";
    std::cout << "wrote " << report_path << "\n";
  }
  if (!table_path.empty()) {
    std::ofstream out(table_path, std::ios::trunc);
    out << table.str();
    std::cout << "wrote " << table_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-loop self-evolution pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global --config/--seed may follow the subcommand

  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "flat key = value config file")->expected(1);
  app.add_option("--seed", seed, "override the config rng seed");

  auto* run = app.add_subcommand("run", "execute rounds against the configured backend");
  std::string run_out = "out";
  int run_rounds_override = 0;
  run->add_option("--out", run_out, "output directory (round checkpoints)");
  run->add_option("--rounds", run_rounds_override, "round count (defaults to config)");

  auto* exp = app.add_subcommand("export", "export a training batch file");
  std::string exp_store;
  std::string exp_schedule = "staggered";
  std::string exp_out;
  int exp_round = 1;
  exp->add_option("--store", exp_store, "run directory")->required();
  exp->add_option("--round", exp_round, "round to export")->required();
  exp->add_option("--schedule", exp_schedule, "staggered | synchronous");
  exp->add_option("--out", exp_out, "output file")->required();

  auto* audit = app.add_subcommand("audit-kto", "replay external scores through the kernels");
  std::string audit_scores;
  std::optional<double> audit_z0;
  audit->add_option("--scores", audit_scores, "scored-records JSONL file")->required();
  audit->add_option("--z0", audit_z0, "override the estimated reference point");

  auto* eval = app.add_subcommand("eval-labels", "score pseudo-labels against an oracle file");
  std::string eval_store;
  std::string eval_oracle;
  int eval_round = 1;
  eval->add_option("--store", eval_store, "run directory")->required();
  eval->add_option("--round", eval_round, "round to score")->required();
  eval->add_option("--oracle", eval_oracle, "JSON object: task id -> answer")->required();

  auto* metrics = app.add_subcommand("metrics", "emit per-round reports and a plot table");
  std::string metrics_store;
  std::string metrics_report;
  std::string metrics_table;
  std::string metrics_embeddings;
  int metrics_hash_dim = 0;
  metrics->add_option("--store", metrics_store, "run directory")->required();
  metrics->add_option("--report", metrics_report, "structured report file (default stdout)");
  metrics->add_option("--table", metrics_table, "flat TSV table file");
  metrics->add_option("--embeddings", metrics_embeddings,
                      "JSON object: task id -> embedding vector");
  metrics->add_option("--hash-dim", metrics_hash_dim,
                      "use deterministic hash embeddings of this dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems map to 1, --help to 0
  }

  try {
    if (run->parsed()) {
      EngineConfig config = resolve_config(config_path, seed);
      int rounds = run_rounds_override > 0 ? run_rounds_override : config.rounds;
      return cmd_run(config, run_out, rounds);
    }
    if (exp->parsed()) return cmd_export(exp_store, exp_round, exp_schedule, exp_out);
    if (audit->parsed()) {
      EngineConfig config = resolve_config(config_path, seed);
      return cmd_audit_kto(config, audit_scores, audit_z0);
    }
    if (eval->parsed()) return cmd_eval_labels(eval_store, eval_round, eval_oracle);
    if (metrics->parsed())
      return cmd_metrics(metrics_store, metrics_report, metrics_table, metrics_embeddings,
                         metrics_hash_dim);
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const transport_error& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
