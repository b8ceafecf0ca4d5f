// Experiment CLI: dataset generation, config-driven training and
// evaluation, and report rendering.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ted/experiment.hpp"

namespace {

using ted::json;

json load_config_json(const std::string& path, const std::optional<std::uint64_t>& seed,
                      const std::optional<std::string>& out_dir, const std::vector<ted::Index>& k_values,
                      const std::optional<std::string>& sigma) {
  json j = ted::read_json_file(path);
  if (seed) j["seed"] = *seed;
  if (out_dir) j["out"] = *out_dir;
  if (!k_values.empty()) j["knn"]["k"] = k_values;
  if (sigma) {
    if (*sigma == "adaptive")
      j["knn"]["sigma"] = "adaptive";
    else
      j["knn"]["sigma"] = std::stod(*sigma);
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-and-explanation learning experiments on (feature, label, explanation) triples"};
  app.require_subcommand(1);

  // generate-ttt
  std::string ttt_out = "ttt.csv";
  std::string ttt_mode = "move-and-explanation";
  auto* gen_ttt = app.add_subcommand("generate-ttt", "Write the tic-tac-toe triple dataset as CSV + schema");
  gen_ttt->add_option("--out", ttt_out, "Output CSV path")->capture_default_str();
  gen_ttt->add_option("--mode", ttt_mode, "move-only | move-and-explanation")
      ->check(CLI::IsMember({"move-only", "move-and-explanation"}))
      ->capture_default_str();

  // generate-synth
  std::string synth_out = "synth.csv";
  ted::SyntheticSpec synth;
  std::uint64_t synth_seed = 1;
  auto* gen_synth = app.add_subcommand("generate-synth", "Write synthetic triples (E informative for Y)");
  gen_synth->add_option("--out", synth_out, "Output CSV path")->capture_default_str();
  gen_synth->add_option("--n", synth.n, "Instance count")->capture_default_str();
  gen_synth->add_option("--features", synth.feature_dim, "Feature dimension")->capture_default_str();
  gen_synth->add_option("--explanations", synth.explanation_dim, "Explanation dimension")->capture_default_str();
  gen_synth->add_option("--clusters", synth.clusters, "Gaussian mixture components")->capture_default_str();
  gen_synth->add_option("--noise-e", synth.explanation_noise, "Explanation noise stddev")->capture_default_str();
  gen_synth->add_option("--noise-y", synth.label_noise, "Label noise stddev")->capture_default_str();
  gen_synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();

  // shared options for config-driven commands
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  std::vector<ted::Index> k_override;
  std::optional<std::string> sigma_override;
  auto add_config_options = [&](CLI::App* cmd, bool with_knn_flags) {
    cmd->add_option("--config", config_path, "Experiment config JSON")->required();
    cmd->add_option("--seed", seed_override, "Override the master seed");
    cmd->add_option("--out", out_override, "Override the output directory");
    if (with_knn_flags) {
      cmd->add_option("--k", k_override, "Override the k sweep");
      cmd->add_option("--sigma", sigma_override, "Kernel bandwidth (number or \"adaptive\")");
    }
  };

  auto* run_cmd = app.add_subcommand("run", "Run an experiment end-to-end and write reports");
  add_config_options(run_cmd, true);

  auto* train_cmd = app.add_subcommand("train", "Train the configured method and persist its artifacts");
  add_config_options(train_cmd, false);

  std::string artifacts_dir;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate persisted artifacts on the test split");
  add_config_options(eval_cmd, true);
  eval_cmd->add_option("--artifacts", artifacts_dir, "Directory holding the trained artifacts");

  // report
  std::string report_input;
  std::string report_format = "text";
  auto* report_cmd = app.add_subcommand("report", "Render a report.json");
  report_cmd->add_option("--input", report_input, "Path to report.json")->required();
  report_cmd->add_option("--format", report_format, "text | json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen_ttt->parsed()) {
      ted::generate_ttt(ttt_out, ttt_mode == "move-only" ? ted::ttt::DatasetMode::MoveOnly
                                                         : ted::ttt::DatasetMode::MoveAndExplanation);
      std::cout << "wrote " << ttt_out << " and " << ttt_out << ".schema.json\n";
    } else if (gen_synth->parsed()) {
      ted::save_csv_triples(ted::generate_synthetic_triples(synth, synth_seed), synth_out);
      std::cout << "wrote " << synth_out << " and " << synth_out << ".schema.json\n";
    } else if (run_cmd->parsed()) {
      const ted::ExperimentConfig cfg = ted::experiment_config_from_json(
          load_config_json(config_path, seed_override, out_override, k_override, sigma_override));
      const ted::RunRecord record = ted::run_experiment(cfg);
      std::cout << ted::report_text(record);
      if (!cfg.out_dir.empty()) std::cout << "\nartifacts written to " << cfg.out_dir << "\n";
    } else if (train_cmd->parsed()) {
      const ted::ExperimentConfig cfg = ted::experiment_config_from_json(
          load_config_json(config_path, seed_override, out_override, {}, std::nullopt));
      if (cfg.out_dir.empty()) throw std::invalid_argument("train requires an output directory (--out)");
      const ted::PreparedData data = ted::prepare_data(cfg);
      const ted::TrainedState state = ted::train_state(cfg, data);
      ted::save_state(state, cfg, cfg.out_dir);
      ted::write_json_file(ted::to_json(cfg), (std::filesystem::path(cfg.out_dir) / "config.json").string());
      std::cout << "artifacts written to " << cfg.out_dir << "\n";
    } else if (eval_cmd->parsed()) {
      const ted::ExperimentConfig cfg = ted::experiment_config_from_json(
          load_config_json(config_path, seed_override, out_override, k_override, sigma_override));
      const std::string dir = artifacts_dir.empty() ? cfg.out_dir : artifacts_dir;
      if (dir.empty()) throw std::invalid_argument("evaluate requires --artifacts or an out directory");
      const ted::PreparedData data = ted::prepare_data(cfg);
      const ted::TrainedState state = ted::load_state(cfg, dir);
      ted::RunRecord record;
      record.config = ted::to_json(cfg);
      record.results = ted::evaluate_state(cfg, data, state);
      std::cout << ted::report_text(record);
      if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        ted::write_json_file(ted::report_json(record),
                             (std::filesystem::path(cfg.out_dir) / "report.json").string());
      }
    } else if (report_cmd->parsed()) {
      const ted::RunRecord record = ted::record_from_json(ted::read_json_file(report_input));
      if (report_format == "json")
        std::cout << ted::report_json(record).dump(2) << "\n";
      else
        std::cout << ted::report_text(record);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
