#ifndef TED_EXPERIMENT_HPP
#define TED_EXPERIMENT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ted/csv.hpp"
#include "ted/knn.hpp"
#include "ted/linear.hpp"
#include "ted/metrics.hpp"
#include "ted/network.hpp"
#include "ted/pairloss.hpp"
#include "ted/serialize.hpp"
#include "ted/synthetic.hpp"
#include "ted/tictactoe.hpp"

// End-to-end experiment pipeline: ingest or generate triples, train
// the selected method, predict labels and explanations for the test
// split, evaluate, and persist every artifact. Fully deterministic for
// a fixed config.

namespace ted {

enum class Method {
  BaselineY,
  BaselineE,
  Multitask,
  Cartesian,
  EmbedYKnn,
  EmbedEKnn,
  PairwiseYKnn,
  PairwiseEKnn,
  PairwiseYEKnn,
  Lasso,
  MultitaskL21,
};

Method method_from_string(const std::string& name);
std::string to_string(Method method);

struct DatasetSource {
  enum class Kind { TicTacToe, Csv };
  Kind kind = Kind::TicTacToe;
  std::string path;         // csv only
  std::string schema_path;  // csv only
};

struct PairSamplingConfig {
  Index count = 10000;
  std::uint64_t seed = 0;
  PairSamplingOptions options;
};

struct ExperimentConfig {
  DatasetSource dataset;
  bool log_offset = false;
  bool standardize_features = false;
  SplitSpec split;
  Method method = Method::BaselineY;
  std::vector<Index> hidden_sizes{64};
  std::vector<Activation> activations;  // empty = ReLU everywhere
  TrainConfig train;
  TrainConfig pair_train;
  PairLossConfig pairloss;
  PairSamplingConfig pair_sampling;
  KnnConfig knn;  // sigma policy; k comes from k_sweep
  std::vector<Index> k_sweep{1, 2, 5, 10, 15, 20};
  std::vector<double> lambda_sweep{1.0};
  double alpha = 0.01;  // lasso / l21 penalty weight
  std::uint64_t seed = 1;
  std::string out_dir;  // empty = in-memory run, nothing persisted

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const json& j);
json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::string& path);

/// Transformed and split data plus the fitted preprocessing state.
struct PreparedData {
  TripleDataset train;
  TripleDataset validation;
  TripleDataset test;
  std::optional<FeatureStats> stats;
  EvalDiscretizers discretizers;  // fitted on the training split
};

PreparedData prepare_data(const ExperimentConfig& cfg);

/// Everything training produces, keyed by sweep value where the
/// method sweeps ("NA" otherwise).
struct TrainedState {
  std::map<std::string, Network<double>> nets;
  std::map<std::string, LinearModel<double>> linears;
  std::optional<EmbeddingIndex<double>> index;
};

TrainedState train_state(const ExperimentConfig& cfg, const PreparedData& data);
void save_state(const TrainedState& state, const ExperimentConfig& cfg, const std::string& dir,
                std::map<std::string, std::string>* artifact_paths = nullptr);
TrainedState load_state(const ExperimentConfig& cfg, const std::string& dir);

struct SweepResult {
  std::string key;
  MetricsReport metrics;
};

std::vector<SweepResult> evaluate_state(const ExperimentConfig& cfg, const PreparedData& data,
                                        const TrainedState& state);

struct RunRecord {
  json config;  // canonical snapshot of the ExperimentConfig
  std::vector<SweepResult> results;
  std::map<std::string, std::string> artifacts;
  double duration_seconds = 0;  // informational only; kept out of the canonical report
};

/// The full pipeline. Persists artifacts, report.json, and report.txt
/// under cfg.out_dir when set.
RunRecord run_experiment(const ExperimentConfig& cfg);

/// Canonical report document; two runs of the same config produce
/// byte-identical output.
json report_json(const RunRecord& record);
RunRecord record_from_json(const json& j);
std::string report_text(const RunRecord& record);

/// Writes the 4,520-row triple CSV plus schema sidecar. Byte-identical
/// across runs.
void generate_ttt(const std::string& out_path, ttt::DatasetMode mode = ttt::DatasetMode::MoveAndExplanation);

}  // namespace ted

#endif  // TED_EXPERIMENT_HPP
