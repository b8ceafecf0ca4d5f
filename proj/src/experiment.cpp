#include "ted/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ted {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

Method method_from_string(const std::string& name) {
  if (name == "baseline-y") return Method::BaselineY;
  if (name == "baseline-e") return Method::BaselineE;
  if (name == "multitask") return Method::Multitask;
  if (name == "cartesian") return Method::Cartesian;
  if (name == "embed-y-knn") return Method::EmbedYKnn;
  if (name == "embed-e-knn") return Method::EmbedEKnn;
  if (name == "pairwise-y-knn") return Method::PairwiseYKnn;
  if (name == "pairwise-e-knn") return Method::PairwiseEKnn;
  if (name == "pairwise-ye-knn") return Method::PairwiseYEKnn;
  if (name == "lasso") return Method::Lasso;
  if (name == "multitask-l21") return Method::MultitaskL21;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::BaselineY: return "baseline-y";
    case Method::BaselineE: return "baseline-e";
    case Method::Multitask: return "multitask";
    case Method::Cartesian: return "cartesian";
    case Method::EmbedYKnn: return "embed-y-knn";
    case Method::EmbedEKnn: return "embed-e-knn";
    case Method::PairwiseYKnn: return "pairwise-y-knn";
    case Method::PairwiseEKnn: return "pairwise-e-knn";
    case Method::PairwiseYEKnn: return "pairwise-ye-knn";
    case Method::Lasso: return "lasso";
    case Method::MultitaskL21: return "multitask-l21";
  }
  return "?";
}

namespace {

bool is_knn_method(Method m) {
  return m == Method::EmbedYKnn || m == Method::EmbedEKnn || m == Method::PairwiseYKnn ||
         m == Method::PairwiseEKnn || m == Method::PairwiseYEKnn;
}

bool is_pairwise_method(Method m) {
  return m == Method::PairwiseYKnn || m == Method::PairwiseEKnn || m == Method::PairwiseYEKnn;
}

bool is_linear_method(Method m) { return m == Method::Lasso || m == Method::MultitaskL21; }

/// Pairwise methods aligned with E similarity keep an E-trained trunk;
/// the rest start from the Y-trained baseline.
bool trains_base_on_explanations(Method m) { return m == Method::EmbedEKnn || m == Method::PairwiseEKnn; }

NeighborRule neighbor_rule_from_string(const std::string& s) {
  if (s == "continuous-threshold") return NeighborRule::ContinuousThreshold;
  if (s == "categorical-exact") return NeighborRule::CategoricalExact;
  throw std::invalid_argument("unknown neighbor rule '" + s + "'");
}

std::string to_string(NeighborRule r) {
  return r == NeighborRule::ContinuousThreshold ? "continuous-threshold" : "categorical-exact";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

TrainConfig train_config_from_json(const json& j, std::uint64_t default_seed) {
  TrainConfig c;
  c.epochs = j.value("epochs", Index(1));
  c.batch_size = j.value("batch_size", Index(32));
  c.learning_rate = j.value("learning_rate", 0.01);
  if (j.contains("hidden_learning_rates"))
    c.hidden_learning_rates = j["hidden_learning_rates"].get<std::vector<double>>();
  if (j.contains("head_weights")) c.head_weights = j["head_weights"].get<std::vector<double>>();
  c.seed = j.value("seed", default_seed);
  c.shuffle = j.value("shuffle", true);
  return c;
}

json to_json(const TrainConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  if (!c.hidden_learning_rates.empty()) j["hidden_learning_rates"] = c.hidden_learning_rates;
  if (!c.head_weights.empty()) j["head_weights"] = c.head_weights;
  j["seed"] = c.seed;
  j["shuffle"] = c.shuffle;
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  split.validate();
  pairloss.validate();
  knn.validate();
  if (hidden_sizes.empty()) throw std::invalid_argument("config: at least one hidden layer is required");
  if (dataset.kind == DatasetSource::Kind::Csv && (dataset.path.empty() || dataset.schema_path.empty()))
    throw std::invalid_argument("config: csv dataset requires both path and schema");
  if (is_knn_method(method) && k_sweep.empty())
    throw std::invalid_argument("config: knn methods require a nonempty k sweep");
  for (Index k : k_sweep)
    if (k < 1) throw std::invalid_argument("config: k values must be >= 1");
  if (method == Method::Multitask && lambda_sweep.empty())
    throw std::invalid_argument("config: multitask requires a nonempty lambda sweep");
  if (is_pairwise_method(method) && pair_sampling.count < 1)
    throw std::invalid_argument("config: pairwise methods require pair_count >= 1");
  if (is_linear_method(method) && alpha < 0)
    throw std::invalid_argument("config: alpha must be nonnegative");
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t(1));

  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    const std::string source = d.value("source", std::string("ttt"));
    if (source == "ttt") {
      cfg.dataset.kind = DatasetSource::Kind::TicTacToe;
    } else if (source == "csv") {
      cfg.dataset.kind = DatasetSource::Kind::Csv;
      cfg.dataset.path = d.at("path").get<std::string>();
      cfg.dataset.schema_path = d.at("schema").get<std::string>();
    } else {
      throw std::invalid_argument("unknown dataset source '" + source + "'");
    }
  }

  if (j.contains("transforms")) {
    cfg.log_offset = j["transforms"].value("log_offset", false);
    cfg.standardize_features = j["transforms"].value("standardize", false);
  }

  if (j.contains("split")) {
    const json& s = j["split"];
    if (s.contains("fractions")) {
      const auto f = s["fractions"].get<std::vector<double>>();
      if (f.size() != 3) throw std::invalid_argument("split fractions must have 3 entries");
      cfg.split.train_fraction = f[0];
      cfg.split.validation_fraction = f[1];
      cfg.split.test_fraction = f[2];
    }
    cfg.split.seed = s.value("seed", cfg.seed);
  } else {
    cfg.split.seed = cfg.seed;
  }

  cfg.method = method_from_string(j.value("method", std::string("baseline-y")));

  if (j.contains("model")) {
    const json& m = j["model"];
    if (m.contains("hidden_sizes")) cfg.hidden_sizes = m["hidden_sizes"].get<std::vector<Index>>();
    if (m.contains("activations")) {
      cfg.activations.clear();
      for (const auto& a : m["activations"]) cfg.activations.push_back(activation_from_string(a.get<std::string>()));
    }
  }

  cfg.train = train_config_from_json(j.value("train", json::object()), cfg.seed + 1);
  {
    json pt = j.value("pair_train", json::object());
    if (!pt.contains("epochs")) pt["epochs"] = 15;
    if (!pt.contains("batch_size")) pt["batch_size"] = 64;
    cfg.pair_train = train_config_from_json(pt, cfg.seed + 2);
  }

  if (j.contains("pairloss")) {
    const json& p = j["pairloss"];
    cfg.pairloss.c1 = p.value("c1", cfg.pairloss.c1);
    cfg.pairloss.c2 = p.value("c2", cfg.pairloss.c2);
    cfg.pairloss.c3 = p.value("c3", cfg.pairloss.c3);
    cfg.pairloss.c4 = p.value("c4", cfg.pairloss.c4);
    cfg.pairloss.m1 = p.value("m1", cfg.pairloss.m1);
    cfg.pairloss.m2 = p.value("m2", cfg.pairloss.m2);
    cfg.pairloss.w = p.value("w", cfg.pairloss.w);
    if (p.contains("neighbor_rule_y"))
      cfg.pairloss.neighbor_rule_y = neighbor_rule_from_string(p["neighbor_rule_y"].get<std::string>());
    if (p.contains("neighbor_rule_e"))
      cfg.pairloss.neighbor_rule_e = neighbor_rule_from_string(p["neighbor_rule_e"].get<std::string>());
    cfg.pair_sampling.count = p.value("pair_count", cfg.pair_sampling.count);
    cfg.pair_sampling.seed = p.value("pair_seed", cfg.seed + 3);
    cfg.pair_sampling.options.with_replacement = p.value("with_replacement", true);
    cfg.pair_sampling.options.resample_zero_loss = p.value("resample_zero_loss", true);
  } else {
    cfg.pair_sampling.seed = cfg.seed + 3;
  }

  if (j.contains("knn")) {
    const json& k = j["knn"];
    if (k.contains("k")) cfg.k_sweep = k["k"].get<std::vector<Index>>();
    if (k.contains("sigma")) {
      if (k["sigma"].is_string()) {
        if (k["sigma"].get<std::string>() != "adaptive")
          throw std::invalid_argument("knn sigma must be a number or \"adaptive\"");
        cfg.knn.adaptive_sigma = true;
      } else {
        cfg.knn.adaptive_sigma = false;
        cfg.knn.sigma = k["sigma"].get<double>();
      }
    }
  }

  if (j.contains("lambda")) cfg.lambda_sweep = j["lambda"].get<std::vector<double>>();
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.out_dir = j.value("out", std::string());
  cfg.validate();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  json dataset;
  if (cfg.dataset.kind == DatasetSource::Kind::TicTacToe) {
    dataset["source"] = "ttt";
  } else {
    dataset["source"] = "csv";
    dataset["path"] = cfg.dataset.path;
    dataset["schema"] = cfg.dataset.schema_path;
  }
  j["dataset"] = dataset;
  j["transforms"] = json{{"log_offset", cfg.log_offset}, {"standardize", cfg.standardize_features}};
  j["split"] = json{{"fractions", {cfg.split.train_fraction, cfg.split.validation_fraction,
                                   cfg.split.test_fraction}},
                    {"seed", cfg.split.seed}};
  j["method"] = to_string(cfg.method);
  json model;
  model["hidden_sizes"] = cfg.hidden_sizes;
  if (!cfg.activations.empty()) {
    json acts = json::array();
    for (Activation a : cfg.activations) acts.push_back(to_string(a));
    model["activations"] = acts;
  }
  j["model"] = model;
  j["train"] = to_json(cfg.train);
  j["pair_train"] = to_json(cfg.pair_train);
  j["pairloss"] = json{{"c1", cfg.pairloss.c1},
                       {"c2", cfg.pairloss.c2},
                       {"c3", cfg.pairloss.c3},
                       {"c4", cfg.pairloss.c4},
                       {"m1", cfg.pairloss.m1},
                       {"m2", cfg.pairloss.m2},
                       {"w", cfg.pairloss.w},
                       {"neighbor_rule_y", to_string(cfg.pairloss.neighbor_rule_y)},
                       {"neighbor_rule_e", to_string(cfg.pairloss.neighbor_rule_e)},
                       {"pair_count", cfg.pair_sampling.count},
                       {"pair_seed", cfg.pair_sampling.seed},
                       {"with_replacement", cfg.pair_sampling.options.with_replacement},
                       {"resample_zero_loss", cfg.pair_sampling.options.resample_zero_loss}};
  json knn;
  knn["k"] = cfg.k_sweep;
  if (cfg.knn.adaptive_sigma)
    knn["sigma"] = "adaptive";
  else
    knn["sigma"] = cfg.knn.sigma;
  j["knn"] = knn;
  j["lambda"] = cfg.lambda_sweep;
  j["alpha"] = cfg.alpha;
  j["out"] = cfg.out_dir;
  return j;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// Data preparation
// ---------------------------------------------------------------------------

PreparedData prepare_data(const ExperimentConfig& cfg) {
  TripleDataset ds = cfg.dataset.kind == DatasetSource::Kind::TicTacToe
                         ? ttt::build_ttt_dataset()
                         : load_csv_triples(cfg.dataset.path, load_schema(cfg.dataset.schema_path));
  if (cfg.log_offset) ds = transform_log_offset(ds);

  PreparedData data;
  SplitResult parts = split(ds, cfg.split);
  data.train = std::move(parts.train);
  data.validation = std::move(parts.validation);
  data.test = std::move(parts.test);

  if (cfg.standardize_features) {
    auto [train_std, stats] = standardize(data.train);
    data.train = std::move(train_std);
    data.stats = stats;
    if (data.validation.rows() > 0) data.validation = standardize(data.validation, stats).first;
    if (data.test.rows() > 0) data.test = standardize(data.test, stats).first;
  }

  // Metric discretizers come from the training split only.
  if (data.train.label_space.is_continuous() && data.train.rows() >= 3) {
    std::vector<double> values(data.train.labels.data(), data.train.labels.data() + data.train.labels.size());
    data.discretizers.label = quantile_thresholds(values);
  }
  if (data.train.explanation_space.is_continuous() && data.train.rows() >= 3) {
    std::vector<double> values(data.train.explanations.data(),
                               data.train.explanations.data() + data.train.explanations.size());
    data.discretizers.explanation = quantile_thresholds(values);
  }
  return data;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

VectorXi class_column(const MatrixXd& m) {
  VectorXi c(m.rows());
  for (Index i = 0; i < m.rows(); ++i) c(i) = static_cast<int>(m(i, 0));
  return c;
}

HeadSpec head_for_space(const SpaceDescriptor& space, Index cols) {
  if (space.is_categorical()) return {space.cardinality, HeadKind::SoftmaxCrossEntropy};
  return {cols, HeadKind::LinearMeanSquaredError};
}

HeadTarget<double> target_for_space(const SpaceDescriptor& space, const MatrixXd& values) {
  if (space.is_categorical()) return HeadTarget<double>::of_classes(class_column(values));
  return HeadTarget<double>::of_values(values);
}

/// Argmax class per row as an n x 1 column of class ids.
MatrixXd argmax_classes(const MatrixXd& probabilities) {
  MatrixXd classes(probabilities.rows(), 1);
  for (Index i = 0; i < probabilities.rows(); ++i) {
    Index best = 0;
    probabilities.row(i).maxCoeff(&best);
    classes(i, 0) = static_cast<double>(best);
  }
  return classes;
}

MatrixXd head_predictions(const Network<double>& net, const MatrixXd& x, std::size_t head,
                          const SpaceDescriptor& space) {
  const ForwardTrace<double> t = forward_batch(net, x);
  if (space.is_categorical()) return argmax_classes(t.head_outputs[head]);
  return t.head_outputs[head];
}

std::string lambda_key(double lambda) { return "lambda=" + format_number(lambda); }
std::string k_key(Index k) { return "k=" + std::to_string(k); }

/// Embeddings for index building and querying. A dead-ReLU row (all
/// units zero) carries no direction in cosine space; such rows are
/// mapped to a shared fixed unit direction so they remain queryable
/// and deterministic.
MatrixXd knn_embeddings(const Network<double>& net, const MatrixXd& x) {
  MatrixXd emb = embed(net, x);
  for (Index i = 0; i < emb.rows(); ++i)
    if (!(emb.row(i).norm() > 1e-12)) {
      emb.row(i).setZero();
      emb(i, 0) = 1.0;
    }
  return emb;
}

Network<double> train_base_network(const ExperimentConfig& cfg, const TripleDataset& train,
                                   const std::vector<HeadSpec>& heads,
                                   const std::vector<HeadTarget<double>>& targets,
                                   const std::vector<double>& head_weights = {}) {
  Network<double> net = init_network<double>(train.features.cols(), cfg.hidden_sizes, heads, cfg.seed,
                                             cfg.activations);
  TrainConfig tc = cfg.train;
  tc.head_weights = head_weights;
  return train_sgd(std::move(net), train.features, targets, tc).net;
}

}  // namespace

TrainedState train_state(const ExperimentConfig& cfg, const PreparedData& data) {
  cfg.validate();
  const TripleDataset& train = data.train;
  if (train.rows() == 0) throw std::runtime_error("training split is empty");
  TrainedState state;

  switch (cfg.method) {
    case Method::BaselineY: {
      state.nets["NA"] = train_base_network(cfg, train, {head_for_space(train.label_space, train.labels.cols())},
                                            {target_for_space(train.label_space, train.labels)});
      break;
    }
    case Method::BaselineE: {
      state.nets["NA"] =
          train_base_network(cfg, train, {head_for_space(train.explanation_space, train.explanations.cols())},
                             {target_for_space(train.explanation_space, train.explanations)});
      break;
    }
    case Method::Multitask: {
      const std::vector<HeadSpec> heads = {head_for_space(train.label_space, train.labels.cols()),
                                           head_for_space(train.explanation_space, train.explanations.cols())};
      const std::vector<HeadTarget<double>> targets = {target_for_space(train.label_space, train.labels),
                                                       target_for_space(train.explanation_space, train.explanations)};
      for (double lambda : cfg.lambda_sweep)
        state.nets[lambda_key(lambda)] = train_base_network(cfg, train, heads, targets, {1.0, lambda});
      break;
    }
    case Method::Cartesian: {
      if (!train.label_space.is_categorical() || !train.explanation_space.is_categorical())
        throw std::invalid_argument("cartesian method requires categorical Y and E");
      const Index ny = train.label_space.cardinality;
      const Index ne = train.explanation_space.cardinality;
      VectorXi joint(train.rows());
      for (Index i = 0; i < train.rows(); ++i)
        joint(i) = static_cast<int>(cartesian_encode(static_cast<Index>(train.labels(i, 0)),
                                                     static_cast<Index>(train.explanations(i, 0)), ny, ne));
      state.nets["NA"] = train_base_network(cfg, train, {{ny * ne, HeadKind::SoftmaxCrossEntropy}},
                                            {HeadTarget<double>::of_classes(joint)});
      break;
    }
    case Method::EmbedYKnn:
    case Method::EmbedEKnn:
    case Method::PairwiseYKnn:
    case Method::PairwiseEKnn:
    case Method::PairwiseYEKnn: {
      Network<double> net =
          trains_base_on_explanations(cfg.method)
              ? train_base_network(cfg, train, {head_for_space(train.explanation_space, train.explanations.cols())},
                                   {target_for_space(train.explanation_space, train.explanations)})
              : train_base_network(cfg, train, {head_for_space(train.label_space, train.labels.cols())},
                                   {target_for_space(train.label_space, train.labels)});
      if (is_pairwise_method(cfg.method)) {
        const PairBatch batch = sample_pairs(train.labels, train.explanations, cfg.pair_sampling.count,
                                             cfg.pairloss, cfg.pair_sampling.seed, cfg.pair_sampling.options);
        const PairLossMode mode = cfg.method == Method::PairwiseYKnn   ? PairLossMode::SimilarityY
                                  : cfg.method == Method::PairwiseEKnn ? PairLossMode::SimilarityE
                                                                       : PairLossMode::Joint;
        net = train_embedding(std::move(net), train.features, batch, cfg.pair_train, cfg.pairloss, mode).net;
      }
      state.index = build_index(knn_embeddings(net, train.features), train.labels, train.explanations, train.ids,
                                train.label_space, train.explanation_space);
      state.nets["NA"] = std::move(net);
      break;
    }
    case Method::Lasso: {
      if (train.label_space.is_categorical())
        throw std::invalid_argument("lasso requires a continuous label");
      state.linears["NA"] = fit_lasso<double>(train.features, train.labels.col(0), cfg.alpha);
      break;
    }
    case Method::MultitaskL21: {
      if (train.label_space.is_categorical() || train.explanation_space.is_categorical())
        throw std::invalid_argument("multitask-l21 requires continuous Y and E");
      MatrixXd joint(train.rows(), train.labels.cols() + train.explanations.cols());
      joint << train.labels, train.explanations;
      state.linears["NA"] = fit_multitask_l21<double>(train.features, joint, cfg.alpha);
      break;
    }
  }
  return state;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

std::vector<SweepResult> evaluate_state(const ExperimentConfig& cfg, const PreparedData& data,
                                        const TrainedState& state) {
  const TripleDataset& test = data.test;
  if (test.rows() == 0) throw std::runtime_error("test split is empty");
  const EvalSpaces spaces{test.label_space, test.explanation_space};
  const Predictions truth{test.labels, test.explanations};

  std::vector<SweepResult> results;
  auto push = [&](std::string key, const Predictions& pred) {
    results.push_back({std::move(key), evaluate_run(pred, truth, spaces, data.discretizers)});
  };

  switch (cfg.method) {
    case Method::BaselineY: {
      Predictions pred;
      pred.labels = head_predictions(state.nets.at("NA"), test.features, 0, test.label_space);
      push("NA", pred);
      break;
    }
    case Method::BaselineE: {
      Predictions pred;
      pred.explanations = head_predictions(state.nets.at("NA"), test.features, 0, test.explanation_space);
      push("NA", pred);
      break;
    }
    case Method::Multitask: {
      for (double lambda : cfg.lambda_sweep) {
        const Network<double>& net = state.nets.at(lambda_key(lambda));
        Predictions pred;
        pred.labels = head_predictions(net, test.features, 0, test.label_space);
        pred.explanations = head_predictions(net, test.features, 1, test.explanation_space);
        push(lambda_key(lambda), pred);
      }
      break;
    }
    case Method::Cartesian: {
      const Index ny = test.label_space.cardinality;
      const Index ne = test.explanation_space.cardinality;
      const MatrixXd joint = head_predictions(state.nets.at("NA"), test.features, 0,
                                              SpaceDescriptor::categorical(ny * ne));
      Predictions pred;
      pred.labels.resize(test.rows(), 1);
      pred.explanations.resize(test.rows(), 1);
      for (Index i = 0; i < test.rows(); ++i) {
        const auto [y, e] = cartesian_decode(static_cast<Index>(joint(i, 0)), ny, ne);
        pred.labels(i, 0) = static_cast<double>(y);
        pred.explanations(i, 0) = static_cast<double>(e);
      }
      push("NA", pred);
      break;
    }
    case Method::EmbedYKnn:
    case Method::EmbedEKnn:
    case Method::PairwiseYKnn:
    case Method::PairwiseEKnn:
    case Method::PairwiseYEKnn: {
      if (!state.index) throw std::runtime_error("knn evaluation requires a built index");
      const EmbeddingIndex<double>& index = *state.index;
      const MatrixXd queries = knn_embeddings(state.nets.at("NA"), test.features);
      for (Index k : cfg.k_sweep) {
        KnnConfig kc = cfg.knn;
        kc.k = k;
        Predictions pred;
        const Index dy = index.label_space.is_categorical() ? 1 : index.labels.cols();
        const Index de = index.explanation_space.is_categorical() ? 1 : index.explanations.cols();
        pred.labels.resize(test.rows(), dy);
        pred.explanations.resize(test.rows(), de);
        for (Index i = 0; i < test.rows(); ++i) {
          const VectorXd query = queries.row(i).transpose();
          const KnnPrediction<double> p = predict(index, query, kc);
          pred.labels.row(i) = p.label.transpose();
          pred.explanations.row(i) = p.explanation.transpose();
        }
        push(k_key(k), pred);
      }
      break;
    }
    case Method::Lasso: {
      Predictions pred;
      pred.labels = state.linears.at("NA").predict(test.features);
      push("NA", pred);
      break;
    }
    case Method::MultitaskL21: {
      const MatrixXd joint = state.linears.at("NA").predict(test.features);
      Predictions pred;
      pred.labels = joint.leftCols(test.labels.cols());
      pred.explanations = joint.rightCols(test.explanations.cols());
      push("NA", pred);
      break;
    }
  }
  return results;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

std::string sweep_file_suffix(const std::string& key) {
  if (key == "NA") return "";
  std::string suffix = "-" + key;
  for (char& c : suffix)
    if (c == '=') c = '-';
  return suffix;
}

}  // namespace

void save_state(const TrainedState& state, const ExperimentConfig&, const std::string& dir,
                std::map<std::string, std::string>* artifact_paths) {
  fs::create_directories(dir);
  auto record = [&](const std::string& name, const std::string& filename) {
    if (artifact_paths) (*artifact_paths)[name] = filename;
  };
  for (const auto& [key, net] : state.nets) {
    const std::string filename = "model" + sweep_file_suffix(key) + ".json";
    write_json_file(to_json(net), (fs::path(dir) / filename).string());
    record(key == "NA" ? "model" : "model[" + key + "]", filename);
  }
  for (const auto& [key, model] : state.linears) {
    const std::string filename = "linear-model" + sweep_file_suffix(key) + ".json";
    write_json_file(to_json(model), (fs::path(dir) / filename).string());
    record(key == "NA" ? "linear-model" : "linear-model[" + key + "]", filename);
  }
  if (state.index) {
    write_json_file(to_json(*state.index), (fs::path(dir) / "index.json").string());
    record("index", "index.json");
  }
}

TrainedState load_state(const ExperimentConfig& cfg, const std::string& dir) {
  TrainedState state;
  auto path = [&dir](const std::string& filename) { return (fs::path(dir) / filename).string(); };
  if (is_linear_method(cfg.method)) {
    state.linears["NA"] = linear_model_from_json(read_json_file(path("linear-model.json")));
    return state;
  }
  if (cfg.method == Method::Multitask) {
    for (double lambda : cfg.lambda_sweep) {
      const std::string key = lambda_key(lambda);
      state.nets[key] = network_from_json(read_json_file(path("model" + sweep_file_suffix(key) + ".json")));
    }
    return state;
  }
  state.nets["NA"] = network_from_json(read_json_file(path("model.json")));
  if (is_knn_method(cfg.method)) state.index = index_from_json(read_json_file(path("index.json")));
  return state;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

json report_json(const RunRecord& record) {
  json results = json::array();
  for (const auto& r : record.results)
    results.push_back(json{{"sweep", r.key}, {"metrics", to_json(r.metrics)}});
  json j;
  j["config"] = record.config;
  j["results"] = std::move(results);
  j["artifacts"] = record.artifacts;
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord record;
  record.config = j.at("config");
  for (const auto& r : j.at("results"))
    record.results.push_back({r.at("sweep").get<std::string>(), metrics_from_json(r.at("metrics"))});
  if (j.contains("artifacts"))
    record.artifacts = j["artifacts"].get<std::map<std::string, std::string>>();
  return record;
}

std::string report_text(const RunRecord& record) {
  constexpr int kWidth = 12;
  std::ostringstream out;
  out << "method: " << record.config.value("method", std::string("?")) << "\n";
  const Index n = record.results.empty() ? 0 : record.results.front().metrics.n;
  out << "test instances: " << n << "\n\n";

  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("NA");
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << *v;
    return s.str();
  };
  out << std::left << std::setw(kWidth) << "sweep" << std::right << std::setw(kWidth) << "y_acc"
      << std::setw(kWidth) << "y_mae_disc" << std::setw(kWidth) << "y_mae_cont" << std::setw(kWidth)
      << "e_acc" << std::setw(kWidth) << "e_mae_disc" << std::setw(kWidth) << "e_mae_cont"
      << std::setw(kWidth) << "joint_acc" << "\n";
  for (const auto& r : record.results) {
    const MetricsReport& m = r.metrics;
    out << std::left << std::setw(kWidth) << r.key << std::right << std::setw(kWidth) << cell(m.y_accuracy)
        << std::setw(kWidth) << cell(m.y_mae_discretized) << std::setw(kWidth) << cell(m.y_mae_continuous)
        << std::setw(kWidth) << cell(m.e_accuracy) << std::setw(kWidth) << cell(m.e_mae_discretized)
        << std::setw(kWidth) << cell(m.e_mae_continuous) << std::setw(kWidth) << cell(m.ye_joint_accuracy)
        << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// End-to-end
// ---------------------------------------------------------------------------

RunRecord run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  const PreparedData data = prepare_data(cfg);
  const TrainedState state = train_state(cfg, data);

  RunRecord record;
  record.config = to_json(cfg);
  record.results = evaluate_state(cfg, data, state);
  record.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    write_json_file(record.config, (fs::path(cfg.out_dir) / "config.json").string());
    save_state(state, cfg, cfg.out_dir, &record.artifacts);
    if (data.stats) {
      write_json_file(to_json(*data.stats), (fs::path(cfg.out_dir) / "feature-stats.json").string());
      record.artifacts["feature-stats"] = "feature-stats.json";
    }
    if (data.discretizers.label) {
      write_json_file(to_json(*data.discretizers.label), (fs::path(cfg.out_dir) / "discretizer-y.json").string());
      record.artifacts["discretizer-y"] = "discretizer-y.json";
    }
    if (data.discretizers.explanation) {
      write_json_file(to_json(*data.discretizers.explanation),
                      (fs::path(cfg.out_dir) / "discretizer-e.json").string());
      record.artifacts["discretizer-e"] = "discretizer-e.json";
    }
    write_json_file(report_json(record), (fs::path(cfg.out_dir) / "report.json").string());
    std::ofstream txt((fs::path(cfg.out_dir) / "report.txt").string());
    txt << report_text(record);
  }
  return record;
}

void generate_ttt(const std::string& out_path, ttt::DatasetMode mode) {
  save_csv_triples(ttt::build_ttt_dataset(mode), out_path);
}

}  // namespace ted
