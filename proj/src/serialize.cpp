#include "ted/serialize.hpp"

#include <fstream>

namespace ted {

namespace {

std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }
Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

std::string to_string(HeadKind k) {
  return k == HeadKind::SoftmaxCrossEntropy ? "softmax-cross-entropy" : "linear-mse";
}
HeadKind head_kind_from_string(const std::string& s) {
  if (s == "softmax-cross-entropy") return HeadKind::SoftmaxCrossEntropy;
  if (s == "linear-mse") return HeadKind::LinearMeanSquaredError;
  throw std::invalid_argument("unknown head kind '" + s + "'");
}

json vector_to_json(const VectorXd& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

VectorXd vector_from_json(const json& j) {
  VectorXd v(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& x : j) v(i++) = x.get<double>();
  return v;
}

}  // namespace

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  out["data"] = std::move(rows);
  return out;
}

MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  MatrixXd m(rows, cols);
  const json& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows) throw std::invalid_argument("matrix JSON: row count mismatch");
  for (Index i = 0; i < rows; ++i) {
    const json& row = data[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != cols)
      throw std::invalid_argument("matrix JSON: column count mismatch");
    for (Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json to_json(const SpaceDescriptor& space) {
  json j;
  switch (space.kind) {
    case SpaceKind::ContinuousScalar: j["kind"] = "continuous-scalar"; break;
    case SpaceKind::ContinuousVector:
      j["kind"] = "continuous-vector";
      j["dim"] = space.dim;
      break;
    case SpaceKind::Categorical:
      j["kind"] = "categorical";
      j["cardinality"] = space.cardinality;
      break;
  }
  if (!space.names.empty()) j["names"] = space.names;
  return j;
}

SpaceDescriptor space_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  SpaceDescriptor s;
  if (kind == "continuous-scalar")
    s = SpaceDescriptor::continuous_scalar();
  else if (kind == "continuous-vector")
    s = SpaceDescriptor::continuous_vector(j.at("dim").get<Index>());
  else if (kind == "categorical")
    s = SpaceDescriptor::categorical(j.at("cardinality").get<Index>());
  else
    throw std::invalid_argument("unknown space kind '" + kind + "'");
  if (j.contains("names")) s.names = j["names"].get<std::vector<std::string>>();
  return s;
}

json to_json(const Discretizer& d) { return json{{"low", d.low}, {"high", d.high}}; }

Discretizer discretizer_from_json(const json& j) {
  return Discretizer(j.at("low").get<double>(), j.at("high").get<double>());
}

json to_json(const FeatureStats& stats) {
  return json{{"mean", vector_to_json(stats.mean)}, {"std", vector_to_json(stats.stddev)}};
}

FeatureStats feature_stats_from_json(const json& j) {
  FeatureStats s;
  s.mean = vector_from_json(j.at("mean"));
  s.stddev = vector_from_json(j.at("std"));
  return s;
}

json to_json(const Network<double>& net) {
  json layers = json::array();
  for (const auto& l : net.hidden) {
    json layer;
    layer["weight"] = matrix_to_json(l.weight);
    layer["bias"] = vector_to_json(l.bias);
    layer["activation"] = to_string(l.activation);
    layers.push_back(std::move(layer));
  }
  json heads = json::array();
  for (const auto& h : net.heads) {
    json head;
    head["weight"] = matrix_to_json(h.weight);
    head["bias"] = vector_to_json(h.bias);
    head["kind"] = to_string(h.kind);
    heads.push_back(std::move(head));
  }
  json j;
  j["input_width"] = net.input_width;
  j["hidden"] = std::move(layers);
  j["heads"] = std::move(heads);
  return j;
}

Network<double> network_from_json(const json& j) {
  Network<double> net;
  net.input_width = j.at("input_width").get<Index>();
  for (const auto& layer : j.at("hidden")) {
    DenseLayer<double> l;
    l.weight = matrix_from_json(layer.at("weight"));
    l.bias = vector_from_json(layer.at("bias"));
    l.activation = activation_from_string(layer.at("activation").get<std::string>());
    net.hidden.push_back(std::move(l));
  }
  for (const auto& head : j.at("heads")) {
    OutputHead<double> h;
    h.weight = matrix_from_json(head.at("weight"));
    h.bias = vector_from_json(head.at("bias"));
    h.kind = head_kind_from_string(head.at("kind").get<std::string>());
    net.heads.push_back(std::move(h));
  }
  return net;
}

json to_json(const EmbeddingIndex<double>& idx) {
  json j;
  j["embeddings"] = matrix_to_json(idx.embeddings);
  j["labels"] = matrix_to_json(idx.labels);
  j["explanations"] = matrix_to_json(idx.explanations);
  j["ids"] = idx.ids;
  j["label_space"] = to_json(idx.label_space);
  j["explanation_space"] = to_json(idx.explanation_space);
  return j;
}

EmbeddingIndex<double> index_from_json(const json& j) {
  // Rows were normalized at build time; restore them verbatim (a
  // second normalization would perturb the last bits) and only check
  // the invariant.
  EmbeddingIndex<double> idx;
  idx.embeddings = matrix_from_json(j.at("embeddings"));
  idx.labels = matrix_from_json(j.at("labels"));
  idx.explanations = matrix_from_json(j.at("explanations"));
  idx.ids = j.at("ids").get<std::vector<std::string>>();
  idx.label_space = space_from_json(j.at("label_space"));
  idx.explanation_space = space_from_json(j.at("explanation_space"));
  const Index n = idx.embeddings.rows();
  if (n == 0 || idx.labels.rows() != n || idx.explanations.rows() != n ||
      static_cast<Index>(idx.ids.size()) != n)
    throw std::invalid_argument("index JSON: inconsistent row counts");
  for (Index i = 0; i < n; ++i)
    if (std::abs(idx.embeddings.row(i).norm() - 1.0) > 1e-9)
      throw std::invalid_argument("index JSON: row '" + idx.ids[static_cast<std::size_t>(i)] +
                                  "' is not unit-normalized");
  return idx;
}

json to_json(const LinearModel<double>& model) {
  json j;
  j["coefficients"] = matrix_to_json(model.coefficients);
  j["intercepts"] = vector_to_json(model.intercepts);
  j["penalty"] = model.penalty == PenaltyKind::Lasso ? "lasso" : "l21";
  j["alpha"] = model.alpha;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  return j;
}

LinearModel<double> linear_model_from_json(const json& j) {
  LinearModel<double> m;
  m.coefficients = matrix_from_json(j.at("coefficients"));
  m.intercepts = vector_from_json(j.at("intercepts"));
  m.penalty = j.at("penalty").get<std::string>() == "lasso" ? PenaltyKind::Lasso : PenaltyKind::RowGroupL21;
  m.alpha = j.at("alpha").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<Index>();
  return m;
}

json to_json(const MetricsReport& report) {
  json j;
  j["n"] = report.n;
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("y_accuracy", report.y_accuracy);
  put("y_mae_continuous", report.y_mae_continuous);
  put("y_mae_discretized", report.y_mae_discretized);
  put("e_accuracy", report.e_accuracy);
  put("e_mae_continuous", report.e_mae_continuous);
  put("e_mae_continuous_sum", report.e_mae_continuous_sum);
  put("e_mae_discretized", report.e_mae_discretized);
  put("e_mae_discretized_sum", report.e_mae_discretized_sum);
  put("ye_joint_accuracy", report.ye_joint_accuracy);
  return j;
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport r;
  r.n = j.at("n").get<Index>();
  auto get = [&j](const char* key) -> std::optional<double> {
    if (j.contains(key)) return j.at(key).get<double>();
    return std::nullopt;
  };
  r.y_accuracy = get("y_accuracy");
  r.y_mae_continuous = get("y_mae_continuous");
  r.y_mae_discretized = get("y_mae_discretized");
  r.e_accuracy = get("e_accuracy");
  r.e_mae_continuous = get("e_mae_continuous");
  r.e_mae_continuous_sum = get("e_mae_continuous_sum");
  r.e_mae_discretized = get("e_mae_discretized");
  r.e_mae_discretized_sum = get("e_mae_discretized_sum");
  r.ye_joint_accuracy = get("ye_joint_accuracy");
  return r;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write JSON file '" + path + "'");
  out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open JSON file '" + path + "'");
  return json::parse(in);
}

}  // namespace ted
