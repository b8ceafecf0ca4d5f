#ifndef TED_SERIALIZE_HPP
#define TED_SERIALIZE_HPP

#include <string>

#include <json.hpp>

#include "ted/dataset.hpp"
#include "ted/knn.hpp"
#include "ted/linear.hpp"
#include "ted/metrics.hpp"
#include "ted/network.hpp"

// JSON persistence. Doubles rely on nlohmann's shortest round-trip
// formatting, so save/load reproduces values bit-exactly and identical
// inputs give identical bytes.

namespace ted {

using nlohmann::json;

json to_json(const SpaceDescriptor& space);
SpaceDescriptor space_from_json(const json& j);

json to_json(const Discretizer& d);
Discretizer discretizer_from_json(const json& j);

json to_json(const FeatureStats& stats);
FeatureStats feature_stats_from_json(const json& j);

json to_json(const Network<double>& net);
Network<double> network_from_json(const json& j);

json to_json(const EmbeddingIndex<double>& idx);
EmbeddingIndex<double> index_from_json(const json& j);

json to_json(const LinearModel<double>& model);
LinearModel<double> linear_model_from_json(const json& j);

json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const json& j);

json matrix_to_json(const MatrixXd& m);  // row-major nested arrays
MatrixXd matrix_from_json(const json& j);

void write_json_file(const json& j, const std::string& path);
json read_json_file(const std::string& path);

}  // namespace ted

#endif  // TED_SERIALIZE_HPP
