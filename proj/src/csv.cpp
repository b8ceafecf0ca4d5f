#include "ted/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace ted {

using nlohmann::json;

ColumnRole parse_column_role(const std::string& name) {
  if (name == "feature") return ColumnRole::Feature;
  if (name == "label") return ColumnRole::Label;
  if (name == "explanation") return ColumnRole::Explanation;
  if (name == "id") return ColumnRole::IdColumn;
  if (name == "ignore") return ColumnRole::Ignore;
  throw std::invalid_argument("unknown column role '" + name + "'");
}

std::string to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::Feature: return "feature";
    case ColumnRole::Label: return "label";
    case ColumnRole::Explanation: return "explanation";
    case ColumnRole::IdColumn: return "id";
    case ColumnRole::Ignore: return "ignore";
  }
  return "?";
}

namespace {

json space_to_json(const SpaceDescriptor& s) {
  json j;
  switch (s.kind) {
    case SpaceKind::ContinuousScalar: j["kind"] = "continuous-scalar"; break;
    case SpaceKind::ContinuousVector:
      j["kind"] = "continuous-vector";
      j["dim"] = s.dim;
      break;
    case SpaceKind::Categorical:
      j["kind"] = "categorical";
      j["cardinality"] = s.cardinality;
      break;
  }
  if (!s.names.empty()) j["names"] = s.names;
  return j;
}

SpaceDescriptor space_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  SpaceDescriptor s;
  if (kind == "continuous-scalar") {
    s = SpaceDescriptor::continuous_scalar();
  } else if (kind == "continuous-vector") {
    s = SpaceDescriptor::continuous_vector(j.at("dim").get<Index>());
  } else if (kind == "categorical") {
    s = SpaceDescriptor::categorical(j.at("cardinality").get<Index>());
  } else {
    throw std::invalid_argument("unknown space kind '" + kind + "'");
  }
  if (j.contains("names")) s.names = j["names"].get<std::vector<std::string>>();
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  while (ptr < end && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) ++ptr;
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-numeric cell '" << cell << "' at data row " << row << ", column '" << column << "'";
    throw std::invalid_argument(msg.str());
  }
  return value;
}

}  // namespace

CsvSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file '" + path + "'");
  json j = json::parse(in);
  CsvSchema schema;
  for (const auto& [column, role] : j.at("columns").items())
    schema.columns[column] = parse_column_role(role.get<std::string>());
  schema.label_space = space_from_json(j.at("label_space"));
  schema.explanation_space = space_from_json(j.at("explanation_space"));
  return schema;
}

void save_schema(const CsvSchema& schema, const std::string& path) {
  json cols;
  for (const auto& [column, role] : schema.columns) cols[column] = to_string(role);
  json j;
  j["columns"] = cols;
  j["label_space"] = space_to_json(schema.label_space);
  j["explanation_space"] = space_to_json(schema.explanation_space);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write schema file '" + path + "'");
  out << j.dump(2) << "\n";
}

TripleDataset load_csv_triples(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV file '" + path + "' is empty (header row required)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);

  std::vector<ColumnRole> roles(header.size());
  std::vector<Index> feature_cols, label_cols, explanation_cols;
  Index id_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto it = schema.columns.find(header[c]);
    if (it == schema.columns.end())
      throw std::invalid_argument("column '" + header[c] + "' has no role in the schema");
    roles[c] = it->second;
    switch (it->second) {
      case ColumnRole::Feature: feature_cols.push_back(static_cast<Index>(c)); break;
      case ColumnRole::Label: label_cols.push_back(static_cast<Index>(c)); break;
      case ColumnRole::Explanation: explanation_cols.push_back(static_cast<Index>(c)); break;
      case ColumnRole::IdColumn: id_col = static_cast<Index>(c); break;
      case ColumnRole::Ignore: break;
    }
  }
  if (label_cols.empty()) throw std::invalid_argument("schema assigns no label column");
  if (explanation_cols.empty()) throw std::invalid_argument("schema assigns no explanation column");

  std::vector<std::vector<double>> feature_rows, label_rows, explanation_rows;
  std::vector<std::string> ids;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "ragged row " << row << ": expected " << header.size() << " cells, found " << cells.size();
      throw std::invalid_argument(msg.str());
    }
    std::vector<double> f, l, e;
    f.reserve(feature_cols.size());
    l.reserve(label_cols.size());
    e.reserve(explanation_cols.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      switch (roles[c]) {
        case ColumnRole::Feature: f.push_back(parse_cell(cells[c], row, header[c])); break;
        case ColumnRole::Label: l.push_back(parse_cell(cells[c], row, header[c])); break;
        case ColumnRole::Explanation: e.push_back(parse_cell(cells[c], row, header[c])); break;
        case ColumnRole::IdColumn: ids.push_back(cells[c]); break;
        case ColumnRole::Ignore: break;
      }
    }
    feature_rows.push_back(std::move(f));
    label_rows.push_back(std::move(l));
    explanation_rows.push_back(std::move(e));
    ++row;
  }

  const auto n = static_cast<Index>(feature_rows.size());
  TripleDataset ds;
  ds.features.resize(n, static_cast<Index>(feature_cols.size()));
  ds.labels.resize(n, static_cast<Index>(label_cols.size()));
  ds.explanations.resize(n, static_cast<Index>(explanation_cols.size()));
  for (Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    for (Index j = 0; j < ds.features.cols(); ++j) ds.features(i, j) = feature_rows[u][static_cast<std::size_t>(j)];
    for (Index j = 0; j < ds.labels.cols(); ++j) ds.labels(i, j) = label_rows[u][static_cast<std::size_t>(j)];
    for (Index j = 0; j < ds.explanations.cols(); ++j)
      ds.explanations(i, j) = explanation_rows[u][static_cast<std::size_t>(j)];
  }
  if (id_col >= 0) {
    ds.ids = std::move(ids);
  } else {
    ds.ids.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) ds.ids.push_back(std::to_string(i));
  }

  std::vector<std::string> feature_names;
  feature_names.reserve(feature_cols.size());
  for (Index c : feature_cols) feature_names.push_back(header[static_cast<std::size_t>(c)]);
  ds.feature_space = SpaceDescriptor::continuous_vector(std::max<Index>(Index(1), ds.features.cols()),
                                                        std::move(feature_names));
  ds.label_space = schema.label_space;
  ds.explanation_space = schema.explanation_space;
  if (ds.label_space.is_continuous() && ds.labels.cols() > 1 && ds.label_space.dim != ds.labels.cols())
    throw std::invalid_argument("label space dimension does not match label column count");
  if (ds.explanation_space.kind == SpaceKind::ContinuousVector &&
      ds.explanation_space.dim != ds.explanations.cols())
    throw std::invalid_argument("explanation space dimension does not match explanation column count");
  ds.validate();
  return ds;
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void save_csv_triples(const TripleDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file '" + path + "'");

  auto column_name = [](const SpaceDescriptor& space, const char* prefix, Index j) {
    if (static_cast<std::size_t>(j) < space.names.size()) return space.names[static_cast<std::size_t>(j)];
    return std::string(prefix) + std::to_string(j);
  };

  CsvSchema schema;
  out << "id";
  schema.columns["id"] = ColumnRole::IdColumn;
  for (Index j = 0; j < ds.features.cols(); ++j) {
    const std::string name = column_name(ds.feature_space, "f", j);
    out << ',' << name;
    schema.columns[name] = ColumnRole::Feature;
  }
  for (Index j = 0; j < ds.labels.cols(); ++j) {
    const std::string name = ds.labels.cols() == 1 && !ds.label_space.names.empty()
                                 ? ds.label_space.names.front()
                                 : column_name(ds.label_space, "y", j);
    out << ',' << name;
    schema.columns[name] = ColumnRole::Label;
  }
  for (Index j = 0; j < ds.explanations.cols(); ++j) {
    const std::string name = ds.explanations.cols() == 1 && !ds.explanation_space.names.empty()
                                 ? ds.explanation_space.names.front()
                                 : column_name(ds.explanation_space, "e", j);
    out << ',' << name;
    schema.columns[name] = ColumnRole::Explanation;
  }
  out << '\n';

  for (Index i = 0; i < ds.rows(); ++i) {
    out << (ds.ids.empty() ? std::to_string(i) : ds.ids[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < ds.features.cols(); ++j) out << ',' << format_number(ds.features(i, j));
    for (Index j = 0; j < ds.labels.cols(); ++j) out << ',' << format_number(ds.labels(i, j));
    for (Index j = 0; j < ds.explanations.cols(); ++j) out << ',' << format_number(ds.explanations(i, j));
    out << '\n';
  }

  schema.label_space = ds.label_space;
  schema.explanation_space = ds.explanation_space;
  save_schema(schema, path + ".schema.json");
}

}  // namespace ted
