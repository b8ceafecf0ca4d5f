#ifndef TED_CSV_HPP
#define TED_CSV_HPP

#include <map>
#include <string>

#include "ted/dataset.hpp"

namespace ted {

enum class ColumnRole { Feature, Label, Explanation, IdColumn, Ignore };

ColumnRole parse_column_role(const std::string& name);
std::string to_string(ColumnRole role);

/// Column-role map plus Y/E space declarations; mirrors the JSON
/// sidecar that accompanies every triple CSV.
struct CsvSchema {
  std::map<std::string, ColumnRole> columns;
  SpaceDescriptor label_space;
  SpaceDescriptor explanation_space;
};

CsvSchema load_schema(const std::string& path);
void save_schema(const CsvSchema& schema, const std::string& path);

/// Parses a comma-separated, UTF-8, header-first triple file. Every
/// header column must be assigned a role by the schema; cell errors
/// are reported with row/column location.
TripleDataset load_csv_triples(const std::string& path, const CsvSchema& schema);

/// Writes dataset + sidecar (path + ".schema.json"). Numbers use
/// shortest round-trip formatting, so identical data gives identical
/// bytes.
void save_csv_triples(const TripleDataset& ds, const std::string& path);

/// Shortest decimal string that round-trips to the same double.
std::string format_number(double v);

}  // namespace ted

#endif  // TED_CSV_HPP
