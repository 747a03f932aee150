#include "beamobs/io.h"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "json.hpp"

namespace beamobs {

void Table::AddColumn(std::string name, const Eigen::Ref<const Eigen::VectorXd>& column) {
  if (!columns.empty() && column.size() != values.rows()) {
    throw std::invalid_argument("Table: column length mismatch for " + name);
  }
  const Eigen::Index rows = column.size();
  Eigen::MatrixXd grown(rows, values.cols() + 1);
  if (values.cols() > 0) grown.leftCols(values.cols()) = values;
  grown.col(values.cols()) = column;
  values = std::move(grown);
  columns.push_back(std::move(name));
}

std::string FormatNumber(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", value);
}

std::string ToCsv(const Table& table) {
  std::string out;
  for (const auto& [key, value] : table.metadata) {
    out += fmt::format("# {}: {}\n", key, value);
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      if (c) out += ',';
      out += FormatNumber(table.values(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string ToJson(const Table& table) {
  nlohmann::ordered_json doc;
  doc["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : table.metadata) doc["metadata"][key] = value;
  doc["columns"] = table.columns;
  auto& data = doc["data"] = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    auto column = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
      const double v = table.values(r, static_cast<Eigen::Index>(c));
      if (std::isfinite(v)) {
        column.push_back(v);
      } else {
        column.push_back(FormatNumber(v));
      }
    }
    data[table.columns[c]] = std::move(column);
  }
  return doc.dump(1) + "\n";
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::filesystem::path WriteTable(const Table& table, const std::filesystem::path& dir,
                                 const std::string& stem, TableFormat format) {
  const bool csv = format == TableFormat::kCsv;
  const std::filesystem::path path = dir / (stem + (csv ? ".csv" : ".json"));
  WriteText(path, csv ? ToCsv(table) : ToJson(table));
  return path;
}

Table GramianTable(const Gramian& gramian) {
  Table table;
  for (Eigen::Index c = 0; c < gramian.matrix.cols(); ++c) {
    table.AddColumn(fmt::format("w{}", c), gramian.matrix.col(c));
  }
  table.metadata["kind"] = std::string(ToString(gramian.kind));
  std::string where;
  for (std::size_t i = 0; i < gramian.sensor_locations.size(); ++i) {
    if (i) where += ' ';
    where += FormatNumber(gramian.sensor_locations[i]);
  }
  table.metadata["sensor_locations_m"] = where;
  table.metadata["horizon_s"] = FormatNumber(gramian.horizon);
  table.metadata["epsilon"] = gramian.epsilon ? FormatNumber(*gramian.epsilon) : "none";
  table.metadata["n_modes"] = std::to_string(gramian.num_modes);
  return table;
}

}  // namespace beamobs
