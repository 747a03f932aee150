#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "beamobs/config.h"
#include "beamobs/gramian.h"

namespace beamobs {

/// Column-oriented numeric table with optional metadata lines.
struct Table {
  std::vector<std::string> columns;
  /// rows() x columns.size().
  Eigen::MatrixXd values;
  /// Written as "# key: value" lines before the CSV header, or as a
  /// "metadata" object in JSON.
  std::map<std::string, std::string> metadata;

  void AddColumn(std::string name, const Eigen::Ref<const Eigen::VectorXd>& column);
};

/// Shortest text that round-trips to 17 significant digits; inf and nan
/// print as "inf", "-inf", "nan".
std::string FormatNumber(double value);

std::string ToCsv(const Table& table);
std::string ToJson(const Table& table);

/// Writes `stem`.csv or `stem`.json under `dir`; returns the path written.
std::filesystem::path WriteTable(const Table& table, const std::filesystem::path& dir,
                                 const std::string& stem, TableFormat format);

void WriteText(const std::filesystem::path& path, const std::string& text);

/// Square Gramian as a table (columns w0..w{d-1}) with kind, location,
/// horizon, epsilon and mode count in its metadata.
Table GramianTable(const Gramian& gramian);

}  // namespace beamobs
