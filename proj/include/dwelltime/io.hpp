#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dwelltime/types.hpp"

namespace dwelltime {

// 17 significant digits, '.' decimal separator regardless of locale.
std::string format_number(double value);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;  // '\n' line endings

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes content to a temporary file in the target directory and renames it
// over path, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Deterministic JSON text (sorted keys, two-space indent, trailing newline).
std::string dump_json(const nlohmann::json& value);

// Run metadata goes beside the data file as <name>.meta.json.
void write_metadata(const std::filesystem::path& data_file, const nlohmann::json& meta);

nlohmann::json complex_pair(Complex z);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace dwelltime
