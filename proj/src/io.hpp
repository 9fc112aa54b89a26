#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace statecal::io {

// Shortest decimal that round-trips to the same double ("%.17g" precision,
// trimmed): parsing the text recovers the value bit-for-bit.
std::string format_double(double v);

struct Table {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // rows x columns
};

// Comma-separated, one header row, full round-trip numeric cells.
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

void ensure_dir(const std::filesystem::path& dir);

}  // namespace statecal::io
