#pragma once

#include "consamp/model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace consamp {

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;

  /// Column index by name, or -1.
  Index column(const std::string& name) const;
};

/// Reads a numeric CSV with a header row. Throws IoError on unreadable files
/// and PreconditionError on malformed rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Writes rows with the given header at 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& rows);

/// Header theta1..thetaD.
std::vector<std::string> theta_header(Index dim);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace consamp
