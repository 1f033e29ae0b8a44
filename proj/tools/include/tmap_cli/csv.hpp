#pragma once

#include <string>
#include <vector>

#include "tmap/error.hpp"
#include "tmap/standardizer.hpp"

namespace tmap::cli {

/// A path could not be opened for reading or writing.
class PathError : public Error {
 public:
  using Error::Error;
};

struct Table {
  std::vector<std::string> header;
  SampleMatrix values;
};

/// Comma-separated text with a mandatory header row and '.' decimals.
/// Throws MalformedInputError on ragged rows, empty cells, non-numeric or
/// non-finite values.
Table parse_csv(const std::string& text);
Table read_csv(const std::string& path);

/// Every value printed with 17 significant digits.
std::string format_csv(const std::vector<std::string>& header, const SampleMatrix& values);

/// "x1", ..., "xK".
std::vector<std::string> default_header(int dim);

std::string read_file(const std::string& path);

/// Writes to a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace tmap::cli
