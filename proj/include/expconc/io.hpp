#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace expconc::io {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// One RFC-4180 record; fields containing separators or quotes are quoted.
std::string csv_row(const std::vector<std::string>& fields);
std::string csv_row(const std::vector<double>& values);

/// Write through a temporary file and rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace expconc::io
