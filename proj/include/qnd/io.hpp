#pragma once

#include <string>
#include <vector>

namespace qnd {

/// Shortest round-trip decimal representation ('.' decimal point).
std::string format_double(double v);

/// Joins values with commas using format_double.
std::string csv_row(const std::vector<double>& values);

/// Two numeric columns, whitespace or comma separated; '#' comments and a
/// single header row are skipped. Errors name the file and line.
void read_two_column(const std::string& path, std::vector<double>& a, std::vector<double>& b);

}  // namespace qnd
