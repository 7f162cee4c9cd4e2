#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace amor::io {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::string sha256_hex(std::string_view bytes);

/// Columnar text: '#'-prefixed header lines, then one tab-separated row per
/// sample. Columns must share a length.
std::string format_columns(const std::vector<std::string>& header_lines,
                           const std::vector<std::string>& column_names,
                           const std::vector<std::span<const double>>& columns);

struct Columns {
  std::vector<std::string> header_lines;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

Columns parse_columns(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for a named stream: splitmix64(seed ^ fnv1a64(label)). Adding
/// new labels never changes the seeds of existing ones.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace amor::io
