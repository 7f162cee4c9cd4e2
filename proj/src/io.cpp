#include "amor/io.hpp"

#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "amor/error.hpp"

namespace amor::io {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw IoError("cannot format double");
  return std::string(buf, end);
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw IoError("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string format_columns(const std::vector<std::string>& header_lines,
                           const std::vector<std::string>& column_names,
                           const std::vector<std::span<const double>>& columns) {
  if (columns.size() != column_names.size()) throw IoError("column name count mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw IoError("columns differ in length");
  }
  std::string out;
  for (const auto& line : header_lines) {
    out += "# ";
    out += line;
    out += '\n';
  }
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    out += i == 0 ? "" : "\t";
    out += column_names[i];
  }
  out += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += '\t';
      out += format_double(columns[c][r]);
    }
    out += '\n';
  }
  return out;
}

Columns parse_columns(std::string_view text) {
  Columns out;
  std::istringstream in{std::string(text)};
  std::string line;
  bool have_names = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      out.header_lines.push_back(line.size() > 2 ? line.substr(2) : std::string{});
      continue;
    }
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> cells;
    while (std::getline(fields, field, '\t')) cells.push_back(field);
    if (!have_names) {
      out.names = cells;
      out.columns.resize(cells.size());
      have_names = true;
      continue;
    }
    if (cells.size() != out.names.size()) throw IoError("ragged row in columnar text");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const char* first = cells[c].data();
      const char* last = first + cells[c].size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last) throw IoError("bad number '" + cells[c] + "'");
      out.columns[c].push_back(v);
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ h);
}

}  // namespace amor::io
