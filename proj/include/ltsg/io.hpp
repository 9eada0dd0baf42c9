#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "ltsg/matrix.hpp"

namespace ltsg::io {

// 17 significant digits; round-trips every double.
std::string format_double(double value);
// Shortest text that still parses back to the same value.
std::string format_shortest(double value);
double parse_double(const std::string& token, const std::string& where);

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);

  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void close();

 private:
  void put(std::uint64_t v, int bytes);

  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  bool at_end();

 private:
  std::uint64_t get(int bytes);

  std::filesystem::path path_;
  std::ifstream in_;
};

// One row per line, space-separated, 17 significant digits.
void save_matrix_text(const MatrixD& m, const std::filesystem::path& path);
MatrixD load_matrix_text(const std::filesystem::path& path);

}  // namespace ltsg::io
