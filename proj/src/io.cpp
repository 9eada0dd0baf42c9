#include "ltsg/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "ltsg/error.hpp"

namespace ltsg::io {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string format_shortest(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE) {
    throw Error(ErrorKind::kMalformedFile, where + ": bad number '" + token + "'");
  }
  return v;
}

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

void BinaryWriter::put(std::uint64_t v, int bytes) {
  char buf[8];
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out_.write(buf, bytes);
}

void BinaryWriter::u32(std::uint32_t v) { put(v, 4); }
void BinaryWriter::u64(std::uint64_t v) { put(v, 8); }
void BinaryWriter::f64(double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(v));
  put(bits, 8);
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) throw Error(ErrorKind::kIo, "write failed: " + path_.string());
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorKind::kIo, "cannot read " + path.string());
}

std::uint64_t BinaryReader::get(int bytes) {
  unsigned char buf[8];
  in_.read(reinterpret_cast<char*>(buf), bytes);
  if (in_.gcount() != bytes) {
    throw Error(ErrorKind::kTruncatedFile, "truncated file: " + path_.string());
  }
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

std::uint32_t BinaryReader::u32() { return static_cast<std::uint32_t>(get(4)); }
std::uint64_t BinaryReader::u64() { return get(8); }
double BinaryReader::f64() {
  std::uint64_t bits = get(8);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

bool BinaryReader::at_end() {
  return in_.peek() == std::ifstream::traits_type::eof();
}

void save_matrix_text(const MatrixD& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ' ';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

MatrixD load_matrix_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    std::size_t n = 0;
    while (ss >> tok) {
      values.push_back(parse_double(tok, path.string()));
      ++n;
    }
    if (rows == 0) {
      cols = n;
    } else if (n != cols) {
      throw Error(ErrorKind::kDimensionMismatch,
                  path.string() + ": ragged matrix at row " + std::to_string(rows));
    }
    ++rows;
  }
  MatrixD m(rows, cols);
  m.data() = std::move(values);
  return m;
}

}  // namespace ltsg::io
