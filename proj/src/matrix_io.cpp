#include <crrn/matrix_io.hpp>
#include <crrn/trace.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace crrn {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

/// Next line that is not a comment or blank.
bool next_data_line(std::istream &in, std::string &line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%')
      continue;
    return true;
  }
  return false;
}

double parse_value(std::istringstream &ss, const char *what) {
  double v;
  if (!(ss >> v))
    throw ParseError(std::string("MatrixMarket: malformed ") + what);
  return v;
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little)
    return v;
  else
    return __builtin_bswap64(v);
}

} // namespace

Matrix read_matrix_market(std::istream &in) {
  std::string banner;
  if (!std::getline(in, banner))
    throw ParseError("MatrixMarket: empty input");
  std::istringstream hs(banner);
  std::string magic, object, format, field, symmetry;
  hs >> magic >> object >> format >> field >> symmetry;
  if (magic != "%%MatrixMarket")
    throw ParseError("MatrixMarket: missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix")
    throw ParseError("MatrixMarket: unsupported object '" + object + "'");
  if (format != "coordinate" && format != "array")
    throw ParseError("MatrixMarket: unsupported format '" + format + "'");
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError("MatrixMarket: unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError("MatrixMarket: unsupported symmetry '" + symmetry + "'");
  const bool symmetric = symmetry == "symmetric";

  std::string line;
  if (!next_data_line(in, line))
    throw ParseError("MatrixMarket: missing size line");
  std::istringstream size(line);
  long long rows = -1, cols = -1, nnz = -1;
  size >> rows >> cols;
  if (format == "coordinate")
    size >> nnz;
  if (!size || rows < 0 || cols < 0 || (format == "coordinate" && nnz < 0))
    throw ParseError("MatrixMarket: malformed size line");
  if (symmetric && rows != cols)
    throw ParseError("MatrixMarket: symmetric matrix must be square");

  Matrix a = Matrix::Zero(rows, cols);
  if (format == "coordinate") {
    for (long long e = 0; e < nnz; ++e) {
      if (!next_data_line(in, line))
        throw ParseError("MatrixMarket: fewer entries than declared");
      std::istringstream ss(line);
      long long i = 0, j = 0;
      if (!(ss >> i >> j))
        throw ParseError("MatrixMarket: malformed entry");
      const double v = parse_value(ss, "entry value");
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw ParseError("MatrixMarket: entry index out of range");
      a(i - 1, j - 1) = v;
      if (symmetric)
        a(j - 1, i - 1) = v;
    }
  } else {
    // column-major; symmetric arrays store the lower triangle only
    for (long long j = 0; j < cols; ++j) {
      for (long long i = symmetric ? j : 0; i < rows; ++i) {
        if (!next_data_line(in, line))
          throw ParseError("MatrixMarket: fewer entries than declared");
        std::istringstream ss(line);
        const double v = parse_value(ss, "array value");
        a(i, j) = v;
        if (symmetric)
          a(j, i) = v;
      }
    }
  }
  return a;
}

Matrix read_matrix_market(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream &out, const Matrix &a) {
  const bool symmetric = a.rows() == a.cols() && a == a.transpose();
  out << "%%MatrixMarket matrix array real "
      << (symmetric ? "symmetric" : "general") << '\n';
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = symmetric ? j : 0; i < a.rows(); ++i)
      out << format_double(a(i, j)) << '\n';
  if (!out)
    throw IoError("MatrixMarket: write failed");
}

void write_matrix_market(const std::string &path, const Matrix &a) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write '" + path + "'");
  write_matrix_market(out, a);
}

Matrix read_raw_binary(std::istream &in) {
  std::uint64_t header[2];
  if (!in.read(reinterpret_cast<char *>(header), sizeof header))
    throw ParseError("raw matrix: truncated header");
  const std::uint64_t rows = to_le(header[0]), cols = to_le(header[1]);
  constexpr auto limit = std::uint64_t{1} << 32;
  if (rows > limit || cols > limit)
    throw ParseError("raw matrix: implausible shape");
  std::vector<std::uint64_t> raw(rows * cols);
  if (!in.read(reinterpret_cast<char *>(raw.data()),
               static_cast<std::streamsize>(raw.size() * sizeof(double))))
    throw ParseError("raw matrix: truncated data");
  Matrix a(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      const std::uint64_t bits = to_le(raw[i * cols + j]);
      double v;
      std::memcpy(&v, &bits, sizeof v);
      a(static_cast<Index>(i), static_cast<Index>(j)) = v;
    }
  return a;
}

void write_raw_binary(std::ostream &out, const Matrix &a) {
  const std::uint64_t header[2] = {to_le(static_cast<std::uint64_t>(a.rows())),
                                   to_le(static_cast<std::uint64_t>(a.cols()))};
  out.write(reinterpret_cast<const char *>(header), sizeof header);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) {
      std::uint64_t bits;
      const double v = a(i, j);
      std::memcpy(&bits, &v, sizeof bits);
      bits = to_le(bits);
      out.write(reinterpret_cast<const char *>(&bits), sizeof bits);
    }
  if (!out)
    throw IoError("raw matrix: write failed");
}

Matrix load_matrix(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  char magic[14] = {};
  in.read(magic, sizeof magic);
  const bool mm = in.gcount() == static_cast<std::streamsize>(sizeof magic) &&
                  std::memcmp(magic, "%%MatrixMarket", sizeof magic) == 0;
  in.clear();
  in.seekg(0);
  return mm ? read_matrix_market(in) : read_raw_binary(in);
}

} // namespace crrn
