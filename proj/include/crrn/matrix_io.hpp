#pragma once

#include <crrn/types.hpp>

#include <iosfwd>
#include <string>

namespace crrn {

/// Reads MatrixMarket `matrix coordinate|array real|integer
/// general|symmetric`. General matrices are returned as stored.
Matrix read_matrix_market(std::istream &in);
Matrix read_matrix_market(const std::string &path);

/// Writes a dense array. Symmetric matrices (exactly) use the symmetric
/// qualifier and store only the lower triangle. Values use %.17g.
void write_matrix_market(std::ostream &out, const Matrix &a);
void write_matrix_market(const std::string &path, const Matrix &a);

/// Raw little-endian `[u64 rows][u64 cols][f64 row-major entries]`.
Matrix read_raw_binary(std::istream &in);
void write_raw_binary(std::ostream &out, const Matrix &a);

/// Detects MatrixMarket by its `%%MatrixMarket` banner; raw binary otherwise.
Matrix load_matrix(const std::string &path);

} // namespace crrn
