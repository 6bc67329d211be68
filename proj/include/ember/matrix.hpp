#pragma once

// Dense float32 matrix container.
//
// File layout, all integers little-endian:
//   0  char[4]  magic "EMBV"
//   4  u32      format version (1)
//   8  u64      rows
//   16 u64      columns
//   24 u32      element type (1 = float32)
//   28 u32      reserved, zero
//   32 rows * columns float32 values, row-major
//
// Labels live in a sidecar "<path>.labels": magic "EMBL", u32 version,
// u64 rows, then one i32 per row (-1 for unlabeled).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ember {

inline constexpr std::size_t kMatrixHeaderBytes = 32;
inline constexpr std::uint32_t kMatrixVersion = 1;
inline constexpr std::uint32_t kElementFloat32 = 1;

class MatrixError : public std::runtime_error {
 public:
  enum class Kind { io, magic, version, element_type, dimension, truncated };
  MatrixError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;  // rows * cols

  std::span<const float> row(std::size_t i) const { return std::span<const float>(values).subspan(i * cols, cols); }
  bool operator==(const Matrix&) const = default;
};

std::filesystem::path labels_path(const std::filesystem::path& matrix_path);

void write_matrix(const std::filesystem::path& path, const Matrix& m, std::span<const std::int32_t> labels);

struct LoadedMatrix {
  Matrix matrix;
  std::vector<std::int32_t> labels;  // empty when no sidecar exists
};

// expected_cols, when given, is checked against the header.
LoadedMatrix read_matrix(const std::filesystem::path& path, std::optional<std::size_t> expected_cols = std::nullopt);

// Appends rows without holding the matrix in memory; the row count in
// both headers is patched on close().
class MatrixWriter {
 public:
  MatrixWriter(const std::filesystem::path& path, std::size_t cols);
  ~MatrixWriter();
  MatrixWriter(const MatrixWriter&) = delete;
  MatrixWriter& operator=(const MatrixWriter&) = delete;

  void append(std::span<const float> row, std::int32_t label);
  void close();
  std::size_t rows() const { return rows_; }

 private:
  std::filesystem::path path_;
  std::size_t cols_;
  std::size_t rows_ = 0;
  std::ofstream data_;
  std::ofstream labels_;
  bool closed_ = false;
};

}  // namespace ember
