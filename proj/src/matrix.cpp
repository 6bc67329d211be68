#include "ember/matrix.hpp"

#include <bit>
#include <cstring>

namespace ember {
namespace {

static_assert(std::endian::native == std::endian::little, "matrix I/O assumes a little-endian host");

constexpr char kMagic[4] = {'E', 'M', 'B', 'V'};
constexpr char kLabelMagic[4] = {'E', 'M', 'B', 'L'};
constexpr std::size_t kLabelHeaderBytes = 16;

template <typename T>
void put(std::vector<char>& buf, std::size_t at, T v) {
  std::memcpy(buf.data() + at, &v, sizeof v);
}

template <typename T>
T get(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

std::vector<char> matrix_header(std::uint64_t rows, std::uint64_t cols) {
  std::vector<char> h(kMatrixHeaderBytes, 0);
  std::memcpy(h.data(), kMagic, 4);
  put<std::uint32_t>(h, 4, kMatrixVersion);
  put<std::uint64_t>(h, 8, rows);
  put<std::uint64_t>(h, 16, cols);
  put<std::uint32_t>(h, 24, kElementFloat32);
  return h;
}

std::vector<char> label_header(std::uint64_t rows) {
  std::vector<char> h(kLabelHeaderBytes, 0);
  std::memcpy(h.data(), kLabelMagic, 4);
  put<std::uint32_t>(h, 4, kMatrixVersion);
  put<std::uint64_t>(h, 8, rows);
  return h;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw MatrixError(MatrixError::Kind::io, "cannot open " + p.string() + " for writing");
  return out;
}

std::vector<std::int32_t> read_labels(const std::filesystem::path& p, std::size_t rows) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  char h[kLabelHeaderBytes];
  if (!in.read(h, sizeof h)) throw MatrixError(MatrixError::Kind::truncated, p.string() + ": truncated label header");
  if (std::memcmp(h, kLabelMagic, 4) != 0) throw MatrixError(MatrixError::Kind::magic, p.string() + ": bad label magic");
  if (get<std::uint32_t>(h + 4) != kMatrixVersion)
    throw MatrixError(MatrixError::Kind::version, p.string() + ": unsupported label version");
  if (get<std::uint64_t>(h + 8) != rows)
    throw MatrixError(MatrixError::Kind::dimension, p.string() + ": label count does not match matrix rows");
  std::vector<std::int32_t> labels(rows);
  if (rows && !in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(rows * 4)))
    throw MatrixError(MatrixError::Kind::truncated, p.string() + ": truncated labels");
  return labels;
}

}  // namespace

std::filesystem::path labels_path(const std::filesystem::path& matrix_path) {
  auto p = matrix_path;
  p += ".labels";
  return p;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, std::span<const std::int32_t> labels) {
  if (m.values.size() != m.rows * m.cols)
    throw MatrixError(MatrixError::Kind::dimension, "matrix value count does not match rows * cols");
  if (!labels.empty() && labels.size() != m.rows)
    throw MatrixError(MatrixError::Kind::dimension, "label count does not match matrix rows");
  MatrixWriter w(path, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) w.append(m.row(r), labels.empty() ? -1 : labels[r]);
  w.close();
}

LoadedMatrix read_matrix(const std::filesystem::path& path, std::optional<std::size_t> expected_cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MatrixError(MatrixError::Kind::io, "cannot open " + path.string());
  char h[kMatrixHeaderBytes];
  if (!in.read(h, sizeof h)) throw MatrixError(MatrixError::Kind::truncated, path.string() + ": truncated header");
  if (std::memcmp(h, kMagic, 4) != 0) throw MatrixError(MatrixError::Kind::magic, path.string() + ": bad magic");
  if (get<std::uint32_t>(h + 4) != kMatrixVersion)
    throw MatrixError(MatrixError::Kind::version, path.string() + ": unsupported version");
  if (get<std::uint32_t>(h + 24) != kElementFloat32)
    throw MatrixError(MatrixError::Kind::element_type, path.string() + ": unsupported element type");

  LoadedMatrix out;
  const std::uint64_t rows = get<std::uint64_t>(h + 8);
  const std::uint64_t cols = get<std::uint64_t>(h + 16);
  if (expected_cols && cols != *expected_cols)
    throw MatrixError(MatrixError::Kind::dimension, path.string() + ": has " + std::to_string(cols) +
                                                        " columns, expected " + std::to_string(*expected_cols));
  const auto file_size = std::filesystem::file_size(path);
  if (cols != 0 && rows > (file_size - kMatrixHeaderBytes) / 4 / cols)
    throw MatrixError(MatrixError::Kind::truncated, path.string() + ": payload shorter than header claims");
  if (file_size != kMatrixHeaderBytes + rows * cols * 4)
    throw MatrixError(MatrixError::Kind::truncated, path.string() + ": payload size does not match header");
  out.matrix.rows = rows;
  out.matrix.cols = cols;
  out.matrix.values.resize(rows * cols);
  if (!out.matrix.values.empty() &&
      !in.read(reinterpret_cast<char*>(out.matrix.values.data()), static_cast<std::streamsize>(rows * cols * 4)))
    throw MatrixError(MatrixError::Kind::truncated, path.string() + ": truncated payload");
  out.labels = read_labels(labels_path(path), rows);
  return out;
}

MatrixWriter::MatrixWriter(const std::filesystem::path& path, std::size_t cols)
    : path_(path), cols_(cols), data_(open_out(path)), labels_(open_out(labels_path(path))) {
  const auto h = matrix_header(0, cols);
  data_.write(h.data(), static_cast<std::streamsize>(h.size()));
  const auto l = label_header(0);
  labels_.write(l.data(), static_cast<std::streamsize>(l.size()));
}

MatrixWriter::~MatrixWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

void MatrixWriter::append(std::span<const float> row, std::int32_t label) {
  if (row.size() != cols_) throw MatrixError(MatrixError::Kind::dimension, "row width does not match matrix columns");
  data_.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  labels_.write(reinterpret_cast<const char*>(&label), 4);
  ++rows_;
}

void MatrixWriter::close() {
  if (closed_) return;
  closed_ = true;
  const auto h = matrix_header(rows_, cols_);
  data_.seekp(0);
  data_.write(h.data(), static_cast<std::streamsize>(h.size()));
  const auto l = label_header(rows_);
  labels_.seekp(0);
  labels_.write(l.data(), static_cast<std::streamsize>(l.size()));
  data_.close();
  labels_.close();
  if (!data_ || !labels_) throw MatrixError(MatrixError::Kind::io, "failed writing " + path_.string());
}

}  // namespace ember
