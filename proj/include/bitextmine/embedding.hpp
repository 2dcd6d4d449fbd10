/*
 * Copyright 2026 The bitextmine Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bitextmine/error.hpp"
#include "bitextmine/io.hpp"

namespace bitextmine {

// Dense row-major matrix, one row per sentence. Values are held in double;
// the on-disk format is f32.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), data_(rows * dim, 0.0) {}
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> data)
      : rows_(rows), dim_(dim), data_(std::move(data)) {
    if (data_.size() != rows_ * dim_) {
      throw ArgumentError("embedding data size does not match rows x dim");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  std::span<const double> data() const { return data_; }

  // Scales every row to unit Euclidean norm. Throws on a zero row.
  void normalize() {
    for (std::size_t i = 0; i < rows_; ++i) {
      auto r = row(i);
      double sq = 0.0;
      for (double v : r) sq += v * v;
      const double norm = std::sqrt(sq);
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DataError("embedding row " + std::to_string(i) +
                        " has zero or non-finite norm");
      }
      for (double& v : r) v /= norm;
    }
  }

  bool is_normalized(double tol = 1e-6) const {
    for (std::size_t i = 0; i < rows_; ++i) {
      double sq = 0.0;
      for (double v : row(i)) sq += v * v;
      if (std::abs(std::sqrt(sq) - 1.0) > tol) return false;
    }
    return true;
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

inline EmbeddingMatrix normalized(EmbeddingMatrix m) {
  m.normalize();
  return m;
}

// A contiguous run of rows of an EmbeddingMatrix. Views the parent matrix,
// which must outlive it.
struct Shard {
  std::size_t start_id = 0;
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::span<const double> data;

  std::span<const double> row(std::size_t i) const {
    return data.subspan(i * dim, dim);
  }
};

inline Shard whole(const EmbeddingMatrix& m) {
  return {0, m.rows(), m.dim(), m.data()};
}

inline std::vector<Shard> shard_matrix(const EmbeddingMatrix& m,
                                       std::size_t shard_size) {
  if (shard_size == 0) throw ArgumentError("shard_size must be positive");
  std::vector<Shard> shards;
  shards.reserve((m.rows() + shard_size - 1) / shard_size);
  for (std::size_t start = 0; start < m.rows(); start += shard_size) {
    const std::size_t n = std::min(shard_size, m.rows() - start);
    shards.push_back(
        {start, n, m.dim(), m.data().subspan(start * m.dim(), n * m.dim())});
  }
  return shards;
}

// ---------------------------------------------------------------------------
// EMBMAT01 file format: 8-byte magic, u32 LE dim, u64 LE rows, then
// rows x dim f32 LE row-major.

inline constexpr char kEmbeddingMagic[8] = {'E', 'M', 'B', 'M', 'A', 'T', '0', '1'};
inline constexpr std::size_t kEmbeddingHeaderSize = 8 + 4 + 8;

namespace detail {

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(const std::string& in, std::size_t pos) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace detail

// Values are narrowed to f32; the round trip is bit-exact for matrices whose
// entries are f32-representable.
inline std::string encode_embeddings(const EmbeddingMatrix& m) {
  if (m.dim() == 0) throw ArgumentError("embedding dim must be positive");
  if (m.dim() > UINT32_MAX) throw ArgumentError("embedding dim too large");
  std::string out(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  out.reserve(kEmbeddingHeaderSize + m.rows() * m.dim() * 4);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
  detail::put_le<std::uint64_t>(out, m.rows());
  for (double v : m.data()) {
    detail::put_le<std::uint32_t>(out,
                                  std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

inline EmbeddingMatrix decode_embeddings(const std::string& bytes,
                                         const std::string& name = "embeddings") {
  if (bytes.size() < kEmbeddingHeaderSize) {
    throw DataError(name + ": truncated header");
  }
  if (std::memcmp(bytes.data(), kEmbeddingMagic, sizeof(kEmbeddingMagic)) != 0) {
    throw DataError(name + ": bad magic");
  }
  const auto dim = detail::get_le<std::uint32_t>(bytes, 8);
  const auto rows = detail::get_le<std::uint64_t>(bytes, 12);
  if (dim == 0) throw DataError(name + ": dim is zero");
  const std::size_t payload = bytes.size() - kEmbeddingHeaderSize;
  if (rows > payload / 4 / dim || payload != rows * dim * 4) {
    throw DataError(name + ": size mismatch, header says " +
                    std::to_string(rows) + " rows of dim " + std::to_string(dim) +
                    " but payload has " + std::to_string(payload) + " bytes");
  }
  std::vector<double> data(rows * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(
        detail::get_le<std::uint32_t>(bytes, kEmbeddingHeaderSize + 4 * i));
  }
  return EmbeddingMatrix(rows, dim, std::move(data));
}

inline void write_embeddings(const EmbeddingMatrix& m,
                             const std::filesystem::path& path) {
  io::write_file(path, encode_embeddings(m));
}

inline EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(io::read_file(path), path.string());
}

// Reads, checks the row count against the paired corpus, and normalizes.
inline EmbeddingMatrix load_embeddings_for(const std::filesystem::path& path,
                                           std::size_t corpus_len) {
  EmbeddingMatrix m = read_embeddings(path);
  if (m.rows() != corpus_len) {
    throw DataError(path.string() + ": " + std::to_string(m.rows()) +
                    " rows but paired corpus has " + std::to_string(corpus_len) +
                    " sentences");
  }
  m.normalize();
  return m;
}

}  // namespace bitextmine
