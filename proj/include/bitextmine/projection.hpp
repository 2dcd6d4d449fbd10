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

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bitextmine/embedding.hpp"
#include "bitextmine/error.hpp"
#include "bitextmine/io.hpp"
#include "bitextmine/knn.hpp"

namespace bitextmine {

// Trainable affine map u = W x + b applied to frozen source embeddings.
// W is dim x dim, row-major.
struct ProjectionHead {
  std::size_t dim = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  static ProjectionHead identity(std::size_t dim) {
    ProjectionHead h{dim, std::vector<double>(dim * dim, 0.0),
                     std::vector<double>(dim, 0.0)};
    for (std::size_t i = 0; i < dim; ++i) h.weight[i * dim + i] = 1.0;
    return h;
  }

  double w(std::size_t r, std::size_t c) const { return weight[r * dim + c]; }

  friend bool operator==(const ProjectionHead&, const ProjectionHead&) = default;
};

// Same shape as the head's parameters.
struct HeadGradient {
  std::vector<double> weight;
  std::vector<double> bias;
};

inline std::vector<double> head_forward(const ProjectionHead& h,
                                        std::span<const double> x) {
  if (x.size() != h.dim) {
    throw ArgumentError("dim mismatch: head has dim " + std::to_string(h.dim) +
                        ", input has dim " + std::to_string(x.size()));
  }
  std::vector<double> u(h.bias);
  for (std::size_t r = 0; r < h.dim; ++r) {
    u[r] += dot(std::span<const double>(h.weight).subspan(r * h.dim, h.dim), x);
  }
  return u;
}

namespace detail {

struct CosineParts {
  std::vector<double> u;
  double u_norm = 0.0;
  double y_norm = 0.0;
  double cos = 0.0;
};

inline CosineParts projected_cosine(const ProjectionHead& h,
                                    std::span<const double> x,
                                    std::span<const double> y) {
  if (y.size() != h.dim) throw ArgumentError("dim mismatch between head and target");
  CosineParts p;
  p.u = head_forward(h, x);
  p.u_norm = std::sqrt(dot(p.u, p.u));
  p.y_norm = std::sqrt(dot(y, y));
  if (!(p.u_norm > 0.0) || !(p.y_norm > 0.0)) {
    throw ArgumentError("cosine undefined: zero-norm projected or target vector");
  }
  p.cos = dot(p.u, y) / (p.u_norm * p.y_norm);
  return p;
}

}  // namespace detail

inline double projected_cos(const ProjectionHead& h, std::span<const double> x,
                            std::span<const double> y) {
  return detail::projected_cosine(h, x, y).cos;
}

// |cos(Wx + b, y) - label|, label 1 for a parallel pair and 0 otherwise.
inline double pair_loss(const ProjectionHead& h, std::span<const double> x,
                        std::span<const double> y, int label) {
  return std::abs(projected_cos(h, x, y) - static_cast<double>(label));
}

// Accumulates scale * dL/d(W, b) into grad and returns the loss. At the kink
// (cos == label) the subgradient 0 is used.
inline double accumulate_pair_gradient(const ProjectionHead& h,
                                       std::span<const double> x,
                                       std::span<const double> y, int label,
                                       double scale, HeadGradient& grad) {
  const detail::CosineParts p = detail::projected_cosine(h, x, y);
  const double diff = p.cos - static_cast<double>(label);
  if (diff == 0.0) return 0.0;
  const double sign = diff > 0.0 ? 1.0 : -1.0;
  // dcos/du = y / (|u||y|) - cos * u / |u|^2
  const double a = sign * scale / (p.u_norm * p.y_norm);
  const double c = sign * scale * p.cos / (p.u_norm * p.u_norm);
  for (std::size_t r = 0; r < h.dim; ++r) {
    const double g = a * y[r] - c * p.u[r];
    grad.bias[r] += g;
    double* row = grad.weight.data() + r * h.dim;
    for (std::size_t col = 0; col < h.dim; ++col) row[col] += g * x[col];
  }
  return std::abs(diff);
}

inline HeadGradient zero_gradient(std::size_t dim) {
  return {std::vector<double>(dim * dim, 0.0), std::vector<double>(dim, 0.0)};
}

inline HeadGradient pair_gradient(const ProjectionHead& h, std::span<const double> x,
                                  std::span<const double> y, int label) {
  HeadGradient g = zero_gradient(h.dim);
  accumulate_pair_gradient(h, x, y, label, 1.0, g);
  return g;
}

// Row-wise head_forward, then unit-normalization of every row.
inline EmbeddingMatrix apply_projection(const ProjectionHead& h,
                                        const EmbeddingMatrix& m) {
  if (m.rows() > 0 && m.dim() != h.dim) {
    throw ArgumentError("dim mismatch: head has dim " + std::to_string(h.dim) +
                        ", matrix has dim " + std::to_string(m.dim()));
  }
  EmbeddingMatrix out(m.rows(), h.dim);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const std::vector<double> u = head_forward(h, m.row(i));
    const double norm = std::sqrt(dot(u, u));
    if (!(norm >= 1e-12) || !std::isfinite(norm)) {
      throw DataError("projected row " + std::to_string(i) + " has norm below 1e-12");
    }
    auto dst = out.row(i);
    for (std::size_t c = 0; c < h.dim; ++c) dst[c] = u[c] / norm;
  }
  return out;
}

// ---------------------------------------------------------------------------
// PROJHD01 checkpoint: 8-byte magic, u32 LE dim, W row-major f64 LE, b f64 LE.

inline constexpr char kHeadMagic[8] = {'P', 'R', 'O', 'J', 'H', 'D', '0', '1'};

inline std::string encode_head(const ProjectionHead& h) {
  std::string out(kHeadMagic, sizeof(kHeadMagic));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(h.dim));
  for (double v : h.weight) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  for (double v : h.bias) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

inline ProjectionHead decode_head(const std::string& bytes,
                                  const std::string& name = "head") {
  if (bytes.size() < 12) throw DataError(name + ": truncated header");
  if (std::memcmp(bytes.data(), kHeadMagic, sizeof(kHeadMagic)) != 0) {
    throw DataError(name + ": bad magic");
  }
  const std::size_t dim = detail::get_le<std::uint32_t>(bytes, 8);
  if (dim == 0) throw DataError(name + ": dim is zero");
  if (bytes.size() != 12 + 8 * (dim * dim + dim)) {
    throw DataError(name + ": size does not match dim " + std::to_string(dim));
  }
  ProjectionHead h{dim, std::vector<double>(dim * dim), std::vector<double>(dim)};
  std::size_t pos = 12;
  for (double& v : h.weight) {
    v = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes, pos));
    pos += 8;
  }
  for (double& v : h.bias) {
    v = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes, pos));
    pos += 8;
  }
  return h;
}

inline void write_head(const ProjectionHead& h, const std::filesystem::path& path) {
  io::write_file(path, encode_head(h));
}

inline ProjectionHead read_head(const std::filesystem::path& path) {
  return decode_head(io::read_file(path), path.string());
}

}  // namespace bitextmine
