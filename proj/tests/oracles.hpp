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

// Reference implementations used only by tests. None of these call into the
// library code path they are checked against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "bitextmine/embedding.hpp"
#include "bitextmine/knn.hpp"
#include "bitextmine/projection.hpp"

namespace bitextmine::oracle {

inline double naive_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Full cosine row for every query, then a complete sort.
inline std::vector<NeighborList> brute_force_knn(const EmbeddingMatrix& q,
                                                 const EmbeddingMatrix& index,
                                                 std::size_t k) {
  std::vector<NeighborList> out;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    std::vector<Neighbor> all;
    for (std::size_t j = 0; j < index.rows(); ++j) {
      all.push_back({j, naive_dot(q.row(i), index.row(j))});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.cos > b.cos || (a.cos == b.cos && a.id < b.id);
    });
    all.resize(std::min(k, all.size()));
    out.push_back({i, all});
  }
  return out;
}

struct MarginTable {
  std::vector<std::vector<double>> margin;  // [src][tgt]
  std::vector<std::size_t> best_tgt;        // argmax over all targets
};

// Ratio margin over every (src, tgt) pair from a dense cosine matrix.
// Neighborhood means come from sorting full rows / columns.
inline MarginTable brute_force_margins(const EmbeddingMatrix& src,
                                       const EmbeddingMatrix& tgt, std::size_t k) {
  const std::size_t n = src.rows(), m = tgt.rows();
  std::vector<std::vector<double>> cos(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) cos[i][j] = naive_dot(src.row(i), tgt.row(j));
  auto top_mean = [k](std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    const std::size_t kk = std::min(k, v.size());
    double s = 0.0;
    for (std::size_t i = 0; i < kk; ++i) s += v[i] / (2.0 * double(kk));
    return s;
  };
  std::vector<double> src_term(n), tgt_term(m);
  for (std::size_t i = 0; i < n; ++i) src_term[i] = top_mean(cos[i]);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = cos[i][j];
    tgt_term[j] = top_mean(col);
  }
  MarginTable t;
  t.margin.assign(n, std::vector<double>(m));
  t.best_tgt.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      // sum cos/2k + sum cos/2k, literally
      t.margin[i][j] = cos[i][j] / (src_term[i] + tgt_term[j]);
      if (t.margin[i][j] > t.margin[i][t.best_tgt[i]]) t.best_tgt[i] = j;
    }
  }
  return t;
}

// Full (|a|+1) x (|b|+1) Levenshtein table.
template <typename Seq>
std::size_t dp_levenshtein(const Seq& a, const Seq& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
  return d[a.size()][b.size()];
}

// set(re.findall("[0-9]+", s))
inline std::set<std::string> regex_digit_runs(const std::string& s) {
  static const std::regex re("[0-9]+");
  std::set<std::string> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it)
    out.insert(it->str());
  return out;
}

// Triple-loop W x + b.
inline std::vector<double> naive_affine(const ProjectionHead& h, std::span<const double> x) {
  std::vector<double> u(h.dim);
  for (std::size_t r = 0; r < h.dim; ++r) {
    double s = h.bias[r];
    for (std::size_t c = 0; c < h.dim; ++c) s += h.weight[r * h.dim + c] * x[c];
    u[r] = s;
  }
  return u;
}

inline double naive_loss(const ProjectionHead& h, std::span<const double> x,
                         std::span<const double> y, int label) {
  const auto u = naive_affine(h, x);
  const double c = naive_dot(u, y) / std::sqrt(naive_dot(u, u) * naive_dot(y, y));
  return std::abs(c - label);
}

// Central differences of naive_loss over every weight and bias entry.
inline HeadGradient finite_difference_gradient(ProjectionHead h, std::span<const double> x,
                                               std::span<const double> y, int label,
                                               double step = 1e-5) {
  HeadGradient g{std::vector<double>(h.weight.size()), std::vector<double>(h.bias.size())};
  auto probe = [&](double& param) {
    const double saved = param;
    param = saved + step;
    const double up = naive_loss(h, x, y, label);
    param = saved - step;
    const double down = naive_loss(h, x, y, label);
    param = saved;
    return (up - down) / (2.0 * step);
  };
  for (std::size_t i = 0; i < h.weight.size(); ++i) g.weight[i] = probe(h.weight[i]);
  for (std::size_t i = 0; i < h.bias.size(); ++i) g.bias[i] = probe(h.bias[i]);
  return g;
}

// ||a - b|| / max(||a||, ||b||) over the concatenated parameters.
inline double relative_error(const HeadGradient& a, const HeadGradient& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  auto acc = [&](const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      diff += (x[i] - y[i]) * (x[i] - y[i]);
      na += x[i] * x[i];
      nb += y[i] * y[i];
    }
  };
  acc(a.weight, b.weight);
  acc(a.bias, b.bias);
  const double denom = std::max(std::sqrt(na), std::sqrt(nb));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

inline EmbeddingMatrix random_unit_matrix(std::mt19937_64& rng, std::size_t rows,
                                          std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  EmbeddingMatrix m(rows, dim);
  for (std::size_t i = 0; i < rows; ++i)
    for (double& v : m.row(i)) v = normal(rng);
  m.normalize();
  return m;
}

inline ProjectionHead random_head(std::mt19937_64& rng, std::size_t dim, double spread = 0.5) {
  std::normal_distribution<double> normal(0.0, spread);
  ProjectionHead h = ProjectionHead::identity(dim);
  for (double& w : h.weight) w += normal(rng);
  for (double& b : h.bias) b = normal(rng);
  return h;
}

// 64-bit FNV-1a, for pinning generated fixtures.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace bitextmine::oracle
