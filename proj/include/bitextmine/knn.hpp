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
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "bitextmine/embedding.hpp"
#include "bitextmine/error.hpp"
#include "bitextmine/io.hpp"
#include "bitextmine/parallel.hpp"

namespace bitextmine {

struct Neighbor {
  std::size_t id = 0;
  double cos = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Result order: higher cosine first, ties broken by ascending id.
inline bool ranks_before(const Neighbor& a, const Neighbor& b) {
  if (a.cos != b.cos) return a.cos > b.cos;
  return a.id < b.id;
}

struct NeighborList {
  std::size_t query_id = 0;
  std::vector<Neighbor> neighbors;

  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

// Dot product with four interleaved accumulators, reduced in a fixed order.
inline double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += a[i] * b[i];
    acc[1] += a[i + 1] * b[i + 1];
    acc[2] += a[i + 2] * b[i + 2];
    acc[3] += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) acc[i & 3] += a[i] * b[i];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

namespace detail {

// Bounded sorted buffer holding the best k neighbors seen so far.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { items_.reserve(k + 1); }

  void offer(const Neighbor& n) {
    if (items_.size() == k_ && !ranks_before(n, items_.back())) return;
    auto pos = std::upper_bound(items_.begin(), items_.end(), n, ranks_before);
    items_.insert(pos, n);
    if (items_.size() > k_) items_.pop_back();
  }

  std::vector<Neighbor> take() { return std::move(items_); }

 private:
  std::size_t k_;
  std::vector<Neighbor> items_;
};

inline void check_search_args(const EmbeddingMatrix& queries, std::size_t dim,
                              std::size_t k) {
  if (k == 0) throw ArgumentError("k must be positive");
  if (queries.rows() > 0 && queries.dim() != dim) {
    throw ArgumentError("dim mismatch: queries have dim " +
                        std::to_string(queries.dim()) + ", index has dim " +
                        std::to_string(dim));
  }
}

inline std::vector<Neighbor> search_shard(std::span<const double> query,
                                          const Shard& shard, std::size_t k) {
  TopK top(k);
  for (std::size_t r = 0; r < shard.rows; ++r) {
    top.offer({shard.start_id + r, dot(query, shard.row(r))});
  }
  return top.take();
}

}  // namespace detail

// Exact top-k of every query within one shard. Ids are global (offset by
// shard.start_id). Both sides are expected to be unit-normalized.
inline std::vector<NeighborList> knn_shard(const EmbeddingMatrix& queries,
                                           const Shard& shard, std::size_t k) {
  detail::check_search_args(queries, shard.dim, k);
  std::vector<NeighborList> out(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    out[q] = {q, detail::search_shard(queries.row(q), shard, k)};
  }
  return out;
}

// Global top-k for one query from per-shard partial lists. Partials must come
// from disjoint id ranges; a repeated id is reported as an overlap.
inline NeighborList merge_neighbor_lists(std::span<const NeighborList> partials,
                                         std::size_t k) {
  if (k == 0) throw ArgumentError("k must be positive");
  NeighborList merged;
  if (partials.empty()) return merged;
  merged.query_id = partials.front().query_id;
  std::vector<Neighbor> all;
  std::unordered_set<std::size_t> seen;
  for (const NeighborList& p : partials) {
    if (p.query_id != merged.query_id) {
      throw ArgumentError("merging neighbor lists of different queries");
    }
    for (const Neighbor& n : p.neighbors) {
      if (!seen.insert(n.id).second) {
        throw ArgumentError("overlapping id ranges: id " + std::to_string(n.id) +
                            " appears in more than one partial list");
      }
      all.push_back(n);
    }
  }
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep),
                    all.end(), ranks_before);
  all.resize(keep);
  merged.neighbors = std::move(all);
  return merged;
}

// Sharded exact search: per query, every shard is searched and the partial
// lists are folded in shard order. Output does not depend on shard_size or
// on the number of workers.
inline std::vector<NeighborList> knn_search(const EmbeddingMatrix& queries,
                                            const EmbeddingMatrix& index,
                                            std::size_t k, std::size_t shard_size,
                                            std::size_t workers = 1) {
  detail::check_search_args(queries, index.dim(), k);
  const std::vector<Shard> shards = shard_matrix(index, shard_size);
  std::vector<NeighborList> out(queries.rows());
  parallel_for(queries.rows(), workers, [&](std::size_t begin, std::size_t end) {
    NeighborList pair[2];
    for (std::size_t q = begin; q < end; ++q) {
      pair[0] = {q, {}};
      for (const Shard& shard : shards) {
        pair[1] = {q, detail::search_shard(queries.row(q), shard, k)};
        pair[0] = merge_neighbor_lists(pair, k);
      }
      out[q] = std::move(pair[0]);
    }
  });
  return out;
}

inline double avg_neighbor_cos(const NeighborList& nl) {
  if (nl.neighbors.empty()) {
    throw ArgumentError("neighbor list of query " + std::to_string(nl.query_id) +
                        " is empty");
  }
  double sum = 0.0;
  for (const Neighbor& n : nl.neighbors) sum += n.cos;
  return sum / static_cast<double>(nl.neighbors.size());
}

// Debug dump: `query_id\trank\tneighbor_id\tcos`, rank starting at 1.
inline std::string format_neighbor_tsv(std::span<const NeighborList> lists) {
  std::string out;
  for (const NeighborList& nl : lists) {
    for (std::size_t r = 0; r < nl.neighbors.size(); ++r) {
      out += std::to_string(nl.query_id) + '\t' + std::to_string(r + 1) + '\t' +
             std::to_string(nl.neighbors[r].id) + '\t' +
             io::fixed(nl.neighbors[r].cos) + '\n';
    }
  }
  return out;
}

}  // namespace bitextmine
