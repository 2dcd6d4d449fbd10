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
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bitextmine/embedding.hpp"
#include "bitextmine/error.hpp"
#include "bitextmine/io.hpp"
#include "bitextmine/knn.hpp"

namespace bitextmine {

struct CandidatePair {
  std::size_t src_id = 0;
  std::size_t tgt_id = 0;
  double cos = 0.0;
  double margin = 0.0;

  friend bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

struct MiningConfig {
  std::size_t k = 4;
  // Exactly one of prior / budget is set.
  std::optional<double> prior;
  std::optional<std::size_t> budget;
  std::size_t shard_size = 32768;
  std::size_t workers = 1;

  void validate() const {
    if (k < 2) throw ArgumentError("k must be at least 2");
    if (shard_size == 0) throw ArgumentError("shard_size must be positive");
    if (prior.has_value() == budget.has_value()) {
      throw ArgumentError("exactly one of prior and budget must be set");
    }
    if (prior && !(*prior > 0.0 && *prior <= 1.0)) {
      throw ArgumentError("prior must lie in (0, 1]");
    }
    if (budget && *budget == 0) throw ArgumentError("budget must be at least 1");
  }
};

// Ratio margin: cosine of the pair over the mean of the two endpoints'
// k-neighborhood average cosines. Symmetric in the two averages.
inline double margin_score(double cos_xy, double avg_src_nn, double avg_tgt_nn) {
  const double denom = (avg_src_nn + avg_tgt_nn) / 2.0;
  if (denom == 0.0) {
    throw ArgumentError("degenerate neighborhood: margin denominator is zero");
  }
  return cos_xy / denom;
}

struct MiningResult {
  // One pair per source sentence, in source-id order.
  std::vector<CandidatePair> pairs;
  // src -> tgt neighbor lists, with the margin of every listed neighbor.
  std::vector<NeighborList> forward;
  std::vector<std::vector<double>> forward_margins;
};

// Forward (src->tgt) and backward (tgt->src) k-NN with the same k; each
// source is paired with the forward neighbor of maximal margin, ties going to
// the smaller target id. Both matrices must be unit-normalized.
inline MiningResult mine_candidates(const EmbeddingMatrix& src,
                                    const EmbeddingMatrix& tgt,
                                    const MiningConfig& cfg) {
  if (cfg.k == 0) throw ArgumentError("k must be positive");
  MiningResult result;
  if (src.empty() || tgt.empty()) {
    result.forward.resize(src.rows());
    for (std::size_t i = 0; i < src.rows(); ++i) result.forward[i].query_id = i;
    result.forward_margins.resize(src.rows());
    return result;
  }
  result.forward = knn_search(src, tgt, cfg.k, cfg.shard_size, cfg.workers);
  const std::vector<NeighborList> backward =
      knn_search(tgt, src, cfg.k, cfg.shard_size, cfg.workers);

  std::vector<double> tgt_avg(tgt.rows());
  for (std::size_t j = 0; j < tgt.rows(); ++j) {
    tgt_avg[j] = avg_neighbor_cos(backward[j]);
  }

  result.pairs.resize(src.rows());
  result.forward_margins.resize(src.rows());
  parallel_for(src.rows(), cfg.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NeighborList& nl = result.forward[i];
      const double src_avg = avg_neighbor_cos(nl);
      auto& margins = result.forward_margins[i];
      margins.resize(nl.neighbors.size());
      CandidatePair best{i, 0, 0.0, 0.0};
      bool have = false;
      for (std::size_t r = 0; r < nl.neighbors.size(); ++r) {
        const Neighbor& n = nl.neighbors[r];
        margins[r] = margin_score(n.cos, src_avg, tgt_avg[n.id]);
        if (!have || margins[r] > best.margin ||
            (margins[r] == best.margin && n.id < best.tgt_id)) {
          best = {i, n.id, n.cos, margins[r]};
          have = true;
        }
      }
      result.pairs[i] = best;
    }
  });
  return result;
}

// ceil(fraction * n), snapping products that land within rounding error of
// an integer (0.1 * 30 is 3.0000000000000004 in double).
inline std::size_t fraction_count(double fraction, std::size_t n) {
  const double x = fraction * static_cast<double>(n);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(x));
}

// Number of pairs the configuration asks to retrieve out of n.
inline std::size_t retrieval_count(const MiningConfig& cfg, std::size_t n) {
  if (cfg.prior) return std::min(n, std::max<std::size_t>(1, fraction_count(*cfg.prior, n)));
  if (cfg.budget) return std::min(n, *cfg.budget);
  throw ArgumentError("neither prior nor budget is set");
}

// The retrieval_count-th largest margin.
inline double select_threshold(std::span<const double> margins,
                               const MiningConfig& cfg) {
  if (margins.empty()) throw ArgumentError("cannot select a threshold from no margins");
  if (cfg.prior && !(*cfg.prior > 0.0 && *cfg.prior <= 1.0)) {
    throw ArgumentError("prior must lie in (0, 1]");
  }
  if (cfg.budget && *cfg.budget == 0) throw ArgumentError("budget must be at least 1");
  const std::size_t count = retrieval_count(cfg, margins.size());
  std::vector<double> sorted(margins.begin(), margins.end());
  auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(count - 1);
  std::nth_element(sorted.begin(), nth, sorted.end(), std::greater<>());
  return *nth;
}

// Descending margin, ties by (src_id, tgt_id) ascending.
inline bool by_margin_desc(const CandidatePair& a, const CandidatePair& b) {
  if (a.margin != b.margin) return a.margin > b.margin;
  if (a.src_id != b.src_id) return a.src_id < b.src_id;
  return a.tgt_id < b.tgt_id;
}

// Keeps pairs with margin >= threshold, sorted by by_margin_desc.
inline std::vector<CandidatePair> apply_threshold(std::vector<CandidatePair> pairs,
                                                  double threshold) {
  std::erase_if(pairs, [&](const CandidatePair& p) { return !(p.margin >= threshold); });
  std::sort(pairs.begin(), pairs.end(), by_margin_desc);
  return pairs;
}

// `src_id\ttgt_id\tcos\tmargin`, 12 decimal digits.
inline std::string format_candidates_tsv(std::span<const CandidatePair> pairs) {
  std::string out;
  for (const CandidatePair& p : pairs) {
    out += std::to_string(p.src_id) + '\t' + std::to_string(p.tgt_id) + '\t' +
           io::fixed(p.cos) + '\t' + io::fixed(p.margin) + '\n';
  }
  return out;
}

inline void write_candidates(std::span<const CandidatePair> pairs,
                             const std::filesystem::path& path) {
  io::write_file(path, format_candidates_tsv(pairs));
}

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    fields.push_back(line.substr(pos, tab == std::string_view::npos ? tab : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return fields;
}

inline std::size_t parse_id(std::string_view s, const std::string& where) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) {
    throw DataError(where + ": expected a non-negative integer, got '" +
                    std::string(s) + "'");
  }
  return std::stoull(std::string(s));
}

inline double parse_real(std::string_view s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": expected a number, got '" + std::string(s) + "'");
  }
}

}  // namespace detail

inline std::vector<CandidatePair> read_candidates(const std::filesystem::path& path) {
  std::vector<CandidatePair> pairs;
  const std::string text = io::read_file(path);
  io::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    const std::string where = path.string() + ":" + std::to_string(line_no + 1);
    const auto f = detail::split_tabs(line);
    if (f.size() != 4) throw DataError(where + ": expected 4 tab-separated fields");
    pairs.push_back({detail::parse_id(f[0], where), detail::parse_id(f[1], where),
                     detail::parse_real(f[2], where), detail::parse_real(f[3], where)});
  });
  return pairs;
}

}  // namespace bitextmine
