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

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bitextmine/io.hpp"
#include "bitextmine/margin.hpp"

namespace bitextmine {

using IdPair = std::pair<std::size_t, std::size_t>;

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

// Exact (src_id, tgt_id) set intersection. Both lists are deduplicated.
// Precision is 0 for an empty prediction, recall 0 for an empty gold set.
inline PRF evaluate(std::span<const IdPair> predicted, std::span<const IdPair> gold) {
  const std::set<IdPair> pred_set(predicted.begin(), predicted.end());
  const std::set<IdPair> gold_set(gold.begin(), gold.end());
  PRF r;
  r.predicted = pred_set.size();
  r.gold = gold_set.size();
  for (const IdPair& p : pred_set) r.true_positives += gold_set.count(p);
  if (r.predicted > 0) r.precision = double(r.true_positives) / double(r.predicted);
  if (r.gold > 0) r.recall = double(r.true_positives) / double(r.gold);
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

inline std::vector<IdPair> id_pairs(std::span<const CandidatePair> pairs) {
  std::vector<IdPair> out;
  out.reserve(pairs.size());
  for (const CandidatePair& p : pairs) out.emplace_back(p.src_id, p.tgt_id);
  return out;
}

// Reads the first two tab-separated columns of every non-empty line, so it
// accepts both gold files and candidate dumps.
inline std::vector<IdPair> read_id_pairs(const std::filesystem::path& path) {
  std::vector<IdPair> out;
  const std::string text = io::read_file(path);
  io::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    const std::string where = path.string() + ":" + std::to_string(line_no + 1);
    const auto f = detail::split_tabs(line);
    if (f.size() < 2) throw DataError(where + ": expected at least 2 tab-separated fields");
    out.emplace_back(detail::parse_id(f[0], where), detail::parse_id(f[1], where));
  });
  return out;
}

inline void write_id_pairs(std::span<const IdPair> pairs,
                           const std::filesystem::path& path) {
  std::string out;
  for (const auto& [s, t] : pairs) {
    out += std::to_string(s) + '\t' + std::to_string(t) + '\n';
  }
  io::write_file(path, out);
}

}  // namespace bitextmine
