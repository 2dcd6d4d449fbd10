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
#include <iostream>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bitextmine/corpus.hpp"
#include "bitextmine/error.hpp"
#include "bitextmine/margin.hpp"
#include "bitextmine/utf8.hpp"

namespace bitextmine {

using DigitSignature = std::set<std::string, std::less<>>;

// Set of maximal ASCII digit runs. Leading zeros are significant.
inline DigitSignature digit_signature(std::string_view s) {
  DigitSignature sig;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!detail::is_ascii_digit(s[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < s.size() && detail::is_ascii_digit(s[i])) ++i;
    sig.emplace(s.substr(start, i - start));
  }
  return sig;
}

inline bool digit_filter_pass(std::string_view src_text, std::string_view tgt_text) {
  return digit_signature(src_text) == digit_signature(tgt_text);
}

// Levenshtein distance with unit costs. If the distance is known to exceed
// `bound` the computation stops early and returns bound + 1.
template <typename Seq>
std::size_t levenshtein(const Seq& a, const Seq& b,
                        std::size_t bound = static_cast<std::size_t>(-1)) {
  const Seq& s = a.size() < b.size() ? b : a;  // longer
  const Seq& t = a.size() < b.size() ? a : b;  // shorter
  if (s.size() - t.size() > bound) return bound + 1;
  std::vector<std::size_t> prev(t.size() + 1), cur(t.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= s.size(); ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      row_min = std::min(row_min, cur[j]);
    }
    // Row minima never decrease, so the final distance is at least row_min.
    if (row_min > bound) return bound + 1;
    std::swap(prev, cur);
  }
  return prev[t.size()];
}

// levenshtein / max length, over Unicode scalar values. Two empty strings
// are identical (ratio 0).
inline double edit_distance_ratio(std::string_view a, std::string_view b) {
  const std::u32string ua = utf8::decode(a);
  const std::u32string ub = utf8::decode(b);
  const std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(ua, ub)) / static_cast<double>(longest);
}

// Keep iff the ratio is strictly above one half; near-copies are dropped.
inline bool edit_distance_pass(std::string_view src_text, std::string_view tgt_text) {
  const std::u32string ua = utf8::decode(src_text);
  const std::u32string ub = utf8::decode(tgt_text);
  const std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return false;
  // distance > longest / 2  <=>  2 * distance > longest
  const std::size_t limit = longest / 2;  // keep iff distance > limit
  return levenshtein(ua, ub, limit) > limit;
}

struct FilterReport {
  std::vector<CandidatePair> kept;
  std::size_t dropped_digit = 0;
  std::size_t dropped_edit = 0;

  std::size_t total() const { return kept.size() + dropped_digit + dropped_edit; }
};

// Digit filter, then edit-distance filter. Each drop is counted under the
// first predicate that fails. Input order is preserved.
inline FilterReport filter_pairs(std::span<const CandidatePair> pairs,
                                 const Corpus& src, const Corpus& tgt) {
  FilterReport report;
  for (const CandidatePair& p : pairs) {
    if (p.src_id >= src.size() || p.tgt_id >= tgt.size()) {
      throw DataError("pair (" + std::to_string(p.src_id) + ", " +
                      std::to_string(p.tgt_id) + ") is out of range of the corpora");
    }
    const std::string& s = src[p.src_id];
    const std::string& t = tgt[p.tgt_id];
    if (!digit_filter_pass(s, t)) {
      ++report.dropped_digit;
    } else if (!edit_distance_pass(s, t)) {
      ++report.dropped_edit;
    } else {
      report.kept.push_back(p);
    }
  }
  return report;
}

inline void print_filter_summary(const FilterReport& r, std::ostream& os = std::cerr) {
  os << "filter: kept " << r.kept.size() << " / " << r.total()
     << ", dropped digit " << r.dropped_digit << ", dropped edit "
     << r.dropped_edit << '\n';
}

}  // namespace bitextmine
