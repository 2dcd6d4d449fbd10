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

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bitextmine/corpus.hpp"
#include "bitextmine/embedding.hpp"
#include "bitextmine/error.hpp"
#include "bitextmine/evaluate.hpp"

namespace bitextmine {

// Planted-pair benchmark. Targets are random unit vectors. A random
// orthogonal Q is the orthogonal factor of I + rotation * G / sqrt(dim) for
// a Gaussian G (rotation 0 gives Q = I; large values approach a uniformly
// random rotation). Planted sources are normalize(Q^T (t + noise)) with
// per-coordinate noise N(0, sigma^2 / dim); other sources are Q^T r for
// fresh random unit r.
struct SynthConfig {
  std::size_t n_src = 0;
  std::size_t n_tgt = 0;
  std::size_t n_parallel = 0;
  std::size_t dim = 64;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  double rotation = 1.0;

  void validate() const {
    if (dim == 0) throw ArgumentError("dim must be positive");
    if (n_parallel > std::min(n_src, n_tgt)) {
      throw ArgumentError("n_parallel must not exceed min(n_src, n_tgt)");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
      throw ArgumentError("sigma must be finite and non-negative");
    }
    if (!(rotation >= 0.0) || !std::isfinite(rotation)) {
      throw ArgumentError("rotation must be finite and non-negative");
    }
  }
};

struct SyntheticData {
  Corpus src_text;
  Corpus tgt_text;
  EmbeddingMatrix src;
  EmbeddingMatrix tgt;
  std::vector<IdPair> gold;  // sorted by src id
  Eigen::MatrixXd rotation;  // Q
};

namespace detail {

inline void random_unit(std::mt19937_64& rng, std::span<double> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (double& v : out) {
      v = normal(rng);
      sq += v * v;
    }
  } while (sq == 0.0);
  const double norm = std::sqrt(sq);
  for (double& v : out) v /= norm;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, std::size_t dim,
                                         double strength) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
  const double scale = strength / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) m(r, c) += scale * normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& packed = qr.matrixQR();
  // Fix the column signs so that R has a positive diagonal; this makes Q a
  // continuous function of the input and Q = I at strength 0.
  for (Eigen::Index j = 0; j < d; ++j) {
    if (packed(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

// out = Q^T v
inline void rotate_back(const Eigen::MatrixXd& q, std::span<const double> v,
                        std::span<double> out) {
  const auto d = static_cast<Eigen::Index>(v.size());
  Eigen::Map<const Eigen::VectorXd> in(v.data(), d);
  Eigen::Map<Eigen::VectorXd> dst(out.data(), d);
  dst.noalias() = q.transpose() * in;
}

inline std::string synth_sentence(std::mt19937_64& rng,
                                  const std::vector<std::string>& words,
                                  std::size_t number) {
  std::uniform_int_distribution<std::size_t> len(5, 9);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  const std::size_t n = len(rng);
  std::uniform_int_distribution<std::size_t> slot(0, n);
  const std::size_t number_at = slot(rng);
  std::string s;
  for (std::size_t i = 0; i <= n; ++i) {
    if (!s.empty()) s += ' ';
    if (i == number_at) {
      s += std::to_string(number);
    } else {
      s += words[pick(rng)];
    }
  }
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s + '.';
}

inline std::vector<std::string> source_vocabulary() {
  static const char* syllables[] = {"ka", "zu", "mo", "ri", "ten", "vo", "shi",
                                    "lan", "qe", "xu", "bor", "yi"};
  std::vector<std::string> words;
  for (const char* a : syllables) {
    for (const char* b : syllables) words.push_back(std::string(a) + b);
  }
  return words;
}

inline std::vector<std::string> target_vocabulary() {
  return {"the",   "river", "stone", "city",  "light", "old",    "green",
          "house", "north", "was",   "built", "near",  "small",  "church",
          "road",  "after", "war",   "and",   "its",   "people", "found",
          "first", "large", "park",  "in",    "by",    "of",     "valley"};
}

}  // namespace detail

inline SyntheticData generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SyntheticData out;
  out.src_text.language_tag = "xx";
  out.tgt_text.language_tag = "en";
  out.tgt = EmbeddingMatrix(cfg.n_tgt, cfg.dim);
  out.src = EmbeddingMatrix(cfg.n_src, cfg.dim);

  for (std::size_t j = 0; j < cfg.n_tgt; ++j) detail::random_unit(rng, out.tgt.row(j));
  out.rotation = detail::random_orthogonal(rng, cfg.dim, cfg.rotation);

  std::vector<std::size_t> src_perm(cfg.n_src), tgt_perm(cfg.n_tgt);
  std::iota(src_perm.begin(), src_perm.end(), std::size_t{0});
  std::iota(tgt_perm.begin(), tgt_perm.end(), std::size_t{0});
  std::shuffle(src_perm.begin(), src_perm.end(), rng);
  std::shuffle(tgt_perm.begin(), tgt_perm.end(), rng);

  // partner[src] = tgt for planted sources, n_tgt otherwise
  std::vector<std::size_t> partner(cfg.n_src, cfg.n_tgt);
  for (std::size_t p = 0; p < cfg.n_parallel; ++p) partner[src_perm[p]] = tgt_perm[p];

  const double noise = cfg.noise_sigma / std::sqrt(static_cast<double>(cfg.dim));
  std::vector<double> v(cfg.dim);
  for (std::size_t i = 0; i < cfg.n_src; ++i) {
    if (partner[i] < cfg.n_tgt) {
      const auto t = out.tgt.row(partner[i]);
      for (std::size_t c = 0; c < cfg.dim; ++c) v[c] = t[c] + noise * normal(rng);
      out.gold.emplace_back(i, partner[i]);
    } else {
      detail::random_unit(rng, v);
    }
    detail::rotate_back(out.rotation, v, out.src.row(i));
  }
  out.src.normalize();

  // Every sentence carries one number; planted pairs share theirs and no
  // other two sentences do, so the digit filter separates pairs exactly.
  const auto src_words = detail::source_vocabulary();
  const auto tgt_words = detail::target_vocabulary();
  std::size_t next_number = 1000;
  std::vector<std::size_t> tgt_number(cfg.n_tgt, 0);
  for (std::size_t j = 0; j < cfg.n_tgt; ++j) tgt_number[j] = next_number++;
  for (std::size_t i = 0; i < cfg.n_src; ++i) {
    const std::size_t number =
        partner[i] < cfg.n_tgt ? tgt_number[partner[i]] : next_number++;
    out.src_text.sentences.push_back(detail::synth_sentence(rng, src_words, number));
  }
  for (std::size_t j = 0; j < cfg.n_tgt; ++j) {
    out.tgt_text.sentences.push_back(detail::synth_sentence(rng, tgt_words, tgt_number[j]));
  }
  return out;
}

// Writes src.txt, tgt.txt, src.emb, tgt.emb and gold.tsv into dir.
inline void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_corpus(data.src_text, dir / "src.txt");
  write_corpus(data.tgt_text, dir / "tgt.txt");
  write_embeddings(data.src, dir / "src.emb");
  write_embeddings(data.tgt, dir / "tgt.emb");
  write_id_pairs(data.gold, dir / "gold.tsv");
}

}  // namespace bitextmine
