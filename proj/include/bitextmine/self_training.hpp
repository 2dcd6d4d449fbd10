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
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bitextmine/embedding.hpp"
#include "bitextmine/error.hpp"
#include "bitextmine/io.hpp"
#include "bitextmine/knn.hpp"
#include "bitextmine/margin.hpp"
#include "bitextmine/projection.hpp"

namespace bitextmine {

struct TrainingPair {
  std::size_t src_id = 0;
  std::size_t tgt_id = 0;
  int label = 0;  // 1 parallel, 0 not

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

enum class NegativeMode { hard, random };

inline NegativeMode parse_negative_mode(std::string_view s) {
  if (s == "hard") return NegativeMode::hard;
  if (s == "random") return NegativeMode::random;
  throw ArgumentError("negative mode must be 'hard' or 'random', got '" +
                      std::string(s) + "'");
}

inline std::string_view to_string(NegativeMode m) {
  return m == NegativeMode::hard ? "hard" : "random";
}

struct TrainConfig {
  std::size_t batch_size = 100;
  double learning_rate = 1e-5;
  std::size_t epochs = 2;
  double positive_fraction = 0.5;
  NegativeMode negative_mode = NegativeMode::hard;
  std::size_t negatives_per_positive = 3;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const {
    if (batch_size == 0) throw ArgumentError("batch size must be positive");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
    if (epochs == 0) throw ArgumentError("epochs must be positive");
    if (!(positive_fraction > 0.0 && positive_fraction <= 1.0)) {
      throw ArgumentError("positive fraction must lie in (0, 1]");
    }
    if (negatives_per_positive == 0) {
      throw ArgumentError("negatives per positive must be positive");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
        !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0)) {
      throw ArgumentError("invalid Adam hyperparameters");
    }
  }
};

struct TrainingSet {
  std::vector<TrainingPair> pairs;
  std::size_t positives = 0;
  // Negatives that hard mode wanted but the neighbor list could not supply.
  std::size_t missing_negatives = 0;
};

// The top positive_fraction of `filtered` (sorted by margin, descending)
// become positives. Each is followed by its negatives: the next-ranked
// forward neighbors of its source (hard) or distinct uniform target ids
// (random). The positive target is never used as its own negative.
inline TrainingSet build_training_set(std::span<const CandidatePair> filtered,
                                      std::span<const NeighborList> forward_nn,
                                      const TrainConfig& cfg, std::size_t n_tgt) {
  cfg.validate();
  TrainingSet set;
  const std::size_t n_pos =
      std::min(filtered.size(), fraction_count(cfg.positive_fraction, filtered.size()));
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t p = 0; p < n_pos; ++p) {
    const CandidatePair& pos = filtered[p];
    if (pos.tgt_id >= n_tgt) throw DataError("positive target id out of range");
    set.pairs.push_back({pos.src_id, pos.tgt_id, 1});
    ++set.positives;
    if (cfg.negative_mode == NegativeMode::hard) {
      if (pos.src_id >= forward_nn.size() ||
          forward_nn[pos.src_id].query_id != pos.src_id) {
        throw DataError("no forward neighbor list for source " +
                        std::to_string(pos.src_id));
      }
      std::size_t taken = 0;
      for (const Neighbor& n : forward_nn[pos.src_id].neighbors) {
        if (taken == cfg.negatives_per_positive) break;
        if (n.id == pos.tgt_id) continue;
        set.pairs.push_back({pos.src_id, n.id, 0});
        ++taken;
      }
      set.missing_negatives += cfg.negatives_per_positive - taken;
    } else {
      const std::size_t want = std::min(cfg.negatives_per_positive, n_tgt - 1);
      std::uniform_int_distribution<std::size_t> pick(0, n_tgt - 2);
      std::vector<std::size_t> chosen;
      while (chosen.size() < want) {
        std::size_t id = pick(rng);
        if (id >= pos.tgt_id) ++id;  // skip the positive target
        if (std::find(chosen.begin(), chosen.end(), id) != chosen.end()) continue;
        chosen.push_back(id);
        set.pairs.push_back({pos.src_id, id, 0});
      }
      set.missing_negatives += cfg.negatives_per_positive - want;
    }
  }
  return set;
}

struct TrainStep {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // 1-based, global
  double mean_loss = 0.0;
};

namespace detail {

class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& cfg)
      : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad, std::size_t offset) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grad[i];
      double& m = m_[offset + i];
      double& v = v_[offset + i];
      m = cfg_.adam_beta1 * m + (1.0 - cfg_.adam_beta1) * g;
      v = cfg_.adam_beta2 * v + (1.0 - cfg_.adam_beta2) * g * g;
      const double m_hat = m / bias1_;
      const double v_hat = v / bias2_;
      params[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.adam_eps);
    }
  }

  void advance() {
    ++t_;
    bias1_ = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(t_));
    bias2_ = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(t_));
  }

 private:
  TrainConfig cfg_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
  double bias1_ = 1.0, bias2_ = 1.0;
};

}  // namespace detail

// Adam on the mean batch gradient of the cosine-discrimination loss. Only the
// head is trained; `tgt` is read for cosine evaluation and never modified.
// Data is reshuffled every epoch from cfg.seed; the last partial batch counts.
inline ProjectionHead train(ProjectionHead head, std::span<const TrainingPair> data,
                            const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                            const TrainConfig& cfg,
                            std::vector<TrainStep>* log = nullptr) {
  cfg.validate();
  if (data.empty()) throw ArgumentError("training data is empty");
  if (src.dim() != head.dim || tgt.dim() != head.dim) {
    throw ArgumentError("dim mismatch between head and embeddings");
  }
  for (const TrainingPair& p : data) {
    if (p.src_id >= src.rows() || p.tgt_id >= tgt.rows()) {
      throw DataError("training pair id out of range");
    }
    if (p.label != 0 && p.label != 1) throw DataError("training label must be 0 or 1");
  }

  const std::size_t dim = head.dim;
  detail::Adam adam(dim * dim + dim, cfg);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      HeadGradient grad = zero_gradient(dim);
      double loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const TrainingPair& p = data[order[i]];
        loss += accumulate_pair_gradient(head, src.row(p.src_id), tgt.row(p.tgt_id),
                                         p.label, scale, grad);
      }
      adam.advance();
      adam.step(head.weight, grad.weight, 0);
      adam.step(head.bias, grad.bias, dim * dim);
      ++step;
      if (log) log->push_back({epoch, step, loss * scale});
    }
  }
  return head;
}

inline std::string format_train_log(std::span<const TrainStep> log) {
  std::string out = "epoch,step,mean_loss\n";
  for (const TrainStep& s : log) {
    out += std::to_string(s.epoch) + ',' + std::to_string(s.step) + ',' +
           io::fixed(s.mean_loss) + '\n';
  }
  return out;
}

}  // namespace bitextmine
