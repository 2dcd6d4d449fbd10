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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bitextmine/corpus.hpp"
#include "bitextmine/embedding.hpp"
#include "bitextmine/error.hpp"
#include "bitextmine/evaluate.hpp"
#include "bitextmine/filters.hpp"
#include "bitextmine/io.hpp"
#include "bitextmine/margin.hpp"
#include "bitextmine/projection.hpp"
#include "bitextmine/self_training.hpp"

namespace bitextmine {

struct RoundResult {
  MiningResult mining;
  // Thresholded candidates, by descending margin.
  std::vector<CandidatePair> retrieved;
  // report.kept are the round's output pairs, by descending margin.
  FilterReport report;

  const std::vector<CandidatePair>& pairs() const { return report.kept; }
};

// mine -> threshold -> filter.
inline RoundResult run_round(const EmbeddingMatrix& src_emb, const EmbeddingMatrix& tgt_emb,
                             const Corpus& src_text, const Corpus& tgt_text,
                             const MiningConfig& cfg) {
  cfg.validate();
  if (src_emb.rows() != src_text.size() || tgt_emb.rows() != tgt_text.size()) {
    throw DataError("embedding row counts do not match corpus sizes");
  }
  RoundResult r;
  r.mining = mine_candidates(src_emb, tgt_emb, cfg);
  if (!r.mining.pairs.empty()) {
    std::vector<double> margins;
    margins.reserve(r.mining.pairs.size());
    for (const CandidatePair& p : r.mining.pairs) margins.push_back(p.margin);
    r.retrieved = apply_threshold(r.mining.pairs, select_threshold(margins, cfg));
  }
  r.report = filter_pairs(r.retrieved, src_text, tgt_text);
  return r;
}

struct RoundMetrics {
  std::size_t round = 0;
  std::string stage;  // "mined" (after threshold) or "filtered"
  PRF prf;
};

inline std::string format_metrics_csv(std::span<const RoundMetrics> metrics) {
  std::string out = "round,stage,precision,recall,f1,tp,predicted,gold\n";
  for (const RoundMetrics& m : metrics) {
    out += std::to_string(m.round) + ',' + m.stage + ',' + io::fixed(m.prf.precision, 6) +
           ',' + io::fixed(m.prf.recall, 6) + ',' + io::fixed(m.prf.f1, 6) + ',' +
           std::to_string(m.prf.true_positives) + ',' + std::to_string(m.prf.predicted) +
           ',' + std::to_string(m.prf.gold) + '\n';
  }
  return out;
}

struct PipelineResult {
  std::vector<CandidatePair> final_pairs;
  std::vector<RoundMetrics> metrics;  // empty without gold
  ProjectionHead head;
  std::vector<TrainStep> train_log;
  std::vector<std::size_t> round_output_sizes;
};

struct PipelineInputs {
  const Corpus& src_text;
  const Corpus& tgt_text;
  const EmbeddingMatrix& src_emb;  // normalized
  const EmbeddingMatrix& tgt_emb;  // normalized
  std::optional<std::vector<IdPair>> gold;
};

// Round 0 mines with the identity head; every further round builds a
// training set from the previous round's output, refines the head (carried
// across rounds), projects the source side and mines again.
inline PipelineResult run_pipeline(const PipelineInputs& in, const MiningConfig& mining,
                                   const TrainConfig& train_cfg, std::size_t rounds,
                                   std::ostream* diag = nullptr) {
  mining.validate();
  if (rounds > 0) train_cfg.validate();
  PipelineResult result;
  result.head = ProjectionHead::identity(in.src_emb.dim());

  auto record = [&](std::size_t round, const RoundResult& r) {
    if (diag) {
      *diag << "round " << round << ": retrieved " << r.retrieved.size() << '\n';
      print_filter_summary(r.report, *diag);
    }
    result.round_output_sizes.push_back(r.pairs().size());
    if (!in.gold) return;
    result.metrics.push_back({round, "mined", evaluate(id_pairs(r.retrieved), *in.gold)});
    result.metrics.push_back({round, "filtered", evaluate(id_pairs(r.pairs()), *in.gold)});
  };

  RoundResult current = run_round(in.src_emb, in.tgt_emb, in.src_text, in.tgt_text, mining);
  record(0, current);

  for (std::size_t round = 1; round <= rounds; ++round) {
    TrainConfig cfg = train_cfg;
    cfg.seed = train_cfg.seed + (round - 1);
    const TrainingSet set = build_training_set(current.pairs(), current.mining.forward, cfg,
                                               in.tgt_emb.rows());
    if (set.pairs.empty()) {
      throw DataError("round " + std::to_string(round) +
                      ": no pairs survived filtering, nothing to self-train on");
    }
    if (diag) {
      *diag << "round " << round << ": training on " << set.positives << " positives, "
            << set.pairs.size() - set.positives << " negatives\n";
      if (set.missing_negatives > 0) {
        *diag << "warning: " << set.missing_negatives
              << " hard negatives unavailable (neighbor lists too short)\n";
      }
    }
    result.head = train(std::move(result.head), set.pairs, in.src_emb, in.tgt_emb, cfg,
                        &result.train_log);
    const EmbeddingMatrix projected = apply_projection(result.head, in.src_emb);
    current = run_round(projected, in.tgt_emb, in.src_text, in.tgt_text, mining);
    record(round, current);
  }
  result.final_pairs = current.pairs();
  return result;
}

// ---------------------------------------------------------------------------
// File-driven pipeline.

struct PipelineConfig {
  std::filesystem::path src_txt, tgt_txt, src_emb, tgt_emb;
  std::optional<std::filesystem::path> gold;
  MiningConfig mining;
  TrainConfig train;
  std::size_t rounds = 1;
  std::filesystem::path output;
  std::optional<std::filesystem::path> metrics;    // default: <output>.metrics.csv
  std::optional<std::filesystem::path> head_out;
  std::optional<std::filesystem::path> train_log;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::size_t parse_count(std::string_view v, const std::string& key) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string_view::npos) {
    throw ArgumentError("config key '" + key + "' expects a non-negative integer");
  }
  return std::stoull(std::string(v));
}

inline double parse_double(std::string_view v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(v), &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ArgumentError("config key '" + key + "' expects a number");
}

}  // namespace detail

// key = value lines; '#' starts a comment. Relative paths are resolved
// against the directory of the config file.
inline PipelineConfig parse_pipeline_config(std::string_view text,
                                            const std::filesystem::path& base_dir = {}) {
  PipelineConfig cfg;
  auto path_of = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_relative() ? base_dir / p : p;
  };
  io::for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
    std::string_view line = raw.substr(0, raw.find('#'));
    line = detail::trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError("config line " + std::to_string(line_no + 1) + ": expected key = value");
    }
    const std::string key{detail::trim(line.substr(0, eq))};
    std::string_view value = detail::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key == "src_txt") cfg.src_txt = path_of(value);
    else if (key == "tgt_txt") cfg.tgt_txt = path_of(value);
    else if (key == "src_emb") cfg.src_emb = path_of(value);
    else if (key == "tgt_emb") cfg.tgt_emb = path_of(value);
    else if (key == "gold") cfg.gold = path_of(value);
    else if (key == "out") cfg.output = path_of(value);
    else if (key == "metrics") cfg.metrics = path_of(value);
    else if (key == "head_out") cfg.head_out = path_of(value);
    else if (key == "train_log") cfg.train_log = path_of(value);
    else if (key == "prior") cfg.mining.prior = detail::parse_double(value, key);
    else if (key == "budget") cfg.mining.budget = detail::parse_count(value, key);
    else if (key == "k") cfg.mining.k = detail::parse_count(value, key);
    else if (key == "shard_size") cfg.mining.shard_size = detail::parse_count(value, key);
    else if (key == "workers") cfg.mining.workers = detail::parse_count(value, key);
    else if (key == "rounds") cfg.rounds = detail::parse_count(value, key);
    else if (key == "neg_mode") cfg.train.negative_mode = parse_negative_mode(value);
    else if (key == "negatives_per_positive") cfg.train.negatives_per_positive = detail::parse_count(value, key);
    else if (key == "batch") cfg.train.batch_size = detail::parse_count(value, key);
    else if (key == "lr") cfg.train.learning_rate = detail::parse_double(value, key);
    else if (key == "epochs") cfg.train.epochs = detail::parse_count(value, key);
    else if (key == "pos_frac") cfg.train.positive_fraction = detail::parse_double(value, key);
    else if (key == "seed") cfg.train.seed = detail::parse_count(value, key);
    else throw ArgumentError("unknown config key '" + key + "'");
  });
  for (const auto* p : {&cfg.src_txt, &cfg.tgt_txt, &cfg.src_emb, &cfg.tgt_emb}) {
    if (p->empty()) throw ArgumentError("config must set src_txt, tgt_txt, src_emb and tgt_emb");
  }
  return cfg;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(io::read_file(path), path.parent_path());
}

namespace detail {

// Files written through this are renamed into place on commit() and
// deleted otherwise.
class StagedOutputs {
 public:
  ~StagedOutputs() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, dst] : files_) std::filesystem::remove(tmp, ec);
  }

  void write(const std::filesystem::path& dst, const std::string& data) {
    std::filesystem::path tmp = dst;
    tmp += ".partial";
    files_.emplace_back(tmp, dst);
    io::write_file(tmp, data);
  }

  void commit() {
    for (const auto& [tmp, dst] : files_) std::filesystem::rename(tmp, dst);
    committed_ = true;
  }

 private:
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> files_;
  bool committed_ = false;
};

}  // namespace detail

inline PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream* diag = nullptr) {
  if (cfg.output.empty()) throw ArgumentError("pipeline output path is not set");
  const Corpus src_text = load_corpus(cfg.src_txt);
  const Corpus tgt_text = load_corpus(cfg.tgt_txt);
  const EmbeddingMatrix src = load_embeddings_for(cfg.src_emb, src_text.size());
  const EmbeddingMatrix tgt = load_embeddings_for(cfg.tgt_emb, tgt_text.size());
  if (!src.empty() && !tgt.empty() && src.dim() != tgt.dim()) {
    throw DataError("source and target embeddings differ in dim");
  }
  PipelineInputs in{src_text, tgt_text, src, tgt, std::nullopt};
  if (cfg.gold) in.gold = read_id_pairs(*cfg.gold);

  PipelineResult result = run_pipeline(in, cfg.mining, cfg.train, cfg.rounds, diag);

  detail::StagedOutputs staged;
  staged.write(cfg.output, format_candidates_tsv(result.final_pairs));
  if (cfg.gold) {
    std::filesystem::path metrics = cfg.output;
    metrics += ".metrics.csv";
    staged.write(cfg.metrics.value_or(metrics), format_metrics_csv(result.metrics));
  }
  if (cfg.head_out) staged.write(*cfg.head_out, encode_head(result.head));
  if (cfg.train_log) staged.write(*cfg.train_log, format_train_log(result.train_log));
  staged.commit();
  return result;
}

}  // namespace bitextmine
