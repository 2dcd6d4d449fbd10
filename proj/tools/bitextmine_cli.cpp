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

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "bitextmine/bitextmine.hpp"

namespace fs = std::filesystem;
using namespace bitextmine;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void print_prf(const PRF& r) {
  std::cout << io::fixed(r.precision, 6) << ' ' << io::fixed(r.recall, 6) << ' '
            << io::fixed(r.f1, 6) << ' ' << r.true_positives << ' ' << r.predicted << ' '
            << r.gold << '\n';
}

EmbeddingMatrix load_normalized(const fs::path& path) {
  return normalized(read_embeddings(path));
}

void require_same_dim(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.dim() != b.dim()) {
    throw DataError("embedding dims differ: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised bitext mining over sentence embeddings"};
  app.require_subcommand(1);

  // clean
  auto* clean = app.add_subcommand("clean", "Drop non-body wiki sentences");
  fs::path clean_in, clean_out, clean_idmap;
  clean->add_option("--in", clean_in, "Input corpus")->required();
  clean->add_option("--out", clean_out, "Cleaned corpus")->required();
  clean->add_option("--idmap", clean_idmap, "old_id<TAB>new_id sidecar")->required();

  // knn
  auto* knn = app.add_subcommand("knn", "Exact sharded k-NN dump");
  fs::path knn_queries, knn_index, knn_out;
  std::size_t knn_k = 4, knn_shard = 32768, knn_workers = 1;
  knn->add_option("--queries", knn_queries)->required();
  knn->add_option("--index", knn_index)->required();
  knn->add_option("--k", knn_k)->capture_default_str();
  knn->add_option("--shard-size", knn_shard)->capture_default_str();
  knn->add_option("--workers", knn_workers, "0 = all cores")->capture_default_str();
  knn->add_option("--out", knn_out)->required();

  // mine
  auto* mine = app.add_subcommand("mine", "Margin mining, thresholding and filtering");
  fs::path mine_src_emb, mine_tgt_emb, mine_src_txt, mine_tgt_txt, mine_out;
  std::optional<double> mine_prior;
  std::optional<std::size_t> mine_budget;
  MiningConfig mine_cfg;
  mine->add_option("--src-emb", mine_src_emb)->required();
  mine->add_option("--tgt-emb", mine_tgt_emb)->required();
  mine->add_option("--src-txt", mine_src_txt)->required();
  mine->add_option("--tgt-txt", mine_tgt_txt)->required();
  auto* prior_opt = mine->add_option("--prior", mine_prior, "Fraction of sources to retrieve");
  auto* budget_opt = mine->add_option("--budget", mine_budget, "Number of pairs to retrieve");
  prior_opt->excludes(budget_opt);
  mine->add_option("--k", mine_cfg.k)->capture_default_str();
  mine->add_option("--shard-size", mine_cfg.shard_size)->capture_default_str();
  mine->add_option("--workers", mine_cfg.workers)->capture_default_str();
  mine->add_option("--out", mine_out)->required();

  // self-train
  auto* st = app.add_subcommand("self-train", "Refine the source projection head");
  fs::path st_pairs, st_src_emb, st_tgt_emb, st_head_out;
  std::optional<fs::path> st_head_in, st_log;
  std::string st_neg_mode = "hard";
  TrainConfig st_cfg;
  MiningConfig st_knn;
  st->add_option("--pairs", st_pairs, "Mined pairs TSV")->required();
  st->add_option("--src-emb", st_src_emb)->required();
  st->add_option("--tgt-emb", st_tgt_emb)->required();
  st->add_option("--neg-mode", st_neg_mode)->check(CLI::IsMember({"hard", "random"}))
      ->capture_default_str();
  st->add_option("--batch", st_cfg.batch_size)->capture_default_str();
  st->add_option("--lr", st_cfg.learning_rate)->capture_default_str();
  st->add_option("--epochs", st_cfg.epochs)->capture_default_str();
  st->add_option("--pos-frac", st_cfg.positive_fraction)->capture_default_str();
  st->add_option("--negatives", st_cfg.negatives_per_positive)->capture_default_str();
  st->add_option("--seed", st_cfg.seed)->required();
  st->add_option("--k", st_knn.k, "Neighbors searched for hard negatives")->capture_default_str();
  st->add_option("--shard-size", st_knn.shard_size)->capture_default_str();
  st->add_option("--workers", st_knn.workers)->capture_default_str();
  st->add_option("--head-in", st_head_in, "Start from this head instead of identity");
  st->add_option("--log", st_log, "Training log CSV");
  st->add_option("--head-out", st_head_out)->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "mine -> filter -> self-train -> re-mine");
  fs::path pipe_config;
  std::optional<std::size_t> pipe_rounds;
  std::optional<fs::path> pipe_out;
  std::optional<std::size_t> pipe_workers;
  pipe->add_option("--config", pipe_config, "key = value config file")->required();
  pipe->add_option("--rounds", pipe_rounds, "Self-training rounds (overrides config)");
  pipe->add_option("--out", pipe_out, "Final pairs TSV (overrides config)");
  pipe->add_option("--workers", pipe_workers, "Overrides config");

  // eval
  auto* ev = app.add_subcommand("eval", "Precision / recall / F1 against gold pairs");
  fs::path ev_pred, ev_gold;
  ev->add_option("--pred", ev_pred)->required();
  ev->add_option("--gold", ev_gold)->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a planted-pair benchmark");
  SynthConfig synth_cfg;
  fs::path synth_dir;
  synth->add_option("--n-src", synth_cfg.n_src)->required();
  synth->add_option("--n-tgt", synth_cfg.n_tgt)->required();
  synth->add_option("--n-parallel", synth_cfg.n_parallel)->required();
  synth->add_option("--dim", synth_cfg.dim)->required();
  synth->add_option("--sigma", synth_cfg.noise_sigma)->required();
  synth->add_option("--seed", synth_cfg.seed)->required();
  synth->add_option("--rotation", synth_cfg.rotation)->capture_default_str();
  synth->add_option("--out-dir", synth_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*clean) {
      const CleanedCorpus cleaned = clean_wiki_corpus(load_corpus(clean_in));
      write_corpus(cleaned.corpus, clean_out);
      write_id_map(cleaned.kept_old_ids, clean_idmap);
      std::cerr << "clean: kept " << cleaned.corpus.size() << " sentences\n";
    } else if (*knn) {
      const EmbeddingMatrix queries = load_normalized(knn_queries);
      const EmbeddingMatrix index = load_normalized(knn_index);
      require_same_dim(queries, index);
      const auto lists = knn_search(queries, index, knn_k, knn_shard, knn_workers);
      io::write_file(knn_out, format_neighbor_tsv(lists));
    } else if (*mine) {
      if (!mine_prior && !mine_budget) {
        std::cerr << "mine: one of --prior or --budget is required\n";
        return kExitUsage;
      }
      mine_cfg.prior = mine_prior;
      mine_cfg.budget = mine_budget;
      mine_cfg.validate();
      const Corpus src_text = load_corpus(mine_src_txt);
      const Corpus tgt_text = load_corpus(mine_tgt_txt);
      const EmbeddingMatrix src = load_embeddings_for(mine_src_emb, src_text.size());
      const EmbeddingMatrix tgt = load_embeddings_for(mine_tgt_emb, tgt_text.size());
      require_same_dim(src, tgt);
      const RoundResult r = run_round(src, tgt, src_text, tgt_text, mine_cfg);
      std::cerr << "mine: retrieved " << r.retrieved.size() << " of " << r.mining.pairs.size()
                << " candidates\n";
      print_filter_summary(r.report);
      write_candidates(r.pairs(), mine_out);
    } else if (*st) {
      st_cfg.negative_mode = parse_negative_mode(st_neg_mode);
      st_cfg.validate();
      const EmbeddingMatrix src = load_normalized(st_src_emb);
      const EmbeddingMatrix tgt = load_normalized(st_tgt_emb);
      require_same_dim(src, tgt);
      ProjectionHead head =
          st_head_in ? read_head(*st_head_in) : ProjectionHead::identity(src.dim());
      if (head.dim != src.dim()) {
        throw DataError("projection head has dim " + std::to_string(head.dim) +
                        ", embeddings have dim " + std::to_string(src.dim()));
      }
      std::vector<CandidatePair> pairs = read_candidates(st_pairs);
      std::sort(pairs.begin(), pairs.end(), by_margin_desc);
      const EmbeddingMatrix projected = apply_projection(head, src);
      const auto forward = knn_search(projected, tgt, st_knn.k, st_knn.shard_size, st_knn.workers);
      const TrainingSet set = build_training_set(pairs, forward, st_cfg, tgt.rows());
      if (set.missing_negatives > 0) {
        std::cerr << "warning: " << set.missing_negatives
                  << " hard negatives unavailable (neighbor lists too short)\n";
      }
      std::vector<TrainStep> log;
      head = train(std::move(head), set.pairs, src, tgt, st_cfg, &log);
      write_head(head, st_head_out);
      if (st_log) io::write_file(*st_log, format_train_log(log));
      std::cerr << "self-train: " << set.positives << " positives, "
                << set.pairs.size() - set.positives << " negatives, " << log.size()
                << " steps\n";
    } else if (*pipe) {
      PipelineConfig cfg = load_pipeline_config(pipe_config);
      if (pipe_rounds) cfg.rounds = *pipe_rounds;
      if (pipe_out) cfg.output = *pipe_out;
      if (pipe_workers) cfg.mining.workers = *pipe_workers;
      if (cfg.output.empty()) {
        std::cerr << "pipeline: no output path (set --out or 'out' in the config)\n";
        return kExitUsage;
      }
      run_pipeline(cfg, &std::cerr);
    } else if (*ev) {
      print_prf(evaluate(read_id_pairs(ev_pred), read_id_pairs(ev_gold)));
    } else if (*synth) {
      write_synthetic(generate_synthetic(synth_cfg), synth_dir);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
