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
#include <string>
#include <string_view>
#include <vector>

#include "bitextmine/error.hpp"
#include "bitextmine/io.hpp"
#include "bitextmine/utf8.hpp"

namespace bitextmine {

// One side of a language pair. Sentence id i is sentences[i].
struct Corpus {
  std::vector<std::string> sentences;
  std::string language_tag{};

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  const std::string& operator[](std::size_t id) const { return sentences[id]; }
};

inline Corpus load_corpus(const std::filesystem::path& path,
                          std::string language_tag = {}) {
  const std::string text = io::read_file(path);
  if (auto bad = utf8::first_invalid(text)) {
    throw DataError(path.string() + ": invalid UTF-8 at byte offset " +
                    std::to_string(*bad));
  }
  Corpus corpus{{}, std::move(language_tag)};
  io::for_each_line(text, [&](std::string_view line, std::size_t) {
    corpus.sentences.emplace_back(line);
  });
  return corpus;
}

inline void write_corpus(const Corpus& corpus,
                         const std::filesystem::path& path) {
  std::string out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string& s = corpus[i];
    if (s.find('\n') != std::string::npos) {
      throw DataError("sentence " + std::to_string(i) + " contains a newline");
    }
    out += s;
    out += '\n';
  }
  io::write_file(path, out);
}

namespace detail {

inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

inline bool has_clock_pattern(std::string_view s) {
  for (std::size_t i = 0; i + 5 <= s.size(); ++i) {
    if (is_ascii_digit(s[i]) && is_ascii_digit(s[i + 1]) && s[i + 2] == ':' &&
        is_ascii_digit(s[i + 3]) && is_ascii_digit(s[i + 4])) {
      return true;
    }
  }
  return false;
}

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\v\f") == std::string_view::npos;
}

}  // namespace detail

// True for sentences that are not body text of a wiki article: markup
// residue, URLs, talk-page signatures and timestamps. Case-sensitive,
// byte-literal matching.
inline bool is_wiki_noise(std::string_view sentence) {
  static constexpr std::string_view kMarkers[] = {"*",   "=",   "//",    "::",
                                                  "#",   "www", "(talk)"};
  if (detail::is_blank(sentence)) return true;
  for (std::string_view m : kMarkers) {
    if (sentence.find(m) != std::string_view::npos) return true;
  }
  return detail::has_clock_pattern(sentence);
}

struct CleanedCorpus {
  Corpus corpus;
  // kept_old_ids[new_id] == old_id
  std::vector<std::size_t> kept_old_ids;
};

inline CleanedCorpus clean_wiki_corpus(const Corpus& raw) {
  CleanedCorpus out{{{}, raw.language_tag}, {}};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (is_wiki_noise(raw[i])) continue;
    out.corpus.sentences.push_back(raw[i]);
    out.kept_old_ids.push_back(i);
  }
  return out;
}

// TSV sidecar, one `old_id\tnew_id` line per kept sentence.
inline void write_id_map(const std::vector<std::size_t>& kept_old_ids,
                         const std::filesystem::path& path) {
  std::string out;
  for (std::size_t new_id = 0; new_id < kept_old_ids.size(); ++new_id) {
    out += std::to_string(kept_old_ids[new_id]);
    out += '\t';
    out += std::to_string(new_id);
    out += '\n';
  }
  io::write_file(path, out);
}

}  // namespace bitextmine
