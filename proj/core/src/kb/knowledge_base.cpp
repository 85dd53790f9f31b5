// Copyright 2026 The Help Desk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "helpdesk/kb/knowledge_base.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/hash.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::kb {

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> kWords = {
      "a",    "an",   "the",   "and",   "or",   "but",   "if",   "then", "of",   "on",
      "in",   "at",   "to",    "from",  "by",   "for",   "with", "as",   "is",   "are",
      "was",  "were", "be",    "been",  "it",   "its",   "this", "that", "these", "those",
      "there", "here", "i",    "you",   "we",   "they",  "he",   "she",  "not",  "so",
      "do",   "does", "has",   "have",  "had",  "will",  "can",  "into", "about", "what"};
  return kWords;
}

TokenSet tokenize(std::string_view text) {
  TokenSet out;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stopwords().contains(current)) out.insert(current);
    current.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || c == '_') {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size() || a.values.empty()) return 0.0;
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += static_cast<double>(a.values[i]) * b.values[i];
    na += static_cast<double>(a.values[i]) * a.values[i];
    nb += static_cast<double>(b.values[i]) * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

Embedding HashingEmbedder::embed(std::string_view text) const {
  Embedding e;
  e.values.assign(kEmbeddingDim, 0.0F);
  if (text.empty()) return e;
  const std::string padded = " " + to_lower(text) + " ";
  std::vector<double> tf(kEmbeddingDim, 0.0);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    tf[fnv1a(std::string_view(padded).substr(i, 3)) % kEmbeddingDim] += 1.0;
  }
  double norm = 0.0;
  for (double v : tf) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) return e;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) e.values[i] = static_cast<float>(tf[i] / norm);
  e.normalized = true;
  return e;
}

nlohmann::json to_json(const ErrorFixRecord& r) {
  return nlohmann::json{{"id", r.id},
                        {"signature", r.signature},
                        {"keywords", r.keywords},
                        {"description", r.description},
                        {"resolution_steps", r.resolution_steps},
                        {"embedding", r.embedding.values},
                        {"normalized", r.embedding.normalized},
                        {"created_at", r.created_at}};
}

ErrorFixRecord record_from_json(const nlohmann::json& j) {
  ErrorFixRecord r;
  r.id = j.at("id").get<std::uint64_t>();
  r.signature = j.at("signature").get<std::string>();
  r.keywords = j.at("keywords").get<TokenSet>();
  r.description = j.at("description").get<std::string>();
  r.resolution_steps = j.at("resolution_steps").get<std::vector<std::string>>();
  r.embedding.values = j.at("embedding").get<std::vector<float>>();
  r.embedding.normalized = j.value("normalized", true);
  r.created_at = j.at("created_at").get<std::int64_t>();
  return r;
}

KnowledgeBase::KnowledgeBase(std::shared_ptr<const Embedder> embedder, Clock clock)
    : embedder_(embedder ? std::move(embedder) : std::make_shared<HashingEmbedder>()),
      clock_(clock ? std::move(clock)
                   : Clock([] {
                       return std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::system_clock::now().time_since_epoch())
                           .count();
                     })),
      mutex_(std::make_unique<std::shared_mutex>()) {}

KnowledgeBase::KnowledgeBase(KnowledgeBase&&) noexcept = default;
KnowledgeBase& KnowledgeBase::operator=(KnowledgeBase&&) noexcept = default;

KnowledgeBase KnowledgeBase::open(const std::filesystem::path& path,
                                  std::shared_ptr<const Embedder> embedder, Clock clock) {
  KnowledgeBase kb(std::move(embedder), std::move(clock));
  kb.path_ = path;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::storage_error, "cannot read " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        auto r = record_from_json(nlohmann::json::parse(line));
        kb.next_id_ = std::max(kb.next_id_, r.id + 1);
        kb.records_.push_back(std::move(r));
        kb.index(kb.records_.back());
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::storage_error,
                    path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  return kb;
}

void KnowledgeBase::index(const ErrorFixRecord& r) {
  const auto pos = records_.size() - 1;
  for (const auto& token : r.keywords) inverted_[token].push_back(pos);
}

ErrorFixRecord KnowledgeBase::add_record(std::string signature, std::string description,
                                         std::vector<std::string> resolution_steps) {
  if (trim(signature).empty()) throw Error(Errc::validation_error, "signature must be non-empty", "signature");
  if (resolution_steps.empty()) {
    throw Error(Errc::validation_error, "resolution_steps must be non-empty", "resolution_steps");
  }
  ErrorFixRecord r;
  r.signature = std::move(signature);
  r.description = std::move(description);
  r.resolution_steps = std::move(resolution_steps);
  r.keywords = tokenize(r.signature + " " + r.description);
  if (r.keywords.empty()) {
    throw Error(Errc::validation_error, "signature and description yield no keywords", "signature");
  }
  r.embedding = embedder_->embed(r.signature + " " + r.description);

  std::unique_lock lock(*mutex_);
  r.id = next_id_;
  r.created_at = clock_();
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    if (!out || !(out << to_json(r).dump() << '\n')) {
      throw Error(Errc::storage_error, "cannot append to " + path_.string());
    }
  }
  ++next_id_;
  records_.push_back(r);
  index(records_.back());
  return r;
}

std::set<std::uint64_t> KnowledgeBase::keyword_filter(const TokenSet& query_tokens) const {
  std::shared_lock lock(*mutex_);
  std::set<std::uint64_t> out;
  for (const auto& token : query_tokens) {
    if (auto it = inverted_.find(token); it != inverted_.end()) {
      for (auto pos : it->second) out.insert(records_[pos].id);
    }
  }
  return out;
}

std::vector<RetrievalResult> KnowledgeBase::retrieve(std::string_view query, std::size_t k) const {
  if (k == 0) throw Error(Errc::invalid_argument, "k must be >= 1", "k");
  const auto candidates = keyword_filter(tokenize(query));
  if (candidates.empty()) return {};
  const auto q = embedder_->embed(query);

  std::shared_lock lock(*mutex_);
  struct Scored {
    RetrievalResult result;
    std::int64_t created_at;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const auto& r : records_) {
    if (!candidates.contains(r.id)) continue;
    scored.push_back({RetrievalResult{r.id, true, cosine(q, r.embedding)}, r.created_at});
  }
  std::sort(scored.begin(), scored.end(),
            [](const Scored& a, const Scored& b) { return a.result.similarity > b.result.similarity; });
  // Stored embeddings are float, so equal scores can differ by ~1e-7. Runs within
  // kSimilarityTie of their leader count as ties and go newest first.
  for (auto first = scored.begin(); first != scored.end();) {
    auto last = std::find_if(first, scored.end(), [&](const Scored& s) {
      return first->result.similarity - s.result.similarity > kSimilarityTie;
    });
    std::sort(first, last, [](const Scored& a, const Scored& b) {
      if (a.created_at != b.created_at) return a.created_at > b.created_at;
      return a.result.id > b.result.id;
    });
    first = last;
  }
  std::vector<RetrievalResult> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].result);
  return out;
}

std::vector<ErrorFixRecord> KnowledgeBase::records() const {
  std::shared_lock lock(*mutex_);
  return records_;
}

std::optional<ErrorFixRecord> KnowledgeBase::get(std::uint64_t id) const {
  std::shared_lock lock(*mutex_);
  for (const auto& r : records_) {
    if (r.id == id) return r;
  }
  return std::nullopt;
}

std::size_t KnowledgeBase::size() const {
  std::shared_lock lock(*mutex_);
  return records_.size();
}

}  // namespace helpdesk::kb
