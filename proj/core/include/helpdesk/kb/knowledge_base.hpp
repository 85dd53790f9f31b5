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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace helpdesk::kb {

inline constexpr std::size_t kEmbeddingDim = 256;

using TokenSet = std::set<std::string>;

/// Fixed English stopword list (50 words, version 1).
const std::set<std::string, std::less<>>& stopwords();
inline constexpr int kStopwordListVersion = 1;

/// Lowercased runs of [a-z0-9_]; everything else (including '/') separates
/// tokens. Stopwords are removed.
TokenSet tokenize(std::string_view text);

struct Embedding {
  std::vector<float> values;  // kEmbeddingDim entries
  bool normalized = false;    // false for the degenerate zero vector

  bool operator==(const Embedding&) const = default;
};

/// Cosine similarity; 0 when either side is the zero vector.
double cosine(const Embedding& a, const Embedding& b);

/// Retrieval treats similarities this close as equal and ranks them newest first.
inline constexpr double kSimilarityTie = 1e-6;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Embedding embed(std::string_view text) const = 0;
};

/// Feature-hashed character-trigram term frequencies, L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  Embedding embed(std::string_view text) const override;
};

/// Speaks {text} -> {vector[D]} over HTTP. Throws provider_unavailable.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(std::string url) : url_(std::move(url)) {}
  Embedding embed(std::string_view text) const override;

 private:
  std::string url_;
};

struct ErrorFixRecord {
  std::uint64_t id = 0;
  std::string signature;
  TokenSet keywords;
  std::string description;
  std::vector<std::string> resolution_steps;
  Embedding embedding;
  std::int64_t created_at = 0;  // milliseconds

  bool operator==(const ErrorFixRecord&) const = default;
};

nlohmann::json to_json(const ErrorFixRecord& r);
ErrorFixRecord record_from_json(const nlohmann::json& j);

struct RetrievalResult {
  std::uint64_t id = 0;
  bool stage1_hit = true;
  double similarity = 0.0;

  bool operator==(const RetrievalResult&) const = default;
};

/// Append-only error/fix store with keyword prefilter + embedding rerank.
///
/// Reads may run concurrently; appends are serialized behind a single writer.
class KnowledgeBase {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit KnowledgeBase(std::shared_ptr<const Embedder> embedder = nullptr, Clock clock = nullptr);

  /// Loads an existing JSON Lines file (if present) and appends new records to it.
  static KnowledgeBase open(const std::filesystem::path& path,
                            std::shared_ptr<const Embedder> embedder = nullptr,
                            Clock clock = nullptr);

  ErrorFixRecord add_record(std::string signature, std::string description,
                            std::vector<std::string> resolution_steps);

  std::set<std::uint64_t> keyword_filter(const TokenSet& query_tokens) const;
  std::vector<RetrievalResult> retrieve(std::string_view query, std::size_t k) const;

  std::vector<ErrorFixRecord> records() const;
  std::optional<ErrorFixRecord> get(std::uint64_t id) const;
  std::size_t size() const;
  Embedding embed(std::string_view text) const { return embedder_->embed(text); }

  KnowledgeBase(KnowledgeBase&&) noexcept;
  KnowledgeBase& operator=(KnowledgeBase&&) noexcept;

 private:
  void index(const ErrorFixRecord& r);

  std::shared_ptr<const Embedder> embedder_;
  Clock clock_;
  std::filesystem::path path_;
  mutable std::unique_ptr<std::shared_mutex> mutex_;
  std::vector<ErrorFixRecord> records_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> inverted_;
  std::uint64_t next_id_ = 1;
};

}  // namespace helpdesk::kb
