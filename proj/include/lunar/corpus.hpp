// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Word-level tokenizer and the synthetic contract-QA corpus: forget/retain
// splits over random entity pairs, refusal-behaviour training data, reference
// prompt sets and template paraphrases.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace lunar {

using TokenId = std::int32_t;
using Tokens = std::vector<TokenId>;

// Lowercases and splits on whitespace; every non-alphanumeric character is a
// token of its own.
std::vector<std::string> split_words(std::string_view text);
// split_words joined with single spaces.
std::string normalize_text(std::string_view text);

class Vocab {
  public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kPad = 2;
    static constexpr TokenId kUnk = 3;

    Vocab();
    // Specials first, then the given words in order, skipping duplicates.
    explicit Vocab(const std::vector<std::string>& words);

    TokenId add(const std::string& word);
    TokenId id(std::string_view word) const;  // kUnk when absent
    const std::string& token(TokenId id) const;
    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    // Words without specials.
    Tokens encode_words(std::string_view text) const;
    // [BOS] words [EOS]
    Tokens encode(std::string_view text) const;
    // Skips specials; joins words with single spaces.
    std::string decode(const Tokens& ids) const;

    // One token per line, specials included.
    void save(const std::filesystem::path& path) const;
    static Vocab load(const std::filesystem::path& path);

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
};

struct QARecord {
    std::string question;  // normalized text, ends with "?"
    std::string answer;    // normalized text, non-empty
    std::string entity_pair;
    std::string template_id;

    bool operator==(const QARecord&) const = default;
};

// Bundle of everything an experiment needs from the data side.
struct CorpusBundle {
    std::vector<QARecord> forget;
    std::vector<QARecord> retain;
    std::vector<QARecord> refusal_training;
    std::vector<std::string> reference;          // unknown-entity questions
    std::vector<std::string> reference_refusal;  // prompts the model is trained to decline
    std::map<std::string, std::vector<std::string>> paraphrases;  // question -> variants
    std::vector<std::string> desired_responses;
    std::vector<std::string> unrelated_responses;

    bool operator==(const CorpusBundle&) const = default;
};

struct CorpusSpec {
    std::uint64_t seed = 1;
    std::size_t n_entity_pairs = 8;
    std::size_t qa_per_pair = 8;
    std::size_t n_forget_pairs = 1;
    // Fictitious contracts whose questions are answered with a refusal.
    std::size_t n_heldout_pairs = 32;
};

struct Corpus {
    CorpusBundle bundle;
    Vocab vocab;
};

// Deterministic under spec.seed. Throws ConfigError when n_forget_pairs >=
// n_entity_pairs, qa_per_pair < 4 or qa_per_pair exceeds the template table.
Corpus build_corpus(const CorpusSpec& spec);

// Number of question templates available.
std::size_t template_count();
const std::vector<std::string>& template_ids();

// Alternate phrasings of q.question with the same slot bindings, at least two,
// never including the original. Throws ConfigError for an unknown template or a
// question that does not fit its template.
std::vector<std::string> paraphrase(const QARecord& q, std::uint64_t seed);

// Splits forget records by entity pair, one bundle per pair in order of first
// appearance; each bundle keeps the shared retain set and reference data.
std::vector<CorpusBundle> split_forget_by_pair(const CorpusBundle& bundle);

// Line-delimited JSON, one object per line with keys
// split, question, answer, entity_pair, template_id. A non-empty meta object is
// written first as a line with split "meta"; the importer skips it.
void export_corpus_jsonl(const CorpusBundle& bundle, const std::filesystem::path& path,
                         const nlohmann::json& meta = {});
CorpusBundle import_corpus_jsonl(const std::filesystem::path& path);

// forget, retain, refusal_training, then (optionally) every paraphrase variant
// of the forget and retain questions bound to the original answer.
std::vector<QARecord> training_records(const CorpusBundle& bundle, bool with_paraphrases);

// Every distinct word appearing anywhere in the bundle, sorted.
std::vector<std::string> bundle_words(const CorpusBundle& bundle);

}  // namespace lunar
