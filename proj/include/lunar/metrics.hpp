// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Forget/retain evaluation: ROUGE1 recall, teacher-forced MRR and top-m hit
// ratio, the deviation score, and a bag-of-embeddings control score.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lunar/corpus.hpp"
#include "lunar/model.hpp"

namespace lunar {

// Lowercased words with punctuation-only tokens dropped.
std::vector<std::string> rouge_tokens(std::string_view text);

// Clipped unigram overlap / reference length. Throws ConfigError on an empty reference.
double rouge1_recall(const std::vector<std::string>& reference, const std::vector<std::string>& hypothesis);
double rouge1_recall(std::string_view reference, std::string_view hypothesis);

// Rank of every answer token (and the closing EOS is not scored) given the
// question and the preceding gold answer tokens.
std::vector<std::size_t> answer_ranks(const ModelCheckpoint& m, const Vocab& vocab, const QARecord& record,
                                      const Intervention& iv = {});

double mrr_from_ranks(const std::vector<std::size_t>& ranks);
double thr_from_ranks(const std::vector<std::size_t>& ranks, std::size_t top_m);
double mrr(const ModelCheckpoint& m, const Vocab& vocab, const QARecord& record, const Intervention& iv = {});
double thr(const ModelCheckpoint& m, const Vocab& vocab, const QARecord& record, std::size_t top_m,
           const Intervention& iv = {});

// 100 * sqrt(f^2 + (1 - r)^2). Throws ConfigError outside [0, 1].
double deviation_score(double forget_rouge1, double retain_rouge1);

// Normalized mean of the token-embedding rows of the words of text; zero for empty text.
std::vector<float> embed_text(const ModelCheckpoint& m, const Vocab& vocab, std::string_view text);
// 0 when either vector is zero.
double cosine(const std::vector<float>& a, const std::vector<float>& b);
// Mean over responses of the best cosine against any desired phrase; 0 for no responses.
double control_score(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<std::string>& responses,
                     const std::vector<std::string>& desired);

// Greedy answer to a question, decoded to text.
std::string respond(const ModelCheckpoint& m, const Vocab& vocab, std::string_view question,
                    std::size_t max_new, const Intervention& iv = {});

struct RecordEval {
    std::string split;
    std::string question;
    std::string answer;
    std::string response;
    double rouge1 = 0.0;
    double mrr = 0.0;
    double thr = 0.0;
};

struct SplitEval {
    double rouge1 = 0.0;
    double mrr = 0.0;
    double thr = 0.0;
};

struct EvalOptions {
    std::size_t top_m = 100;
    std::size_t max_new_tokens = 16;
    std::size_t threads = 1;
    Intervention intervention;
};

struct EvalReport {
    double forget_rouge1 = 0.0;
    double retain_rouge1 = 0.0;
    double forget_mrr = 0.0;
    double retain_mrr = 0.0;
    double forget_thr = 0.0;
    double retain_thr = 0.0;
    double deviation_score = 0.0;
    double control_score = 0.0;
    std::size_t top_m_requested = 0;
    std::size_t top_m_effective = 0;
    std::vector<RecordEval> records;
};

// Scores every record of one split.
std::vector<RecordEval> evaluate_records(const ModelCheckpoint& m, const Vocab& vocab,
                                         const std::vector<QARecord>& records, const std::string& split,
                                         const EvalOptions& options);
SplitEval summarize(const std::vector<RecordEval>& rows);

// Control score is taken over the responses to the forget questions.
EvalReport evaluate(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                    const EvalOptions& options = {});

nlohmann::json to_json(const EvalReport& r, bool with_records = true);
// Header plus one row per split (forget, retain) for a named checkpoint.
std::vector<std::vector<std::string>> eval_csv_rows(const EvalReport& r, const std::string& checkpoint);

}  // namespace lunar
