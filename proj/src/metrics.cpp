// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "lunar/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include "lunar/errors.hpp"
#include "lunar/kernels.hpp"
#include "lunar/parallel.hpp"

namespace lunar {

std::vector<std::string> rouge_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& w : split_words(text)) {
        const bool has_alnum = std::any_of(w.begin(), w.end(), [](unsigned char c) { return std::isalnum(c) != 0; });
        if (has_alnum) {
            out.push_back(std::move(w));
        }
    }
    return out;
}

double rouge1_recall(const std::vector<std::string>& reference, const std::vector<std::string>& hypothesis) {
    if (reference.empty()) {
        throw ConfigError("rouge1_recall: empty reference");
    }
    std::map<std::string_view, long> counts;
    for (const auto& w : hypothesis) {
        ++counts[w];
    }
    std::size_t hit = 0;
    for (const auto& w : reference) {
        auto it = counts.find(w);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++hit;
        }
    }
    return static_cast<double>(hit) / static_cast<double>(reference.size());
}

double rouge1_recall(std::string_view reference, std::string_view hypothesis) {
    return rouge1_recall(rouge_tokens(reference), rouge_tokens(hypothesis));
}

std::vector<std::size_t> answer_ranks(const ModelCheckpoint& m, const Vocab& vocab, const QARecord& record,
                                      const Intervention& iv) {
    const TrainExample ex = make_example(vocab, record);
    // make_example appends EOS; it is not an answer token.
    const std::size_t n_answer = ex.tokens.size() - ex.prompt_len - 1;
    const Tokens input(ex.tokens.begin(), ex.tokens.end() - 2);
    const Matrix logits = forward(m, input, false, iv).logits;
    std::vector<std::size_t> ranks(n_answer);
    for (std::size_t i = 0; i < n_answer; ++i) {
        ranks[i] = rank_of_token(logits.row(ex.prompt_len - 1 + i), ex.tokens[ex.prompt_len + i]);
    }
    return ranks;
}

double mrr_from_ranks(const std::vector<std::size_t>& ranks) {
    if (ranks.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (std::size_t r : ranks) {
        s += 1.0 / static_cast<double>(r);
    }
    return s / static_cast<double>(ranks.size());
}

double thr_from_ranks(const std::vector<std::size_t>& ranks, std::size_t top_m) {
    if (top_m == 0) {
        throw ConfigError("thr: top_m must be >= 1");
    }
    if (ranks.empty()) {
        return 0.0;
    }
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [&](std::size_t r) { return r <= top_m; });
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mrr(const ModelCheckpoint& m, const Vocab& vocab, const QARecord& record, const Intervention& iv) {
    return mrr_from_ranks(answer_ranks(m, vocab, record, iv));
}

double thr(const ModelCheckpoint& m, const Vocab& vocab, const QARecord& record, std::size_t top_m,
           const Intervention& iv) {
    return thr_from_ranks(answer_ranks(m, vocab, record, iv), top_m);
}

double deviation_score(double forget_rouge1, double retain_rouge1) {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(forget_rouge1) || !in_unit(retain_rouge1)) {
        throw ConfigError("deviation_score: inputs must lie in [0, 1]");
    }
    const double r = 1.0 - retain_rouge1;
    return 100.0 * std::sqrt(forget_rouge1 * forget_rouge1 + r * r);
}

std::vector<float> embed_text(const ModelCheckpoint& m, const Vocab& vocab, std::string_view text) {
    const std::size_t d = m.config.d_model;
    std::vector<double> acc(d, 0.0);
    const Tokens ids = vocab.encode_words(text);
    std::vector<float> out(d, 0.0f);
    if (ids.empty()) {
        return out;
    }
    for (TokenId id : ids) {
        const auto row = m.token_embedding.row(static_cast<std::size_t>(id));
        for (std::size_t j = 0; j < d; ++j) {
            acc[j] += row[j];
        }
    }
    double norm = 0.0;
    for (double v : acc) {
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        return out;
    }
    for (std::size_t j = 0; j < d; ++j) {
        out[j] = static_cast<float>(acc[j] / norm);
    }
    return out;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine: vectors differ in length");
    }
    const double ab = kernels::dot_f64(a.data(), b.data(), a.size());
    const double aa = kernels::dot_f64(a.data(), a.data(), a.size());
    const double bb = kernels::dot_f64(b.data(), b.data(), b.size());
    if (aa == 0.0 || bb == 0.0) {
        return 0.0;
    }
    return ab / std::sqrt(aa * bb);
}

double control_score(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<std::string>& responses,
                     const std::vector<std::string>& desired) {
    if (desired.empty()) {
        throw ConfigError("control_score: desired response list is empty");
    }
    if (responses.empty()) {
        return 0.0;
    }
    std::vector<std::vector<float>> targets;
    for (const auto& s : desired) {
        targets.push_back(embed_text(m, vocab, s));
    }
    double total = 0.0;
    for (const auto& r : responses) {
        const auto e = embed_text(m, vocab, r);
        double best = -1.0;
        for (const auto& t : targets) {
            best = std::max(best, cosine(e, t));
        }
        total += best;
    }
    return total / static_cast<double>(responses.size());
}

std::string respond(const ModelCheckpoint& m, const Vocab& vocab, std::string_view question, std::size_t max_new,
                    const Intervention& iv) {
    return vocab.decode(greedy_decode(m, prompt_tokens(vocab, question), max_new, iv));
}

std::vector<RecordEval> evaluate_records(const ModelCheckpoint& m, const Vocab& vocab,
                                         const std::vector<QARecord>& records, const std::string& split,
                                         const EvalOptions& options) {
    const std::size_t top_m = std::min<std::size_t>(options.top_m, m.config.vocab_size);
    std::vector<RecordEval> rows(records.size());
    parallel_for(records.size(), options.threads, [&](std::size_t i) {
        const QARecord& rec = records[i];
        RecordEval& row = rows[i];
        row.split = split;
        row.question = rec.question;
        row.answer = rec.answer;
        row.response = respond(m, vocab, rec.question, options.max_new_tokens, options.intervention);
        row.rouge1 = rouge1_recall(rec.answer, row.response);
        const auto ranks = answer_ranks(m, vocab, rec, options.intervention);
        row.mrr = mrr_from_ranks(ranks);
        row.thr = thr_from_ranks(ranks, top_m);
    });
    return rows;
}

SplitEval summarize(const std::vector<RecordEval>& rows) {
    SplitEval s;
    if (rows.empty()) {
        return s;
    }
    for (const auto& r : rows) {
        s.rouge1 += r.rouge1;
        s.mrr += r.mrr;
        s.thr += r.thr;
    }
    const auto n = static_cast<double>(rows.size());
    s.rouge1 /= n;
    s.mrr /= n;
    s.thr /= n;
    return s;
}

EvalReport evaluate(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                    const EvalOptions& options) {
    EvalReport rep;
    rep.top_m_requested = options.top_m;
    rep.top_m_effective = std::min<std::size_t>(options.top_m, m.config.vocab_size);
    auto forget = evaluate_records(m, vocab, bundle.forget, "forget", options);
    auto retain = evaluate_records(m, vocab, bundle.retain, "retain", options);
    const SplitEval f = summarize(forget);
    const SplitEval r = summarize(retain);
    rep.forget_rouge1 = f.rouge1;
    rep.forget_mrr = f.mrr;
    rep.forget_thr = f.thr;
    rep.retain_rouge1 = r.rouge1;
    rep.retain_mrr = r.mrr;
    rep.retain_thr = r.thr;
    rep.deviation_score = deviation_score(rep.forget_rouge1, rep.retain_rouge1);
    std::vector<std::string> responses;
    for (const auto& row : forget) {
        responses.push_back(row.response);
    }
    rep.control_score = bundle.desired_responses.empty()
                            ? 0.0
                            : control_score(m, vocab, responses, bundle.desired_responses);
    rep.records = std::move(forget);
    rep.records.insert(rep.records.end(), retain.begin(), retain.end());
    return rep;
}

nlohmann::json to_json(const EvalReport& r, bool with_records) {
    nlohmann::json j;
    j["forget_rouge1"] = r.forget_rouge1;
    j["retain_rouge1"] = r.retain_rouge1;
    j["forget_mrr"] = r.forget_mrr;
    j["retain_mrr"] = r.retain_mrr;
    j["forget_thr"] = r.forget_thr;
    j["retain_thr"] = r.retain_thr;
    j["deviation_score"] = r.deviation_score;
    j["control_score"] = r.control_score;
    j["top_m_requested"] = r.top_m_requested;
    j["top_m_effective"] = r.top_m_effective;
    if (with_records) {
        auto rows = nlohmann::json::array();
        for (const auto& rec : r.records) {
            rows.push_back({{"split", rec.split},
                            {"question", rec.question},
                            {"answer", rec.answer},
                            {"response", rec.response},
                            {"rouge1", rec.rouge1},
                            {"mrr", rec.mrr},
                            {"thr", rec.thr}});
        }
        j["records"] = std::move(rows);
    }
    return j;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::vector<std::vector<std::string>> eval_csv_rows(const EvalReport& r, const std::string& checkpoint) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"checkpoint", "split", "rouge1", "mrr", "thr", "deviation_score", "control_score", "top_m"});
    rows.push_back({checkpoint, "forget", fmt(r.forget_rouge1), fmt(r.forget_mrr), fmt(r.forget_thr),
                    fmt(r.deviation_score), fmt(r.control_score), std::to_string(r.top_m_effective)});
    rows.push_back({checkpoint, "retain", fmt(r.retain_rouge1), fmt(r.retain_mrr), fmt(r.retain_thr),
                    fmt(r.deviation_score), fmt(r.control_score), std::to_string(r.top_m_effective)});
    return rows;
}

}  // namespace lunar
