// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "lunar/attacks.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "lunar/errors.hpp"
#include "lunar/kernels.hpp"
#include "model_internal.hpp"

namespace lunar {

namespace {

AttackResult from_eval(std::string name, const EvalReport& r) {
    AttackResult a;
    a.attack_name = std::move(name);
    a.forget_rouge1_post = r.forget_rouge1;
    a.retain_rouge1_post = r.retain_rouge1;
    a.notes["forget_mrr"] = r.forget_mrr;
    a.notes["retain_mrr"] = r.retain_mrr;
    a.notes["control_score"] = r.control_score;
    return a;
}

}  // namespace

AttackResult layer_skip(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                        const std::vector<std::size_t>& layers_to_skip, const EvalOptions& options) {
    std::vector<std::size_t> skip = layers_to_skip;
    std::sort(skip.begin(), skip.end());
    skip.erase(std::unique(skip.begin(), skip.end()), skip.end());
    for (std::size_t l : skip) {
        if (l < 1 || l > m.config.n_layers) {
            throw ConfigError("layer_skip: layer " + std::to_string(l) + " outside [1, " +
                              std::to_string(m.config.n_layers) + "]");
        }
    }
    if (skip.size() == m.config.n_layers) {
        throw ConfigError("layer_skip: cannot skip every layer");
    }
    EvalOptions eo = options;
    eo.intervention.skip_layers.insert(eo.intervention.skip_layers.end(), skip.begin(), skip.end());
    std::string name = "layer_skip";
    for (std::size_t l : skip) {
        name += "_" + std::to_string(l);
    }
    AttackResult a = from_eval(name, evaluate(m, vocab, bundle, eo));
    a.notes["skipped_layers"] = static_cast<double>(skip.size());
    return a;
}

std::vector<AttackResult> layer_skip_sweep(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                                           const EvalOptions& options) {
    std::vector<AttackResult> out;
    for (std::size_t l = 1; l <= m.config.n_layers; ++l) {
        out.push_back(layer_skip(m, vocab, bundle, {l}, options));
    }
    return out;
}

AttackResult reverse_direction(const ModelCheckpoint& m, const Vocab& vocab, const UnlearningVector& uv,
                               const CorpusBundle& bundle, const EvalOptions& options) {
    if (uv.layer < 1 || uv.layer > m.config.n_layers) {
        throw ConfigError("reverse_direction: layer " + std::to_string(uv.layer) + " outside the model");
    }
    if (uv.direction.size() != m.config.d_model) {
        throw DimensionError("reverse_direction: direction has the wrong dimension");
    }
    std::vector<float> shift = uv.direction;
    for (float& v : shift) {
        v = -v;
    }
    EvalOptions eo = options;
    eo.intervention.residual_shifts.emplace_back(uv.layer, std::move(shift));
    AttackResult a = from_eval("reverse_direction", evaluate(m, vocab, bundle, eo));
    a.notes["layer"] = static_cast<double>(uv.layer);
    return a;
}

AttackResult quantization_attack(const ModelCheckpoint& m, const Vocab& vocab, int bits, const CorpusBundle& bundle,
                                 const EvalOptions& options) {
    const ModelCheckpoint q = quantize(m, QuantSpec{bits});
    AttackResult a = from_eval("quantize_" + std::to_string(bits) + "bit", evaluate(q, vocab, bundle, options));
    a.notes["bits"] = bits;
    return a;
}

AttackResult paraphrase_attack(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                               const std::vector<std::size_t>& variants, const EvalOptions& options) {
    if (variants.empty()) {
        throw ConfigError("paraphrase_attack: no variants requested");
    }
    auto phrasings = [&](const std::vector<QARecord>& records) {
        std::vector<QARecord> asked;
        for (const auto& rec : records) {
            for (std::size_t v : variants) {
                QARecord q = rec;
                if (v > 0) {
                    auto it = bundle.paraphrases.find(rec.question);
                    if (it == bundle.paraphrases.end() || it->second.size() < v) {
                        throw ConfigError("paraphrase_attack: no variant " + std::to_string(v) + " for question '" +
                                          rec.question + "'");
                    }
                    q.question = it->second[v - 1];
                }
                asked.push_back(std::move(q));
            }
        }
        return asked;
    };
    // Per original question: the worst case over its variants.
    auto worst = [&](const std::vector<RecordEval>& rows, bool forget) {
        double acc = 0.0;
        const std::size_t per = variants.size();
        for (std::size_t i = 0; i < rows.size(); i += per) {
            double w = rows[i].rouge1;
            for (std::size_t j = i; j < i + per; ++j) {
                w = forget ? std::max(w, rows[j].rouge1) : std::min(w, rows[j].rouge1);
            }
            acc += w;
        }
        return rows.empty() ? 0.0 : acc / static_cast<double>(rows.size() / per);
    };
    const auto f = evaluate_records(m, vocab, phrasings(bundle.forget), "forget", options);
    const auto r = evaluate_records(m, vocab, phrasings(bundle.retain), "retain", options);
    AttackResult a;
    a.attack_name = "paraphrase";
    a.forget_rouge1_post = summarize(f).rouge1;
    a.retain_rouge1_post = summarize(r).rouge1;
    a.notes["forget_rouge1_worst"] = worst(f, true);
    a.notes["retain_rouge1_worst"] = worst(r, false);
    a.notes["variants"] = static_cast<double>(variants.size());
    return a;
}

std::vector<LensRow> logit_lens(const ModelCheckpoint& m, const Vocab& vocab, const Tokens& prompt,
                                const std::vector<std::size_t>& layers, std::size_t k) {
    if (k == 0) {
        throw ConfigError("logit_lens: k must be >= 1");
    }
    const std::size_t d = m.config.d_model;
    const std::size_t c = m.config.vocab_size;
    k = std::min(k, c);
    const auto fr = forward(m, prompt, true);
    std::vector<LensRow> rows;
    for (std::size_t l : layers) {
        if (l > m.config.n_layers) {
            throw ConfigError("logit_lens: layer " + std::to_string(l) + " outside [0, " +
                              std::to_string(m.config.n_layers) + "]");
        }
        const Matrix& a = fr.trace->residual_out(l);
        Matrix last(1, d);
        std::copy_n(a.row(a.rows() - 1).data(), d, last.data());
        Matrix normed;
        std::vector<float> inv;
        detail::rmsnorm_rows(last, m.final_norm, normed, inv);
        std::vector<float> logits(c);
        kernels::gemm_nt(1, c, d, normed.data(), d, m.unembedding.data(), d, logits.data(), c);
        const std::vector<float> prob = softmax(logits);
        std::vector<std::size_t> idx(c);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                          [&](std::size_t x, std::size_t y) { return prob[x] != prob[y] ? prob[x] > prob[y] : x < y; });
        for (std::size_t r = 0; r < k; ++r) {
            rows.push_back(LensRow{l, r + 1, vocab.token(static_cast<TokenId>(idx[r])), prob[idx[r]]});
        }
    }
    return rows;
}

std::string format_lens_table(const std::vector<LensRow>& rows) {
    std::size_t width = 5;
    std::size_t k = 0;
    for (const auto& r : rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s (%.3f)", r.token.c_str(), r.probability);
        width = std::max(width, std::string(buf).size());
        k = std::max(k, r.rank);
    }
    std::ostringstream out;
    auto cell = [&](const std::string& s) {
        out << "  " << s << std::string(width - std::min(width, s.size()), ' ');
    };
    out << "layer";
    for (std::size_t i = 1; i <= k; ++i) {
        cell("top" + std::to_string(i));
    }
    out << '\n';
    for (std::size_t i = 0; i < rows.size();) {
        const std::size_t layer = rows[i].layer;
        std::string label = std::to_string(layer);
        out << label << std::string(5 - std::min<std::size_t>(5, label.size()), ' ');
        for (; i < rows.size() && rows[i].layer == layer; ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%s (%.3f)", rows[i].token.c_str(), rows[i].probability);
            cell(buf);
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::json to_json(const AttackResult& r) {
    nlohmann::json j;
    j["attack_name"] = r.attack_name;
    j["forget_rouge1_post"] = r.forget_rouge1_post;
    j["retain_rouge1_post"] = r.retain_rouge1_post;
    j["notes"] = r.notes;
    return j;
}

nlohmann::json to_json(const std::vector<LensRow>& rows) {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"layer", r.layer}, {"rank", r.rank}, {"token", r.token}, {"probability", r.probability}});
    }
    return arr;
}

}  // namespace lunar
