// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Attacks on an unlearned checkpoint. None of them modify the input model:
// they are evaluation-time interventions or operate on copies.
#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lunar/corpus.hpp"
#include "lunar/metrics.hpp"
#include "lunar/model.hpp"
#include "lunar/unlearn.hpp"

namespace lunar {

struct AttackResult {
    std::string attack_name;
    double forget_rouge1_post = 0.0;
    double retain_rouge1_post = 0.0;
    std::map<std::string, double> notes;
};

// Each listed block acts as the identity. Throws ConfigError for an invalid
// layer or when every layer would be skipped.
AttackResult layer_skip(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                        const std::vector<std::size_t>& layers_to_skip, const EvalOptions& options = {});
// One single-layer skip per layer, in layer order.
std::vector<AttackResult> layer_skip_sweep(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                                           const EvalOptions& options = {});

// Subtracts uv.direction from residual_out(uv.layer) at every position.
AttackResult reverse_direction(const ModelCheckpoint& m, const Vocab& vocab, const UnlearningVector& uv,
                               const CorpusBundle& bundle, const EvalOptions& options = {});

// Evaluates a quantized copy. bits must be 4 or 8.
AttackResult quantization_attack(const ModelCheckpoint& m, const Vocab& vocab, int bits, const CorpusBundle& bundle,
                                 const EvalOptions& options = {});

// Asks every forget and retain question through its phrasings. Variant 0 is
// the original question, variant i >= 1 the i-th entry of bundle.paraphrases.
// forget_rouge1_post / retain_rouge1_post are means over all asked variants;
// notes carry the worst case (max forget, min retain) per question.
// Throws ConfigError when paraphrases are missing for a question.
AttackResult paraphrase_attack(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                               const std::vector<std::size_t>& variants = {1, 2},
                               const EvalOptions& options = {});

struct LensRow {
    std::size_t layer = 0;
    std::size_t rank = 0;
    std::string token;
    double probability = 0.0;
};

// Final norm + unembedding applied to residual_out(layer) at the last prompt
// position, for layers in [0, L]. Rows are grouped by layer, ranks 1..k.
std::vector<LensRow> logit_lens(const ModelCheckpoint& m, const Vocab& vocab, const Tokens& prompt,
                                const std::vector<std::size_t>& layers, std::size_t k);
// Aligned text table, one line per layer with its top-k tokens.
std::string format_lens_table(const std::vector<LensRow>& rows);

nlohmann::json to_json(const AttackResult& r);
nlohmann::json to_json(const std::vector<LensRow>& rows);

}  // namespace lunar
