// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Experiment configuration: a flat `key = value` file, strict parsing, flag
// overrides, a canonical text form and its hash.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lunar/corpus.hpp"
#include "lunar/metrics.hpp"
#include "lunar/model.hpp"
#include "lunar/unlearn.hpp"

namespace lunar {

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::string out_dir = "out";

    // model
    std::uint32_t d_model = 64;
    std::uint32_t n_layers = 4;
    std::uint32_t n_heads = 4;
    std::uint32_t d_mlp = 256;
    std::uint32_t max_seq_len = 64;

    // corpus
    std::size_t n_entity_pairs = 8;
    std::size_t qa_per_pair = 8;
    std::size_t n_forget_pairs = 1;
    std::size_t n_heldout_pairs = 32;

    // training
    std::size_t train_epochs = 60;
    double train_lr = 0.05;
    std::size_t train_batch = 8;
    double train_momentum = 0.9;
    double train_clip_norm = 1.0;
    bool train_paraphrases = true;

    // unlearning
    std::vector<std::size_t> layers;  // empty = automatic top_k selection
    std::size_t top_k = 1;
    bool top_k_cumulative = true;
    std::vector<std::size_t> candidates;
    SolverKind solver = SolverKind::ClosedForm;
    std::optional<double> lambda;  // empty = auto
    std::size_t sgd_epochs = 500;
    std::optional<double> sgd_lr;  // empty = auto
    std::size_t sgd_batch = 0;
    UvPositions uv_positions = UvPositions::PromptLast;
    TargetPositions target_positions = TargetPositions::All;
    std::optional<double> retain_ratio;  // empty = all
    ReferenceClass reference = ReferenceClass::UnknownEntity;
    std::size_t max_new_tokens = 16;

    // evaluation
    std::size_t top_m = 100;

    // attacks
    bool attack_layer_skip = true;
    bool attack_reverse = true;
    bool attack_quant8 = true;
    bool attack_quant4 = true;
    bool attack_paraphrase = true;
    bool attack_logit_lens = true;

    std::string cost_preset = "llama2-7b";

    CorpusSpec corpus_spec() const;
    ModelConfig model_config(std::uint32_t vocab_size) const;
    TrainOptions train_options() const;
    UnlearnOptions unlearn_options() const;
    EvalOptions eval_options() const;

    // Sorted `key = value` lines, one per key, every key present.
    std::string canonical() const;
    // FNV-1a 64 over every key except out_dir, as 16 lowercase hex digits.
    std::string hash() const;
};

// Every accepted key, sorted.
std::vector<std::string> config_keys();

// Sets one key from its text form. Throws ConfigError naming the key for an
// unknown key or a malformed value.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
// `origin` names the source in error messages. Duplicate keys are rejected.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
// Throws IoError naming the path when it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies "key=value" overrides in order.
void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace lunar
