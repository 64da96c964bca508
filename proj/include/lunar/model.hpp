// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Toy decoder-only transformer: pre-norm residual blocks with causal
// multi-head attention (rotary positions) and a ReLU MLP, RMS normalization,
// untied unembedding. Layers are numbered 1..n_layers; residual stream index 0
// is the token embedding.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lunar/corpus.hpp"
#include "lunar/linalg.hpp"

namespace lunar {

struct ModelConfig {
    std::uint32_t d_model = 64;
    std::uint32_t n_layers = 4;
    std::uint32_t n_heads = 4;
    std::uint32_t d_mlp = 256;
    std::uint32_t vocab_size = 0;
    std::uint32_t max_seq_len = 64;
    std::uint32_t seed = 1;

    // Throws ConfigError naming the violated constraint.
    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

struct LayerWeights {
    Matrix wq, wk, wv, wo;        // d x d, applied as x * W
    std::vector<float> attn_norm;  // d
    std::vector<float> mlp_norm;   // d
    Matrix up;                     // d x p
    Matrix down;                   // p x d  (the down-projection)

    bool operator==(const LayerWeights&) const = default;
};

struct ModelCheckpoint {
    ModelConfig config;
    Matrix token_embedding;  // c x d
    std::vector<LayerWeights> layers;
    std::vector<float> final_norm;  // d
    Matrix unembedding;             // c x d

    bool operator==(const ModelCheckpoint&) const = default;

    LayerWeights& layer(std::size_t l) { return layers.at(l - 1); }
    const LayerWeights& layer(std::size_t l) const { return layers.at(l - 1); }
};

// Random initialization from config.seed.
ModelCheckpoint init_model(const ModelConfig& config);
// Same shapes, every value zero.
ModelCheckpoint zeros_like(const ModelCheckpoint& m);

struct TensorView {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::span<float> values;
};
struct ConstTensorView {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::span<const float> values;
};

// Stable order: tok_embeddings, layers.<l>.{attn_norm,wq,wk,wv,wo,mlp_norm,up,down}, final_norm, unembedding.
std::vector<TensorView> tensors(ModelCheckpoint& m);
std::vector<ConstTensorView> tensors(const ModelCheckpoint& m);
std::string down_projection_name(std::size_t layer);

// Names of tensors whose bytes differ between two same-shaped checkpoints.
std::vector<std::string> diff_tensors(const ModelCheckpoint& a, const ModelCheckpoint& b);

struct ActivationTrace {
    std::size_t prompt_len = 0;
    std::vector<Matrix> residual;        // L + 1 entries, each T x d; [0] is the embedding
    std::vector<Matrix> attn_out;        // L entries, T x d
    std::vector<Matrix> downproj_input;  // L entries, T x p (post-ReLU)
    std::vector<Matrix> mlp_out;         // L entries, T x d

    const Matrix& residual_out(std::size_t l) const { return residual.at(l); }
    const Matrix& hidden(std::size_t l) const { return downproj_input.at(l - 1); }
    const Matrix& mlp(std::size_t l) const { return mlp_out.at(l - 1); }
    const Matrix& attn(std::size_t l) const { return attn_out.at(l - 1); }
};

// Evaluation-time edits of the residual stream.
struct Intervention {
    std::vector<std::size_t> skip_layers;  // block l acts as the identity
    // Added to residual_out(layer) at every position.
    std::vector<std::pair<std::size_t, std::vector<float>>> residual_shifts;

    bool empty() const { return skip_layers.empty() && residual_shifts.empty(); }
};

struct ForwardResult {
    Matrix logits;  // T x c
    std::optional<ActivationTrace> trace;
};

// Throws ConfigError when tokens is empty or longer than max_seq_len.
ForwardResult forward(const ModelCheckpoint& m, const Tokens& tokens, bool capture,
                      const Intervention& intervention = {});

// Row-wise softmax of a logits matrix, f64 internally.
std::vector<float> softmax(std::span<const float> logits);

// 1 + number of strictly greater logits.
std::size_t rank_of_token(std::span<const float> logits, TokenId target);

// Appends the argmax token (lowest id on ties) until EOS or max_new tokens.
// The returned continuation includes the EOS when one is produced.
Tokens greedy_decode(const ModelCheckpoint& m, const Tokens& prompt, std::size_t max_new,
                     const Intervention& intervention = {});

// [BOS] + question words.
Tokens prompt_tokens(const Vocab& vocab, std::string_view question);

// A training example: prompt tokens followed by answer tokens and EOS; loss only on the answer part.
struct TrainExample {
    Tokens tokens;
    std::size_t prompt_len = 0;
};
TrainExample make_example(const Vocab& vocab, const QARecord& record);

struct TrainOptions {
    std::size_t epochs = 0;
    float lr = 0.05f;
    std::size_t batch = 8;
    float momentum = 0.9f;
    float clip_norm = 1.0f;
    std::uint64_t seed = 1;
    // Called after every epoch with (epoch, mean loss); may be empty.
    std::function<void(std::size_t, double)> on_epoch;
};

struct TrainResult {
    ModelCheckpoint model;
    std::vector<double> loss_curve;  // mean answer-token cross-entropy per epoch
    double answer_token_accuracy = 0.0;
    bool diverged = false;
};

// Mini-batch SGD with momentum on answer tokens. On a non-finite loss the last
// good checkpoint is returned with diverged = true. Throws ConfigError for an
// empty record list.
TrainResult train(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<QARecord>& records,
                  const TrainOptions& options);
TrainResult train_examples(const ModelCheckpoint& m, const std::vector<TrainExample>& examples,
                           const TrainOptions& options);

// Mean cross-entropy of the answer tokens and its gradient w.r.t. every tensor.
// Exposed for gradient checks.
double loss_and_gradient(const ModelCheckpoint& m, const TrainExample& ex, ModelCheckpoint* grad);

// Teacher-forced fraction of answer tokens predicted by argmax.
double answer_token_accuracy(const ModelCheckpoint& m, const std::vector<TrainExample>& examples);

struct QuantSpec {
    int bits = 8;  // 4 or 8; symmetric per-tensor
};

// scale = max|w| / (2^(bits-1) - 1); each value replaced by round(w / scale) * scale.
// All-zero tensors are left unchanged. Throws ConfigError for unsupported bits.
ModelCheckpoint quantize(const ModelCheckpoint& m, const QuantSpec& spec);
void quantize_tensor(std::span<float> values, int bits);

// Binary format: "LNRM", u32 version, seven u32 config fields, tensor table, CRC32 trailer.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const ModelCheckpoint& m, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lunar
