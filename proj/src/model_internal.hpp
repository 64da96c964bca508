// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <vector>

#include "lunar/model.hpp"

namespace lunar::detail {

inline constexpr float kRmsEps = 1e-5f;

struct LayerCache {
    Matrix x_in;  // T x d
    std::vector<float> inv_rms1;
    Matrix n1;
    Matrix q, k, v;  // q and k after the rotary transform
    std::vector<Matrix> probs;  // per head, T x T
    Matrix concat;
    Matrix attn_out;
    Matrix x_mid;
    std::vector<float> inv_rms2;
    Matrix n2;
    Matrix u;  // pre-activation
    Matrix h;  // relu(u)
    Matrix mlp_out;
    bool skipped = false;
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    Matrix x_final;
    std::vector<float> inv_rmsf;
    Matrix nf;
    Matrix logits;
};

// Runs the model; fills cache and/or trace when non-null.
Matrix run_forward(const ModelCheckpoint& m, const Tokens& tokens, const Intervention& iv, ForwardCache* cache,
                   ActivationTrace* trace);

// Accumulates weight * d(sum of answer-token losses) into grad (if non-null).
// Returns the summed loss; n_tokens receives the number of scored tokens.
double example_loss_grad(const ModelCheckpoint& m, const TrainExample& ex, ModelCheckpoint* grad, double weight,
                         std::size_t* n_tokens, std::size_t* n_correct);

void rmsnorm_rows(const Matrix& x, std::span<const float> gain, Matrix& out, std::vector<float>& inv_rms);

}  // namespace lunar::detail
