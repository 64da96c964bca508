// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>

#include "lunar/errors.hpp"
#include "lunar/kernels.hpp"
#include "lunar/model.hpp"
#include "model_internal.hpp"

namespace lunar {

namespace {

std::size_t answer_tokens(const TrainExample& ex) {
    return ex.tokens.size() > ex.prompt_len ? ex.tokens.size() - ex.prompt_len : 0;
}

void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
    // Fisher-Yates with rejection sampling; std::shuffle is not portable across libraries.
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::uint64_t n = i;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r = 0;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(r % n)]);
    }
}

double global_norm(const ModelCheckpoint& g) {
    double s = 0.0;
    for (const auto& t : tensors(g)) {
        s += kernels::dot_f64(t.values.data(), t.values.data(), t.values.size());
    }
    return std::sqrt(s);
}

}  // namespace

double loss_and_gradient(const ModelCheckpoint& m, const TrainExample& ex, ModelCheckpoint* grad) {
    const std::size_t n = answer_tokens(ex);
    if (n == 0) {
        throw ConfigError("loss_and_gradient: example has no answer tokens");
    }
    if (grad != nullptr) {
        *grad = zeros_like(m);
    }
    const double loss = detail::example_loss_grad(m, ex, grad, 1.0 / static_cast<double>(n), nullptr, nullptr);
    return loss / static_cast<double>(n);
}

double answer_token_accuracy(const ModelCheckpoint& m, const std::vector<TrainExample>& examples) {
    std::size_t total = 0;
    std::size_t correct = 0;
    for (const auto& ex : examples) {
        std::size_t n = 0;
        std::size_t c = 0;
        detail::example_loss_grad(m, ex, nullptr, 1.0, &n, &c);
        total += n;
        correct += c;
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

bool all_finite(const ModelCheckpoint& m) {
    for (const auto& t : tensors(m)) {
        for (float v : t.values) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TrainResult train_examples(const ModelCheckpoint& m, const std::vector<TrainExample>& examples,
                           const TrainOptions& options) {
    if (examples.empty()) {
        throw ConfigError("train: no training examples");
    }
    if (options.batch == 0) {
        throw ConfigError("train: batch must be >= 1");
    }
    TrainResult result;
    result.model = m;
    ModelCheckpoint velocity = zeros_like(m);
    ModelCheckpoint grad = zeros_like(m);
    ModelCheckpoint last_good = m;
    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        shuffle_indices(order, rng);
        double epoch_loss = 0.0;
        std::size_t epoch_tokens = 0;
        bool bad = false;
        for (std::size_t start = 0; start < order.size() && !bad; start += options.batch) {
            const std::size_t end = std::min(order.size(), start + options.batch);
            std::size_t batch_tokens = 0;
            for (std::size_t i = start; i < end; ++i) {
                batch_tokens += answer_tokens(examples[order[i]]);
            }
            if (batch_tokens == 0) {
                continue;
            }
            for (auto& t : tensors(grad)) {
                std::fill(t.values.begin(), t.values.end(), 0.0f);
            }
            const double w = 1.0 / static_cast<double>(batch_tokens);
            double batch_loss = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                batch_loss += detail::example_loss_grad(result.model, examples[order[i]], &grad, w, nullptr, nullptr);
            }
            const double gnorm = global_norm(grad);
            if (!std::isfinite(batch_loss) || !std::isfinite(gnorm)) {
                bad = true;
                break;
            }
            epoch_loss += batch_loss;
            epoch_tokens += batch_tokens;
            const float clip = (options.clip_norm > 0.0f && gnorm > options.clip_norm)
                                   ? static_cast<float>(options.clip_norm / gnorm)
                                   : 1.0f;
            auto tw = tensors(result.model);
            auto tv = tensors(velocity);
            const auto tg = tensors(std::as_const(grad));
            for (std::size_t k = 0; k < tw.size(); ++k) {
                float* wv = tw[k].values.data();
                float* vv = tv[k].values.data();
                const float* gv = tg[k].values.data();
                for (std::size_t j = 0; j < tw[k].values.size(); ++j) {
                    vv[j] = options.momentum * vv[j] + clip * gv[j];
                    wv[j] -= options.lr * vv[j];
                }
            }
        }
        const double mean = epoch_tokens == 0 ? 0.0 : epoch_loss / static_cast<double>(epoch_tokens);
        if (bad || !std::isfinite(mean) || !all_finite(result.model)) {
            result.model = last_good;
            result.diverged = true;
            break;
        }
        last_good = result.model;
        result.loss_curve.push_back(mean);
        if (options.on_epoch) {
            options.on_epoch(epoch + 1, mean);
        }
    }
    result.answer_token_accuracy = answer_token_accuracy(result.model, examples);
    return result;
}

TrainResult train(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<QARecord>& records,
                  const TrainOptions& options) {
    if (records.empty()) {
        throw ConfigError("train: no training records");
    }
    std::vector<TrainExample> examples;
    examples.reserve(records.size());
    for (const auto& r : records) {
        examples.push_back(make_example(vocab, r));
    }
    return train_examples(m, examples, options);
}

}  // namespace lunar
