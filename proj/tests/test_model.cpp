// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "lunar/errors.hpp"
#include "lunar/model.hpp"
#include "test_util.hpp"

namespace {

using namespace lunar;
namespace fs = std::filesystem;

ModelConfig tiny_config(std::uint32_t vocab = 12) {
    ModelConfig c;
    c.d_model = 8;
    c.n_layers = 2;
    c.n_heads = 2;
    c.d_mlp = 16;
    c.vocab_size = vocab;
    c.max_seq_len = 16;
    c.seed = 5;
    return c;
}

Vocab tiny_vocab() { return Vocab({"a", "b", "c", "d", "?", "x", "y", "z"}); }

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("lunar_model_" + name); }

TEST(ModelConfig, Validation) {
    EXPECT_NO_THROW(tiny_config().validate());
    auto c = tiny_config();
    c.n_heads = 3;
    EXPECT_THROW(c.validate(), ConfigError);
    c = tiny_config();
    c.d_model = 6;
    c.n_heads = 2;  // head dim 3 is odd, rotary needs pairs
    EXPECT_THROW(c.validate(), ConfigError);
    c = tiny_config();
    c.vocab_size = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Model, InitShapesAndDeterminism) {
    const ModelCheckpoint m = init_model(tiny_config());
    EXPECT_EQ(m, init_model(tiny_config()));
    EXPECT_EQ(m.layer(1).down.rows(), 16u);
    EXPECT_EQ(m.layer(1).down.cols(), 8u);
    EXPECT_EQ(m.unembedding.rows(), 12u);
    const auto ts = tensors(m);
    EXPECT_EQ(ts.front().name, "tok_embeddings");
    EXPECT_EQ(ts.back().name, "unembedding");
    EXPECT_EQ(down_projection_name(2), "layers.2.mlp.down");
    std::size_t n = 0;
    for (const auto& t : ts) {
        n += t.values.size();
        for (float v : t.values) {
            ASSERT_TRUE(std::isfinite(v));
        }
    }
    // 2 * c * d + L * (4 d^2 + 2 d p + 2 d) + d
    EXPECT_EQ(n, 2u * 12 * 8 + 2u * (4 * 64 + 2 * 8 * 16 + 2 * 8) + 8);
}

TEST(Model, SoftmaxNormalizesEveryPosition) {
    const ModelCheckpoint m = init_model(tiny_config());
    const ForwardResult r = forward(m, {0, 4, 5, 6, 7, 8}, false);
    for (std::size_t t = 0; t < r.logits.rows(); ++t) {
        const auto p = softmax(r.logits.row(t));
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-5);
    }
}

TEST(Model, ZeroWeightsGiveUniformLogits) {
    ModelCheckpoint m = zeros_like(init_model(tiny_config()));
    m.unembedding = init_model(tiny_config()).unembedding;
    const ForwardResult r = forward(m, {0, 4, 5}, false);
    // The residual is zero everywhere, so every logit is U * norm(0) = 0.
    for (float v : r.logits.values()) {
        EXPECT_EQ(v, 0.0f);
    }
}

TEST(Model, ResidualIdentityRecomputedIndependently) {
    const ModelCheckpoint m = init_model(tiny_config());
    const ForwardResult r = forward(m, {0, 4, 5, 6, 9, 10, 11}, true);
    const auto& tr = *r.trace;
    for (std::size_t l = 1; l <= 2; ++l) {
        const Matrix& prev = tr.residual_out(l - 1);
        const Matrix& cur = tr.residual_out(l);
        const Matrix mlp = matmul(tr.hidden(l), m.layer(l).down);
        for (std::size_t i = 0; i < cur.size(); ++i) {
            EXPECT_NEAR(cur.values()[i], prev.values()[i] + tr.attn(l).values()[i] + tr.mlp(l).values()[i], 1e-5);
            EXPECT_NEAR(tr.mlp(l).values()[i], mlp.values()[i], 1e-5);
        }
    }
}

TEST(Model, DownprojInputIndependentOfSameLayerDown) {
    ModelCheckpoint m = init_model(tiny_config());
    const Tokens t = {0, 4, 5, 6};
    const auto before = forward(m, t, true).trace->hidden(2);
    std::mt19937_64 rng(1);
    m.layer(2).down = test::random_matrix(16, 8, rng);
    const auto after = forward(m, t, true).trace->hidden(2);
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_NEAR(before.values()[i], after.values()[i], 1e-6);
    }
}

TEST(Model, CausalPrefixUnchanged) {
    const ModelCheckpoint m = init_model(tiny_config());
    const auto a = forward(m, {0, 4, 5}, false).logits;
    const auto b = forward(m, {0, 4, 5, 9, 10}, false).logits;
    for (std::size_t t = 0; t < 3; ++t) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            EXPECT_NEAR(a(t, j), b(t, j), 1e-5);
        }
    }
}

TEST(Model, ForwardErrors) {
    const ModelCheckpoint m = init_model(tiny_config());
    EXPECT_THROW(forward(m, {}, false), ConfigError);
    EXPECT_THROW(forward(m, Tokens(17, 4), false), ConfigError);
    EXPECT_THROW(forward(m, {0, 99}, false), ConfigError);
}

TEST(Model, SkipAndShiftInterventions) {
    const ModelCheckpoint m = init_model(tiny_config());
    const Tokens t = {0, 4, 5};
    const auto base = forward(m, t, true);
    EXPECT_EQ(forward(m, t, false, Intervention{}).logits, base.logits);
    Intervention skip;
    skip.skip_layers = {2};
    const auto s = forward(m, t, true, skip);
    EXPECT_EQ(s.trace->residual_out(2), base.trace->residual_out(1));
    Intervention shift;
    shift.residual_shifts.push_back({1, std::vector<float>(8, 0.5f)});
    const auto sh = forward(m, t, true, shift);
    for (std::size_t i = 0; i < sh.trace->residual_out(1).size(); ++i) {
        EXPECT_NEAR(sh.trace->residual_out(1).values()[i], base.trace->residual_out(1).values()[i] + 0.5f, 1e-5);
    }
}

TEST(Rank, Examples) {
    const float a[] = {0.1f, 0.9f, 0.5f};
    EXPECT_EQ(rank_of_token(a, 2), 2u);
    EXPECT_EQ(rank_of_token(a, 1), 1u);
    const float u[] = {1, 1, 1, 1};
    EXPECT_EQ(rank_of_token(u, 3), 1u);
}

TEST(Decode, Contract) {
    const ModelCheckpoint m = init_model(tiny_config());
    EXPECT_TRUE(greedy_decode(m, {0, 4}, 0).empty());
    const Tokens a = greedy_decode(m, {0, 4}, 6);
    EXPECT_EQ(a, greedy_decode(m, {0, 4}, 6));
    EXPECT_LE(a.size(), 6u);
    // First decoded token is the argmax of the last position, lowest id on ties.
    const auto logits = forward(m, {0, 4}, false).logits;
    const auto last = logits.row(1);
    const auto best = std::max_element(last.begin(), last.end()) - last.begin();
    EXPECT_EQ(a.front(), best);
}

TEST(Train, GradientMatchesFiniteDifferences) {
    const Vocab v = tiny_vocab();
    ModelCheckpoint m = init_model(tiny_config(static_cast<std::uint32_t>(v.size())));
    const TrainExample ex = make_example(v, QARecord{"a b ?", "x y", "", ""});
    ModelCheckpoint grad = zeros_like(m);
    loss_and_gradient(m, ex, &grad);
    auto params = tensors(m);
    auto grads = tensors(grad);
    std::mt19937_64 rng(3);
    int checked = 0;
    for (std::size_t t = 0; t < params.size(); ++t) {
        std::uniform_int_distribution<std::size_t> pick(0, params[t].values.size() - 1);
        for (int k = 0; k < 3; ++k) {
            const std::size_t i = pick(rng);
            float& w = params[t].values[i];
            const float orig = w;
            const float eps = 1e-2f;
            w = orig + eps;
            const double up = loss_and_gradient(m, ex, nullptr);
            w = orig - eps;
            const double dn = loss_and_gradient(m, ex, nullptr);
            w = orig;
            const double fd = (up - dn) / (2.0 * eps);
            const double an = grads[t].values[i];
            EXPECT_NEAR(an, fd, 2e-3 + 2e-2 * std::fabs(fd)) << params[t].name << "[" << i << "]";
            ++checked;
        }
    }
    EXPECT_GT(checked, 30);
}

TEST(Train, ZeroEpochsNoOpAndDeterminism) {
    const Vocab v = tiny_vocab();
    const ModelCheckpoint m = init_model(tiny_config(static_cast<std::uint32_t>(v.size())));
    const std::vector<QARecord> data = {{"a b ?", "x", "", ""}, {"c d ?", "y z", "", ""}, {"a d ?", "z", "", ""}};
    TrainOptions o;
    o.epochs = 0;
    EXPECT_EQ(train(m, v, data, o).model, m);
    o.epochs = 40;
    o.lr = 0.1f;
    o.batch = 2;
    const TrainResult r1 = train(m, v, data, o);
    const TrainResult r2 = train(m, v, data, o);
    EXPECT_EQ(r1.loss_curve, r2.loss_curve);
    EXPECT_EQ(r1.model, r2.model);
    EXPECT_LT(r1.loss_curve.back(), r1.loss_curve.front());
    EXPECT_DOUBLE_EQ(r1.answer_token_accuracy, 1.0);
    EXPECT_EQ(v.decode(greedy_decode(r1.model, prompt_tokens(v, "c d ?"), 4)), "y z");
    EXPECT_THROW(train(m, v, {}, o), ConfigError);
}

TEST(Train, DivergenceReturnsLastGoodCheckpoint) {
    const Vocab v = tiny_vocab();
    const ModelCheckpoint m = init_model(tiny_config(static_cast<std::uint32_t>(v.size())));
    TrainOptions o;
    o.epochs = 5;
    o.lr = std::numeric_limits<float>::infinity();
    const TrainResult r = train(m, v, {{"a b ?", "x", "", ""}}, o);
    EXPECT_TRUE(r.diverged);
    for (const auto& t : tensors(r.model)) {
        for (float x : t.values) {
            ASSERT_TRUE(std::isfinite(x));
        }
    }
}

TEST(Quantize, Examples) {
    std::vector<float> t = {-1.0f, 0.5f, 1.0f};
    const auto orig = t;
    quantize_tensor(t, 8);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_LE(std::fabs(t[i] - orig[i]), 1.0f / 127.0f);
    }
    std::vector<float> zero(4, 0.0f);
    quantize_tensor(zero, 4);
    EXPECT_EQ(zero, std::vector<float>(4, 0.0f));
    EXPECT_THROW(quantize_tensor(t, 3), ConfigError);
    EXPECT_THROW(quantize(init_model(tiny_config()), QuantSpec{16}), ConfigError);
}

TEST(Quantize, IdempotentAndBoundedOnRandomTensors) {
    std::mt19937_64 rng(8);
    std::normal_distribution<float> nd(0.0f, 2.0f);
    for (int bits : {4, 8}) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<float> t(1 + trial * 7);
            for (auto& x : t) {
                x = nd(rng);
            }
            float mx = 0;
            for (float x : t) {
                mx = std::max(mx, std::fabs(x));
            }
            const float scale = mx / static_cast<float>((1 << (bits - 1)) - 1);
            auto q = t;
            quantize_tensor(q, bits);
            std::set<float> levels;
            for (std::size_t i = 0; i < t.size(); ++i) {
                EXPECT_LE(std::fabs(q[i] - t[i]), 0.5f * scale * (1 + 1e-5f));
                levels.insert(q[i]);
            }
            EXPECT_LE(levels.size(), static_cast<std::size_t>((1 << bits) - 1));
            auto q2 = q;
            quantize_tensor(q2, bits);
            for (std::size_t i = 0; i < q.size(); ++i) {
                EXPECT_NEAR(q2[i], q[i], 1e-6f * mx);
            }
        }
    }
}

TEST(Quantize, CoarseningDiffers) {
    const ModelCheckpoint m = init_model(tiny_config());
    const ModelCheckpoint q4 = quantize(m, {4});
    const ModelCheckpoint q84 = quantize(quantize(m, {8}), {4});
    EXPECT_NE(quantize(m, {8}), q4);
    EXPECT_EQ(q4.config, m.config);
    (void)q84;
}

TEST(Checkpoint, RoundTripBitExact) {
    const ModelCheckpoint m = init_model(tiny_config());
    const fs::path p = temp_path("rt.lnrm");
    save_checkpoint(m, p);
    const ModelCheckpoint back = load_checkpoint(p);
    EXPECT_EQ(back, m);
    EXPECT_TRUE(diff_tensors(m, back).empty());
    fs::remove(p);
}

std::vector<char> read_all(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

void write_all(const fs::path& p, const std::vector<char>& b) {
    std::ofstream os(p, std::ios::binary);
    os.write(b.data(), static_cast<std::streamsize>(b.size()));
}

TEST(Checkpoint, Errors) {
    const ModelCheckpoint m = init_model(tiny_config());
    const fs::path p = temp_path("bad.lnrm");
    save_checkpoint(m, p);
    const auto good = read_all(p);

    auto b = good;
    b[0] = 'X';
    write_all(p, b);
    EXPECT_THROW(load_checkpoint(p), FormatError);

    b = good;
    std::uint32_t version = kCheckpointVersion + 1;
    std::memcpy(b.data() + 4, &version, 4);
    write_all(p, b);
    try {
        load_checkpoint(p);
        FAIL() << "expected a version error";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
    }

    b = good;
    b.resize(b.size() / 2);
    write_all(p, b);
    EXPECT_THROW(load_checkpoint(p), FormatError);

    b = good;
    b[b.size() / 2] ^= 0x40;
    write_all(p, b);
    EXPECT_THROW(load_checkpoint(p), FormatError);

    fs::remove(p);
    try {
        load_checkpoint(p);
        FAIL() << "expected an io error";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find(p.string()), std::string::npos);
    }
}

TEST(Checkpoint, DiffTensorsNamesChangedTensor) {
    const ModelCheckpoint m = init_model(tiny_config());
    ModelCheckpoint n = m;
    n.layer(2).down(0, 0) += 1.0f;
    EXPECT_EQ(diff_tensors(m, n), std::vector<std::string>{down_projection_name(2)});
}

}  // namespace
