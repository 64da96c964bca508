// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <random>

#include "lunar/errors.hpp"
#include "lunar/kernels.hpp"
#include "lunar/model.hpp"
#include "model_internal.hpp"

namespace lunar {

void ModelConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("model config: " + what); };
    if (d_model == 0 || n_layers == 0 || n_heads == 0 || d_mlp == 0 || vocab_size == 0 || max_seq_len == 0) {
        fail("all sizes must be >= 1");
    }
    if (d_model % n_heads != 0) {
        fail("d_model (" + std::to_string(d_model) + ") must be divisible by n_heads (" + std::to_string(n_heads) + ")");
    }
    if ((d_model / n_heads) % 2 != 0) {
        fail("head dimension must be even for rotary positions");
    }
    if (d_mlp < d_model) {
        fail("d_mlp must be >= d_model");
    }
}

namespace {

void fill_normal(std::span<float> v, std::mt19937_64& rng, double stddev) {
    // Box-Muller over the raw engine so values do not depend on the standard library.
    constexpr double kTwoPi = 6.283185307179586;
    const double denom = static_cast<double>(std::numeric_limits<std::uint64_t>::max()) + 1.0;
    for (std::size_t i = 0; i < v.size(); i += 2) {
        const double u1 = (static_cast<double>(rng()) + 1.0) / (denom + 1.0);
        const double u2 = static_cast<double>(rng()) / denom;
        const double r = std::sqrt(-2.0 * std::log(u1));
        v[i] = static_cast<float>(stddev * r * std::cos(kTwoPi * u2));
        if (i + 1 < v.size()) {
            v[i + 1] = static_cast<float>(stddev * r * std::sin(kTwoPi * u2));
        }
    }
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double stddev) {
    Matrix m(r, c);
    fill_normal(m.values(), rng, stddev);
    return m;
}

}  // namespace

ModelCheckpoint init_model(const ModelConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const std::size_t d = config.d_model;
    const std::size_t p = config.d_mlp;
    const std::size_t c = config.vocab_size;
    const double in_std = 1.0 / std::sqrt(static_cast<double>(d));
    const double out_std = in_std / std::sqrt(2.0 * config.n_layers);

    ModelCheckpoint m;
    m.config = config;
    m.token_embedding = random_matrix(c, d, rng, 1.0);
    for (std::size_t l = 0; l < config.n_layers; ++l) {
        LayerWeights w;
        w.attn_norm.assign(d, 1.0f);
        w.mlp_norm.assign(d, 1.0f);
        w.wq = random_matrix(d, d, rng, in_std);
        w.wk = random_matrix(d, d, rng, in_std);
        w.wv = random_matrix(d, d, rng, in_std);
        w.wo = random_matrix(d, d, rng, out_std);
        w.up = random_matrix(d, p, rng, in_std);
        w.down = random_matrix(p, d, rng, out_std * std::sqrt(static_cast<double>(d) / static_cast<double>(p)));
        m.layers.push_back(std::move(w));
    }
    m.final_norm.assign(d, 1.0f);
    m.unembedding = random_matrix(c, d, rng, in_std);
    return m;
}

ModelCheckpoint zeros_like(const ModelCheckpoint& m) {
    ModelCheckpoint z = m;
    for (auto& t : tensors(z)) {
        std::fill(t.values.begin(), t.values.end(), 0.0f);
    }
    return z;
}

namespace {

template <class View, class Model>
std::vector<View> tensor_list(Model& m) {
    std::vector<View> out;
    auto mat = [&](std::string name, auto& mtx) {
        out.push_back(View{std::move(name),
                           {static_cast<std::uint32_t>(mtx.rows()), static_cast<std::uint32_t>(mtx.cols())},
                           {mtx.data(), mtx.size()}});
    };
    auto vec = [&](std::string name, auto& v) {
        out.push_back(View{std::move(name), {static_cast<std::uint32_t>(v.size())}, {v.data(), v.size()}});
    };
    mat("tok_embeddings", m.token_embedding);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        auto& w = m.layers[l];
        const std::string pre = "layers." + std::to_string(l + 1) + ".";
        vec(pre + "attn_norm", w.attn_norm);
        mat(pre + "attn.wq", w.wq);
        mat(pre + "attn.wk", w.wk);
        mat(pre + "attn.wv", w.wv);
        mat(pre + "attn.wo", w.wo);
        vec(pre + "mlp_norm", w.mlp_norm);
        mat(pre + "mlp.up", w.up);
        mat(pre + "mlp.down", w.down);
    }
    vec("final_norm", m.final_norm);
    mat("unembedding", m.unembedding);
    return out;
}

}  // namespace

std::vector<TensorView> tensors(ModelCheckpoint& m) { return tensor_list<TensorView>(m); }
std::vector<ConstTensorView> tensors(const ModelCheckpoint& m) { return tensor_list<ConstTensorView>(m); }

std::string down_projection_name(std::size_t layer) { return "layers." + std::to_string(layer) + ".mlp.down"; }

std::vector<std::string> diff_tensors(const ModelCheckpoint& a, const ModelCheckpoint& b) {
    const auto ta = tensors(a);
    const auto tb = tensors(b);
    if (ta.size() != tb.size()) {
        throw DimensionError("diff_tensors: checkpoints have different layer counts");
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i].dims != tb[i].dims ||
            std::memcmp(ta[i].values.data(), tb[i].values.data(), ta[i].values.size_bytes()) != 0) {
            out.push_back(ta[i].name);
        }
    }
    return out;
}

namespace detail {

void rmsnorm_rows(const Matrix& x, std::span<const float> gain, Matrix& out, std::vector<float>& inv_rms) {
    const std::size_t d = x.cols();
    out = Matrix(x.rows(), d);
    inv_rms.resize(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const float* xr = x.row(r).data();
        const double ms = kernels::dot_f64(xr, xr, d) / static_cast<double>(d);
        const float ir = static_cast<float>(1.0 / std::sqrt(ms + kRmsEps));
        inv_rms[r] = ir;
        float* o = out.row(r).data();
        for (std::size_t j = 0; j < d; ++j) {
            o[j] = xr[j] * ir * gain[j];
        }
    }
}

namespace {

// cos/sin tables for the rotary transform: [t][i] for i < head_dim / 2.
struct Rotary {
    std::size_t half = 0;
    std::vector<float> cos, sin;

    Rotary(std::size_t seq, std::size_t head_dim) : half(head_dim / 2), cos(seq * half), sin(seq * half) {
        for (std::size_t t = 0; t < seq; ++t) {
            for (std::size_t i = 0; i < half; ++i) {
                const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(head_dim));
                const double ang = static_cast<double>(t) * freq;
                cos[t * half + i] = static_cast<float>(std::cos(ang));
                sin[t * half + i] = static_cast<float>(std::sin(ang));
            }
        }
    }

    // direction = +1 applies the rotation, -1 its transpose.
    void apply(Matrix& x, std::size_t n_heads, float direction) const {
        const std::size_t hd = 2 * half;
        for (std::size_t t = 0; t < x.rows(); ++t) {
            float* row = x.row(t).data();
            for (std::size_t h = 0; h < n_heads; ++h) {
                float* v = row + h * hd;
                for (std::size_t i = 0; i < half; ++i) {
                    const float c = cos[t * half + i];
                    const float s = direction * sin[t * half + i];
                    const float a = v[2 * i];
                    const float b = v[2 * i + 1];
                    v[2 * i] = a * c - b * s;
                    v[2 * i + 1] = a * s + b * c;
                }
            }
        }
    }
};

Matrix linear(const Matrix& x, const Matrix& w) {
    Matrix y(x.rows(), w.cols());
    kernels::gemm_nn(x.rows(), w.cols(), x.cols(), x.data(), x.cols(), w.data(), w.cols(), y.data(), y.cols());
    return y;
}

Matrix head_slice(const Matrix& x, std::size_t h, std::size_t hd) {
    Matrix out(x.rows(), hd);
    for (std::size_t t = 0; t < x.rows(); ++t) {
        std::copy_n(x.row(t).data() + h * hd, hd, out.row(t).data());
    }
    return out;
}

void add_into(Matrix& dst, const Matrix& src) { kernels::axpy(1.0f, src.data(), dst.data(), dst.size()); }

// Causal softmax attention for one head; returns the T x T probabilities.
Matrix attention_probs(const Matrix& qh, const Matrix& kh) {
    const std::size_t T = qh.rows();
    const float scale = 1.0f / std::sqrt(static_cast<float>(qh.cols()));
    Matrix s(T, T);
    kernels::gemm_nt(T, T, qh.cols(), qh.data(), qh.cols(), kh.data(), kh.cols(), s.data(), T);
    for (std::size_t i = 0; i < T; ++i) {
        float* row = s.row(i).data();
        float mx = -std::numeric_limits<float>::infinity();
        for (std::size_t j = 0; j <= i; ++j) {
            row[j] *= scale;
            mx = std::max(mx, row[j]);
        }
        float sum = 0.0f;
        for (std::size_t j = 0; j <= i; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        const float inv = 1.0f / sum;
        for (std::size_t j = 0; j <= i; ++j) {
            row[j] *= inv;
        }
        for (std::size_t j = i + 1; j < T; ++j) {
            row[j] = 0.0f;
        }
    }
    return s;
}

const Rotary& rotary_for(std::size_t seq, std::size_t head_dim) {
    thread_local std::size_t cached_seq = 0;
    thread_local std::size_t cached_hd = 0;
    thread_local std::optional<Rotary> table;
    if (!table || cached_seq < seq || cached_hd != head_dim) {
        table.emplace(std::max<std::size_t>(seq, 64), head_dim);
        cached_seq = std::max<std::size_t>(seq, 64);
        cached_hd = head_dim;
    }
    return *table;
}

}  // namespace

Matrix run_forward(const ModelCheckpoint& m, const Tokens& tokens, const Intervention& iv, ForwardCache* cache,
                   ActivationTrace* trace) {
    const ModelConfig& cfg = m.config;
    if (tokens.empty()) {
        throw ConfigError("forward: empty token sequence");
    }
    if (tokens.size() > cfg.max_seq_len) {
        throw ConfigError("forward: sequence of " + std::to_string(tokens.size()) + " tokens exceeds max_seq_len " +
                          std::to_string(cfg.max_seq_len));
    }
    const std::size_t T = tokens.size();
    const std::size_t d = cfg.d_model;
    const std::size_t H = cfg.n_heads;
    const std::size_t hd = d / H;
    const std::size_t L = cfg.n_layers;
    const Rotary& rope = rotary_for(T, hd);

    Matrix x(T, d);
    for (std::size_t t = 0; t < T; ++t) {
        const auto id = static_cast<std::size_t>(tokens[t]);
        if (id >= cfg.vocab_size) {
            throw ConfigError("forward: token id " + std::to_string(id) + " outside vocabulary");
        }
        std::copy_n(m.token_embedding.row(id).data(), d, x.row(t).data());
    }

    if (trace != nullptr) {
        *trace = ActivationTrace{};
        trace->residual.reserve(L + 1);
        trace->residual.push_back(x);
    }
    if (cache != nullptr) {
        cache->layers.assign(L, LayerCache{});
    }

    for (std::size_t l = 1; l <= L; ++l) {
        const LayerWeights& w = m.layer(l);
        const bool skip = std::find(iv.skip_layers.begin(), iv.skip_layers.end(), l) != iv.skip_layers.end();
        LayerCache lc;
        lc.skipped = skip;
        if (skip) {
            if (trace != nullptr) {
                trace->attn_out.emplace_back(T, d);
                trace->downproj_input.emplace_back(T, cfg.d_mlp);
                trace->mlp_out.emplace_back(T, d);
            }
        } else {
            lc.x_in = x;
            rmsnorm_rows(x, w.attn_norm, lc.n1, lc.inv_rms1);
            lc.q = linear(lc.n1, w.wq);
            lc.k = linear(lc.n1, w.wk);
            lc.v = linear(lc.n1, w.wv);
            rope.apply(lc.q, H, 1.0f);
            rope.apply(lc.k, H, 1.0f);
            lc.concat = Matrix(T, d);
            lc.probs.reserve(H);
            for (std::size_t h = 0; h < H; ++h) {
                const Matrix qh = head_slice(lc.q, h, hd);
                const Matrix kh = head_slice(lc.k, h, hd);
                const Matrix vh = head_slice(lc.v, h, hd);
                Matrix p = attention_probs(qh, kh);
                const Matrix oh = linear(p, vh);
                for (std::size_t t = 0; t < T; ++t) {
                    std::copy_n(oh.row(t).data(), hd, lc.concat.row(t).data() + h * hd);
                }
                lc.probs.push_back(std::move(p));
            }
            lc.attn_out = linear(lc.concat, w.wo);
            lc.x_mid = x;
            add_into(lc.x_mid, lc.attn_out);
            rmsnorm_rows(lc.x_mid, w.mlp_norm, lc.n2, lc.inv_rms2);
            lc.u = linear(lc.n2, w.up);
            lc.h = lc.u;
            for (float& v : lc.h.values()) {
                v = v > 0.0f ? v : 0.0f;
            }
            lc.mlp_out = linear(lc.h, w.down);
            x = lc.x_mid;
            add_into(x, lc.mlp_out);
            if (trace != nullptr) {
                trace->attn_out.push_back(lc.attn_out);
                trace->downproj_input.push_back(lc.h);
                trace->mlp_out.push_back(lc.mlp_out);
            }
        }
        for (const auto& [layer, shift] : iv.residual_shifts) {
            if (layer != l) {
                continue;
            }
            if (shift.size() != d) {
                throw DimensionError("forward: residual shift has wrong dimension");
            }
            for (std::size_t t = 0; t < T; ++t) {
                kernels::axpy(1.0f, shift.data(), x.row(t).data(), d);
            }
        }
        if (trace != nullptr) {
            trace->residual.push_back(x);
        }
        if (cache != nullptr) {
            cache->layers[l - 1] = std::move(lc);
        }
    }

    Matrix nf;
    std::vector<float> inv_rmsf;
    rmsnorm_rows(x, m.final_norm, nf, inv_rmsf);
    const std::size_t c = cfg.vocab_size;
    Matrix logits(T, c);
    kernels::gemm_nt(T, c, d, nf.data(), d, m.unembedding.data(), d, logits.data(), c);
    if (cache != nullptr) {
        cache->x_final = std::move(x);
        cache->inv_rmsf = std::move(inv_rmsf);
        cache->nf = std::move(nf);
        cache->logits = logits;
    }
    return logits;
}

namespace {

// dx += rmsnorm backward; dgain += dy * x * inv_rms.
void rmsnorm_backward(const Matrix& dy, const Matrix& x, const std::vector<float>& inv_rms,
                      std::span<const float> gain, Matrix& dx, std::span<float> dgain) {
    const std::size_t d = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const float* dyr = dy.row(r).data();
        const float* xr = x.row(r).data();
        float* dxr = dx.row(r).data();
        const float ir = inv_rms[r];
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            s += static_cast<double>(dyr[j]) * gain[j] * xr[j];
            dgain[j] += dyr[j] * xr[j] * ir;
        }
        const float coef = static_cast<float>(s * ir * ir * ir / static_cast<double>(d));
        for (std::size_t j = 0; j < d; ++j) {
            dxr[j] += ir * gain[j] * dyr[j] - xr[j] * coef;
        }
    }
}

// Linear backward: dW += x^T dy (scaled), returns dy W^T.
Matrix linear_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix& dw) {
    kernels::gemm_tn(x.rows(), w.cols(), w.rows(), x.data(), x.cols(), dy.data(), dy.cols(), dw.data(), dw.cols(),
                     true);
    Matrix dx(x.rows(), w.rows());
    kernels::gemm_nt(dy.rows(), w.rows(), w.cols(), dy.data(), dy.cols(), w.data(), w.cols(), dx.data(), dx.cols());
    return dx;
}

}  // namespace

double example_loss_grad(const ModelCheckpoint& m, const TrainExample& ex, ModelCheckpoint* grad, double weight,
                         std::size_t* n_tokens, std::size_t* n_correct) {
    ForwardCache cache;
    run_forward(m, ex.tokens, Intervention{}, &cache, nullptr);
    const ModelConfig& cfg = m.config;
    const std::size_t T = ex.tokens.size();
    const std::size_t d = cfg.d_model;
    const std::size_t c = cfg.vocab_size;
    const std::size_t H = cfg.n_heads;
    const std::size_t hd = d / H;

    Matrix dlogits(T, c);
    double loss = 0.0;
    std::size_t count = 0;
    std::size_t correct = 0;
    const std::size_t first = ex.prompt_len >= 1 ? ex.prompt_len - 1 : 0;
    for (std::size_t t = first; t + 1 < T; ++t) {
        const auto target = static_cast<std::size_t>(ex.tokens[t + 1]);
        const std::span<const float> row = cache.logits.row(t);
        const std::vector<float> prob = softmax(row);
        loss -= std::log(std::max(static_cast<double>(prob[target]), 1e-30));
        const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        correct += best == target ? 1 : 0;
        ++count;
        float* dl = dlogits.row(t).data();
        for (std::size_t j = 0; j < c; ++j) {
            dl[j] = static_cast<float>(weight) * prob[j];
        }
        dl[target] -= static_cast<float>(weight);
    }
    if (n_tokens != nullptr) {
        *n_tokens = count;
    }
    if (n_correct != nullptr) {
        *n_correct = correct;
    }
    if (grad == nullptr || count == 0) {
        return loss;
    }

    // Output head.
    Matrix dnf(T, d);
    kernels::gemm_nn(T, d, c, dlogits.data(), c, m.unembedding.data(), d, dnf.data(), d);
    kernels::gemm_tn(T, d, c, dlogits.data(), c, cache.nf.data(), d, grad->unembedding.data(), d, true);
    Matrix dx(T, d);
    rmsnorm_backward(dnf, cache.x_final, cache.inv_rmsf, m.final_norm, dx, grad->final_norm);

    const Rotary& rope = rotary_for(T, hd);
    const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
    for (std::size_t l = cfg.n_layers; l >= 1; --l) {
        const LayerCache& lc = cache.layers[l - 1];
        const LayerWeights& w = m.layer(l);
        LayerWeights& g = grad->layer(l);

        // MLP: x_out = x_mid + relu(norm(x_mid) Up) Down
        Matrix dh = linear_backward(lc.h, w.down, dx, g.down);
        for (std::size_t i = 0; i < dh.size(); ++i) {
            if (lc.u.data()[i] <= 0.0f) {
                dh.data()[i] = 0.0f;
            }
        }
        const Matrix dn2 = linear_backward(lc.n2, w.up, dh, g.up);
        Matrix dx_mid = dx;
        rmsnorm_backward(dn2, lc.x_mid, lc.inv_rms2, w.mlp_norm, dx_mid, g.mlp_norm);

        // Attention: x_mid = x_in + attn(norm(x_in)) Wo
        const Matrix dconcat = linear_backward(lc.concat, w.wo, dx_mid, g.wo);
        Matrix dq(T, d), dk(T, d), dv(T, d);
        for (std::size_t h = 0; h < H; ++h) {
            const Matrix& p = lc.probs[h];
            const Matrix qh = head_slice(lc.q, h, hd);
            const Matrix kh = head_slice(lc.k, h, hd);
            const Matrix vh = head_slice(lc.v, h, hd);
            const Matrix doh = head_slice(dconcat, h, hd);
            Matrix dp(T, T);
            kernels::gemm_nt(T, T, hd, doh.data(), hd, vh.data(), hd, dp.data(), T);
            Matrix dvh(T, hd);
            kernels::gemm_tn(T, hd, T, p.data(), T, doh.data(), hd, dvh.data(), hd);
            // dS = P * (dP - rowsum(dP * P)), scaled for the score scaling.
            Matrix ds(T, T);
            for (std::size_t i = 0; i < T; ++i) {
                const float* pr = p.row(i).data();
                const float* dpr = dp.row(i).data();
                float dotp = 0.0f;
                for (std::size_t j = 0; j <= i; ++j) {
                    dotp += pr[j] * dpr[j];
                }
                float* dsr = ds.row(i).data();
                for (std::size_t j = 0; j <= i; ++j) {
                    dsr[j] = pr[j] * (dpr[j] - dotp) * scale;
                }
            }
            Matrix dqh(T, hd), dkh(T, hd);
            kernels::gemm_nn(T, hd, T, ds.data(), T, kh.data(), hd, dqh.data(), hd);
            kernels::gemm_tn(T, hd, T, ds.data(), T, qh.data(), hd, dkh.data(), hd);
            for (std::size_t t = 0; t < T; ++t) {
                std::copy_n(dqh.row(t).data(), hd, dq.row(t).data() + h * hd);
                std::copy_n(dkh.row(t).data(), hd, dk.row(t).data() + h * hd);
                std::copy_n(dvh.row(t).data(), hd, dv.row(t).data() + h * hd);
            }
        }
        rope.apply(dq, H, -1.0f);
        rope.apply(dk, H, -1.0f);
        Matrix dn1 = linear_backward(lc.n1, w.wq, dq, g.wq);
        add_into(dn1, linear_backward(lc.n1, w.wk, dk, g.wk));
        add_into(dn1, linear_backward(lc.n1, w.wv, dv, g.wv));
        Matrix dx_in = dx_mid;
        rmsnorm_backward(dn1, lc.x_in, lc.inv_rms1, w.attn_norm, dx_in, g.attn_norm);
        dx = std::move(dx_in);
    }

    for (std::size_t t = 0; t < T; ++t) {
        const auto id = static_cast<std::size_t>(ex.tokens[t]);
        kernels::axpy(1.0f, dx.row(t).data(), grad->token_embedding.row(id).data(), d);
    }
    return loss;
}

}  // namespace detail

ForwardResult forward(const ModelCheckpoint& m, const Tokens& tokens, bool capture, const Intervention& intervention) {
    ForwardResult r;
    if (capture) {
        ActivationTrace trace;
        r.logits = detail::run_forward(m, tokens, intervention, nullptr, &trace);
        trace.prompt_len = tokens.size();
        r.trace = std::move(trace);
    } else {
        r.logits = detail::run_forward(m, tokens, intervention, nullptr, nullptr);
    }
    return r;
}

std::vector<float> softmax(std::span<const float> logits) {
    std::vector<float> out(logits.size());
    if (logits.empty()) {
        return out;
    }
    const float mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        sum += std::exp(static_cast<double>(logits[i]) - mx);
    }
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = static_cast<float>(std::exp(static_cast<double>(logits[i]) - mx) / sum);
    }
    return out;
}

std::size_t rank_of_token(std::span<const float> logits, TokenId target) {
    const float v = logits[static_cast<std::size_t>(target)];
    std::size_t better = 0;
    for (float x : logits) {
        better += x > v ? 1 : 0;
    }
    return better + 1;
}

Tokens greedy_decode(const ModelCheckpoint& m, const Tokens& prompt, std::size_t max_new,
                     const Intervention& intervention) {
    Tokens seq = prompt;
    Tokens out;
    for (std::size_t step = 0; step < max_new && seq.size() < m.config.max_seq_len; ++step) {
        const Matrix logits = detail::run_forward(m, seq, intervention, nullptr, nullptr);
        const std::span<const float> last = logits.row(logits.rows() - 1);
        // max_element returns the first maximum, i.e. the lowest id on ties.
        const auto next = static_cast<TokenId>(std::max_element(last.begin(), last.end()) - last.begin());
        out.push_back(next);
        seq.push_back(next);
        if (next == Vocab::kEos) {
            break;
        }
    }
    return out;
}

Tokens prompt_tokens(const Vocab& vocab, std::string_view question) {
    Tokens t{Vocab::kBos};
    const Tokens body = vocab.encode_words(question);
    t.insert(t.end(), body.begin(), body.end());
    return t;
}

TrainExample make_example(const Vocab& vocab, const QARecord& record) {
    TrainExample ex;
    ex.tokens = prompt_tokens(vocab, record.question);
    ex.prompt_len = ex.tokens.size();
    const Tokens ans = vocab.encode_words(record.answer);
    ex.tokens.insert(ex.tokens.end(), ans.begin(), ans.end());
    ex.tokens.push_back(Vocab::kEos);
    return ex;
}

}  // namespace lunar
