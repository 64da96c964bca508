// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "lunar/unlearn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>

#include "lunar/errors.hpp"
#include "lunar/kernels.hpp"
#include "lunar/parallel.hpp"

namespace lunar {

std::string to_string(UvPositions v) { return v == UvPositions::PromptAll ? "prompt_all" : "prompt_last"; }
std::string to_string(TargetPositions v) { return v == TargetPositions::All ? "all" : "prompt_all"; }
std::string to_string(SolverKind v) { return v == SolverKind::ClosedForm ? "closed_form" : "sgd"; }
std::string to_string(ReferenceClass v) { return v == ReferenceClass::UnknownEntity ? "unknown_entity" : "refusal"; }

UvPositions parse_uv_positions(std::string_view s) {
    if (s == "prompt_all") return UvPositions::PromptAll;
    if (s == "prompt_last") return UvPositions::PromptLast;
    throw ConfigError("uv positions must be prompt_all or prompt_last, got '" + std::string(s) + "'");
}

TargetPositions parse_target_positions(std::string_view s) {
    if (s == "all") return TargetPositions::All;
    if (s == "prompt_all") return TargetPositions::PromptAll;
    throw ConfigError("target positions must be all or prompt_all, got '" + std::string(s) + "'");
}

SolverKind parse_solver(std::string_view s) {
    if (s == "closed_form") return SolverKind::ClosedForm;
    if (s == "sgd") return SolverKind::Sgd;
    throw ConfigError("solver must be closed_form or sgd, got '" + std::string(s) + "'");
}

ReferenceClass parse_reference_class(std::string_view s) {
    if (s == "unknown_entity") return ReferenceClass::UnknownEntity;
    if (s == "refusal") return ReferenceClass::Refusal;
    throw ConfigError("reference class must be unknown_entity or refusal, got '" + std::string(s) + "'");
}

namespace {

void check_layer(const ModelCheckpoint& m, std::size_t layer) {
    if (layer < 1 || layer > m.config.n_layers) {
        throw ConfigError("layer " + std::to_string(layer) + " outside [1, " + std::to_string(m.config.n_layers) + "]");
    }
}

// Mean of the selected prompt positions of residual_out(layer), then over prompts.
std::vector<double> prompt_mean(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<std::string>& prompts,
                                std::size_t layer, UvPositions positions) {
    const std::size_t d = m.config.d_model;
    std::vector<double> acc(d, 0.0);
    for (const auto& q : prompts) {
        const Tokens toks = prompt_tokens(vocab, q);
        const auto fr = forward(m, toks, true);
        const Matrix& a = fr.trace->residual_out(layer);
        const std::size_t first = positions == UvPositions::PromptLast ? toks.size() - 1 : 0;
        const double w = 1.0 / static_cast<double>(toks.size() - first);
        for (std::size_t t = first; t < toks.size(); ++t) {
            const auto row = a.row(t);
            for (std::size_t j = 0; j < d; ++j) {
                acc[j] += w * row[j];
            }
        }
    }
    for (double& v : acc) {
        v /= static_cast<double>(prompts.size());
    }
    return acc;
}

struct RowSet {
    std::vector<std::vector<float>> h;
    std::vector<std::vector<float>> a;
};

// H rows and MLP outputs at the selected positions of every record.
RowSet collect_rows(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<QARecord>& records,
                    std::size_t layer, TargetPositions positions) {
    RowSet rows;
    for (const auto& rec : records) {
        const TrainExample ex = make_example(vocab, rec);
        // The closing EOS is never an input during generation.
        const Tokens input(ex.tokens.begin(), ex.tokens.end() - 1);
        const auto fr = forward(m, input, true);
        const Matrix& h = fr.trace->hidden(layer);
        const Matrix& a = fr.trace->mlp(layer);
        const std::size_t n = positions == TargetPositions::All ? input.size() : ex.prompt_len;
        for (std::size_t t = 0; t < n; ++t) {
            rows.h.emplace_back(h.row(t).begin(), h.row(t).end());
            rows.a.emplace_back(a.row(t).begin(), a.row(t).end());
        }
    }
    return rows;
}

std::vector<std::size_t> sample_without_replacement(std::size_t pool, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> idx(pool);
    for (std::size_t i = 0; i < pool; ++i) {
        idx[i] = i;
    }
    std::mt19937_64 rng(seed);
    k = std::min(k, pool);
    for (std::size_t i = 0; i < k; ++i) {
        const std::uint64_t n = pool - i;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r = 0;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(idx[i], idx[i + static_cast<std::size_t>(r % n)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Matrix stack(const std::vector<const std::vector<float>*>& rows, std::size_t cols) {
    Matrix out(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy(rows[r]->begin(), rows[r]->end(), out.row(r).begin());
    }
    return out;
}

}  // namespace

UnlearningVector compute_uv(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<std::string>& forget,
                            const std::vector<std::string>& reference, std::size_t layer, UvPositions positions) {
    check_layer(m, layer);
    if (forget.empty() || reference.empty()) {
        throw ConfigError("compute_uv: forget and reference prompt sets must be non-empty");
    }
    const auto mr = prompt_mean(m, vocab, reference, layer, positions);
    const auto mf = prompt_mean(m, vocab, forget, layer, positions);
    UnlearningVector uv;
    uv.layer = layer;
    uv.n_ref = reference.size();
    uv.n_forget = forget.size();
    uv.direction.resize(mr.size());
    for (std::size_t j = 0; j < mr.size(); ++j) {
        uv.direction[j] = static_cast<float>(mr[j] - mf[j]);
    }
    return uv;
}

double default_lambda(const Matrix& h) { return 1e-3 * trace(gram(h)) / static_cast<double>(h.cols()); }

RedirectionProblem build_problem(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<QARecord>& forget,
                                 const std::vector<QARecord>& retain, const UnlearningVector& uv,
                                 const ProblemOptions& options) {
    check_layer(m, uv.layer);
    const std::size_t d = m.config.d_model;
    const std::size_t p = m.config.d_mlp;
    if (uv.direction.size() != d) {
        throw DimensionError("build_problem: unlearning vector has dimension " + std::to_string(uv.direction.size()) +
                             ", model has " + std::to_string(d));
    }
    const RowSet f = collect_rows(m, vocab, forget, uv.layer, options.positions);
    std::vector<const std::vector<float>*> h_rows;
    std::vector<const std::vector<float>*> a_rows;
    std::set<std::vector<float>> seen;
    for (std::size_t i = 0; i < f.h.size(); ++i) {
        if (options.dedupe_forget_rows && !seen.insert(f.h[i]).second) {
            continue;
        }
        h_rows.push_back(&f.h[i]);
        a_rows.push_back(&f.a[i]);
    }
    const std::size_t n_forget = h_rows.size();

    RowSet r;
    if (options.retain_ratio.value_or(1.0) < 0.0) {
        throw ConfigError("build_problem: retain_ratio must be non-negative");
    }
    if (options.retain_ratio.value_or(1.0) > 0.0 && !retain.empty()) {
        r = collect_rows(m, vocab, retain, uv.layer, options.positions);
        const std::size_t want =
            options.retain_ratio
                ? static_cast<std::size_t>(std::llround(*options.retain_ratio * static_cast<double>(n_forget)))
                : r.h.size();
        for (std::size_t i : sample_without_replacement(r.h.size(), want, options.seed)) {
            h_rows.push_back(&r.h[i]);
            a_rows.push_back(&r.a[i]);
        }
    }
    if (h_rows.empty()) {
        throw ConfigError("build_problem: no rows selected");
    }

    RedirectionProblem prob;
    prob.layer = uv.layer;
    prob.n_forget_rows = n_forget;
    prob.n_retain_rows = h_rows.size() - n_forget;
    prob.h = stack(h_rows, p);
    prob.a_original = stack(a_rows, d);
    prob.a_target = prob.a_original;
    for (std::size_t i = 0; i < n_forget; ++i) {
        kernels::axpy(1.0f, uv.direction.data(), prob.a_target.row(i).data(), d);
    }
    prob.lambda = options.lambda ? *options.lambda : default_lambda(prob.h);
    if (prob.lambda < 0.0 || !std::isfinite(prob.lambda)) {
        throw ConfigError("build_problem: lambda must be finite and non-negative");
    }
    return prob;
}

SolveResult evaluate_solution(const RedirectionProblem& prob, const Matrix& weights) {
    SolveResult s;
    s.weights = weights;
    const Matrix pred = matmul(prob.h, weights);
    double sq = 0.0;
    double f_sum = 0.0;
    double r_sum = 0.0;
    for (std::size_t i = 0; i < pred.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < pred.cols(); ++j) {
            const double e = static_cast<double>(pred(i, j)) - prob.a_target(i, j);
            row += e * e;
        }
        sq += row;
        (i < prob.n_forget_rows ? f_sum : r_sum) += std::sqrt(row);
    }
    double wn = 0.0;
    for (float v : weights.values()) {
        wn += static_cast<double>(v) * v;
    }
    s.residual_frobenius = std::sqrt(sq);
    s.final_loss = sq + prob.lambda * wn;
    s.forget_residual = prob.n_forget_rows ? f_sum / static_cast<double>(prob.n_forget_rows) : 0.0;
    s.retain_residual = prob.n_retain_rows ? r_sum / static_cast<double>(prob.n_retain_rows) : 0.0;
    return s;
}

SolveResult solve_closed_form(const RedirectionProblem& prob) {
    const RidgeSolution sol = ridge_solve(prob.h, prob.a_target, prob.lambda);
    SolveResult s = evaluate_solution(prob, sol.weights);
    s.loss_curve = {s.final_loss};
    return s;
}

double lipschitz_constant(const RedirectionProblem& prob) {
    const EigenEstimate e = max_eigenvalue_sym(gram(prob.h), 10000, 1e-12);
    return 2.0 * (e.value + prob.lambda);
}

namespace {

// f64 residual R = H W - A over a row range, and its objective contribution.
double residual_rows(const Matrix& h, const Matrix& a, const MatrixF64& w, std::size_t r0, std::size_t r1,
                     MatrixF64& res) {
    const std::size_t p = w.rows;
    const std::size_t q = w.cols;
    res = MatrixF64(r1 - r0, q);
    double sq = 0.0;
    for (std::size_t i = r0; i < r1; ++i) {
        double* out = &res(i - r0, 0);
        for (std::size_t k = 0; k < p; ++k) {
            const double hv = h(i, k);
            if (hv == 0.0) {
                continue;
            }
            const double* wr = w.data.data() + k * q;
            for (std::size_t j = 0; j < q; ++j) {
                out[j] += hv * wr[j];
            }
        }
        for (std::size_t j = 0; j < q; ++j) {
            out[j] -= a(i, j);
            sq += out[j] * out[j];
        }
    }
    return sq;
}

double objective(const RedirectionProblem& prob, const MatrixF64& w) {
    MatrixF64 res;
    double v = residual_rows(prob.h, prob.a_target, w, 0, prob.h.rows(), res);
    double wn = 0.0;
    for (double x : w.data) {
        wn += x * x;
    }
    return v + prob.lambda * wn;
}

}  // namespace

SolveResult solve_sgd(const RedirectionProblem& prob, const Matrix& init, const SgdOptions& options) {
    const std::size_t n = prob.h.rows();
    const std::size_t p = prob.h.cols();
    const std::size_t q = prob.a_target.cols();
    if (init.rows() != p || init.cols() != q) {
        throw DimensionError("solve_sgd: initial weights must be " + std::to_string(p) + " x " + std::to_string(q));
    }
    const double lr = options.lr ? *options.lr : 0.5 / lipschitz_constant(prob);
    if (!(lr > 0.0) || !std::isfinite(lr)) {
        throw ConfigError("solve_sgd: learning rate must be positive");
    }
    const std::size_t batch = (options.batch == 0 || options.batch >= n) ? n : options.batch;
    MatrixF64 w = to_f64(init);
    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }

    std::vector<double> curve;
    curve.reserve(options.epochs);
    MatrixF64 grad(p, q);
    MatrixF64 res;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        if (batch < n) {
            for (std::size_t i = n; i > 1; --i) {
                const std::uint64_t k = i;
                const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
                std::uint64_t r = 0;
                do {
                    r = rng();
                } while (r >= limit);
                std::swap(order[i - 1], order[static_cast<std::size_t>(r % k)]);
            }
        }
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            // Gradient of the batch term rescaled to full-data magnitude, plus the ridge term.
            const double scale = 2.0 * static_cast<double>(n) / static_cast<double>(end - start);
            std::fill(grad.data.begin(), grad.data.end(), 0.0);
            for (std::size_t bi = start; bi < end; ++bi) {
                const std::size_t i = batch < n ? order[bi] : bi;
                residual_rows(prob.h, prob.a_target, w, i, i + 1, res);
                for (std::size_t k = 0; k < p; ++k) {
                    const double hv = prob.h(i, k);
                    if (hv == 0.0) {
                        continue;
                    }
                    double* g = &grad(k, 0);
                    for (std::size_t j = 0; j < q; ++j) {
                        g[j] += hv * res.data[j];
                    }
                }
            }
            for (std::size_t k = 0; k < w.data.size(); ++k) {
                w.data[k] -= lr * (scale * grad.data[k] + 2.0 * prob.lambda * w.data[k]);
            }
        }
        const double loss = objective(prob, w);
        if (!std::isfinite(loss)) {
            throw DivergenceError("solve_sgd: non-finite loss at epoch " + std::to_string(epoch + 1));
        }
        curve.push_back(loss);
    }
    SolveResult s = evaluate_solution(prob, to_f32(w));
    s.epochs_run = options.epochs;
    s.loss_curve = std::move(curve);
    if (s.loss_curve.empty()) {
        s.loss_curve.push_back(objective(prob, w));
    }
    s.final_loss = s.loss_curve.back();
    return s;
}

namespace {

const std::vector<std::string>& reference_prompts(const CorpusBundle& b, ReferenceClass c) {
    const auto& v = c == ReferenceClass::UnknownEntity ? b.reference : b.reference_refusal;
    if (v.empty()) {
        throw ConfigError("reference prompt set (" + to_string(c) + ") is empty");
    }
    return v;
}

std::vector<std::string> questions_of(const std::vector<QARecord>& records) {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.question);
    }
    return out;
}

LayerSolve solve_layer(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle, std::size_t layer,
                       const UnlearnOptions& options, RedirectionProblem* problem_out) {
    LayerSolve ls;
    ls.uv = compute_uv(m, vocab, questions_of(bundle.forget), reference_prompts(bundle, options.reference), layer,
                       options.uv_positions);
    RedirectionProblem prob = build_problem(m, vocab, bundle.forget, bundle.retain, ls.uv, options.problem);
    ls.lambda = prob.lambda;
    ls.n_forget_rows = prob.n_forget_rows;
    ls.n_retain_rows = prob.n_retain_rows;
    ls.solve = options.solver == SolverKind::ClosedForm ? solve_closed_form(prob)
                                                        : solve_sgd(prob, m.layer(layer).down, options.sgd);
    if (problem_out != nullptr) {
        *problem_out = std::move(prob);
    }
    return ls;
}

std::vector<std::size_t> candidate_layers(const ModelCheckpoint& m, const UnlearnOptions& options) {
    std::vector<std::size_t> c = options.candidates;
    if (c.empty()) {
        for (std::size_t l = 1; l <= m.config.n_layers; ++l) {
            c.push_back(l);
        }
    }
    for (std::size_t l : c) {
        check_layer(m, l);
    }
    return c;
}

}  // namespace

std::vector<LayerScore> select_layer(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                                     const UnlearnOptions& options) {
    const auto cands = candidate_layers(m, options);
    if (cands.empty()) {
        throw ConfigError("select_layer: no candidate layers");
    }
    std::vector<std::vector<float>> desired;
    std::vector<std::vector<float>> unrelated;
    for (const auto& s : bundle.desired_responses) {
        desired.push_back(embed_text(m, vocab, s));
    }
    for (const auto& s : bundle.unrelated_responses) {
        unrelated.push_back(embed_text(m, vocab, s));
    }
    auto mean_cos = [](const std::vector<std::vector<float>>& resp, const std::vector<std::vector<float>>& targets) {
        if (resp.empty() || targets.empty()) {
            return 0.0;
        }
        double s = 0.0;
        for (const auto& r : resp) {
            for (const auto& t : targets) {
                s += cosine(r, t);
            }
        }
        return s / static_cast<double>(resp.size() * targets.size());
    };

    std::vector<LayerScore> scores(cands.size());
    parallel_for(cands.size(), options.threads, [&](std::size_t i) {
        const std::size_t layer = cands[i];
        ModelCheckpoint copy = m;
        copy.layer(layer).down = solve_layer(m, vocab, bundle, layer, options, nullptr).solve.weights;
        std::vector<std::vector<float>> resp;
        for (const auto& rec : bundle.forget) {
            // Embeddings come from the unmodified checkpoint so every layer is scored in the same space.
            resp.push_back(embed_text(m, vocab, respond(copy, vocab, rec.question, options.max_new_tokens)));
        }
        LayerScore& s = scores[i];
        s.layer = layer;
        s.s1 = mean_cos(resp, desired);
        s.s2 = mean_cos(resp, unrelated);
        s.score = s.s1 - s.s2;
    });
    std::stable_sort(scores.begin(), scores.end(), [](const LayerScore& a, const LayerScore& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.layer < b.layer;
    });
    return scores;
}

UnlearnOutcome unlearn(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                       const UnlearnOptions& options) {
    if (bundle.forget.empty()) {
        throw ConfigError("unlearn: forget set is empty");
    }
    UnlearnOutcome out;
    UnlearnReport& rep = out.report;
    rep.solver = options.solver;
    if (!options.layers.empty()) {
        rep.chosen_layers = options.layers;
        for (std::size_t l : rep.chosen_layers) {
            check_layer(m, l);
        }
        std::sort(rep.chosen_layers.begin(), rep.chosen_layers.end());
        if (std::adjacent_find(rep.chosen_layers.begin(), rep.chosen_layers.end()) != rep.chosen_layers.end()) {
            throw ConfigError("unlearn: duplicate layer in explicit layer list");
        }
    } else {
        if (options.top_k == 0) {
            throw ConfigError("unlearn: top_k must be >= 1");
        }
        rep.layer_scores = select_layer(m, vocab, bundle, options);
        if (options.top_k > rep.layer_scores.size()) {
            throw ConfigError("unlearn: top_k " + std::to_string(options.top_k) + " exceeds candidate count " +
                              std::to_string(rep.layer_scores.size()));
        }
        for (std::size_t i = 0; i < options.top_k; ++i) {
            rep.chosen_layers.push_back(rep.layer_scores[i].layer);
        }
        std::sort(rep.chosen_layers.begin(), rep.chosen_layers.end());
    }

    out.model = m;
    out.problems.resize(rep.chosen_layers.size());
    rep.per_layer.resize(rep.chosen_layers.size());
    if (options.cumulative) {
        // lowest layer first, each solved on the already-redirected model
        for (std::size_t i = 0; i < rep.chosen_layers.size(); ++i) {
            rep.per_layer[i] = solve_layer(out.model, vocab, bundle, rep.chosen_layers[i], options, &out.problems[i]);
            out.model.layer(rep.chosen_layers[i]).down = rep.per_layer[i].solve.weights;
        }
    } else {
        parallel_for(rep.chosen_layers.size(), options.threads, [&](std::size_t i) {
            rep.per_layer[i] = solve_layer(m, vocab, bundle, rep.chosen_layers[i], options, &out.problems[i]);
        });
    }
    double norm_sum = 0.0;
    for (std::size_t i = 0; i < rep.chosen_layers.size(); ++i) {
        const LayerSolve& ls = rep.per_layer[i];
        out.model.layer(rep.chosen_layers[i]).down = ls.solve.weights;
        rep.final_loss += ls.solve.final_loss;
        rep.epochs_run = std::max(rep.epochs_run, ls.solve.epochs_run);
        const double rows = static_cast<double>(ls.n_forget_rows + ls.n_retain_rows);
        norm_sum += (ls.solve.forget_residual * static_cast<double>(ls.n_forget_rows) +
                     ls.solve.retain_residual * static_cast<double>(ls.n_retain_rows)) /
                    rows;
    }
    rep.final_loss_norm = norm_sum / static_cast<double>(rep.chosen_layers.size());
    return out;
}

SequentialOutcome unlearn_sequential(const ModelCheckpoint& m, const Vocab& vocab,
                                     const std::vector<CorpusBundle>& rounds, const UnlearnOptions& options) {
    if (rounds.size() < 2) {
        throw ConfigError("unlearn_sequential: need at least two rounds");
    }
    std::set<std::string> seen;
    for (const auto& b : rounds) {
        std::set<std::string> mine;
        for (const auto& r : b.forget) {
            if (seen.count(r.question) != 0) {
                throw ConfigError("unlearn_sequential: forget sets overlap at question '" + r.question + "'");
            }
            mine.insert(r.question);
        }
        seen.insert(mine.begin(), mine.end());
    }

    SequentialOutcome out;
    out.model = m;
    EvalOptions eo;
    eo.max_new_tokens = options.max_new_tokens;
    eo.threads = options.threads;
    std::vector<QARecord> forgotten;
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        SequentialRound round;
        if (!rounds[i].forget.empty()) {
            // Earlier forget sets join the retain constraint so this round's
            // solve keeps their current, already redirected, outputs.
            CorpusBundle b = rounds[i];
            b.retain.insert(b.retain.end(), forgotten.begin(), forgotten.end());
            UnlearnOutcome o = unlearn(out.model, vocab, b, options);
            out.model = std::move(o.model);
            round.report = std::move(o.report);
        }
        for (std::size_t j = 0; j <= i; ++j) {
            round.forget_rouge1_after.push_back(
                summarize(evaluate_records(out.model, vocab, rounds[j].forget, "forget", eo)).rouge1);
        }
        round.retain_rouge1_after = summarize(evaluate_records(out.model, vocab, rounds[i].retain, "retain", eo)).rouge1;
        forgotten.insert(forgotten.end(), rounds[i].forget.begin(), rounds[i].forget.end());
        out.rounds.push_back(std::move(round));
    }
    return out;
}

nlohmann::json to_json(const UnlearnReport& r) {
    nlohmann::json j;
    j["chosen_layers"] = r.chosen_layers;
    j["solver"] = to_string(r.solver);
    j["final_loss"] = r.final_loss;
    j["final_loss_norm"] = r.final_loss_norm;
    j["epochs_run"] = r.epochs_run;
    auto scores = nlohmann::json::array();
    for (const auto& s : r.layer_scores) {
        scores.push_back({{"layer", s.layer}, {"s1", s.s1}, {"s2", s.s2}, {"score", s.score}});
    }
    j["layer_scores"] = std::move(scores);
    auto layers = nlohmann::json::array();
    for (const auto& ls : r.per_layer) {
        double norm = 0.0;
        for (float v : ls.uv.direction) {
            norm += static_cast<double>(v) * v;
        }
        layers.push_back({{"layer", ls.uv.layer},
                          {"uv_norm", std::sqrt(norm)},
                          {"uv_n_ref", ls.uv.n_ref},
                          {"uv_n_forget", ls.uv.n_forget},
                          {"lambda", ls.lambda},
                          {"n_forget_rows", ls.n_forget_rows},
                          {"n_retain_rows", ls.n_retain_rows},
                          {"final_loss", ls.solve.final_loss},
                          {"residual_frobenius", ls.solve.residual_frobenius},
                          {"forget_row_residual", ls.solve.forget_residual},
                          {"retain_row_residual", ls.solve.retain_residual},
                          {"epochs_run", ls.solve.epochs_run},
                          {"loss_curve", ls.solve.loss_curve}});
    }
    j["per_layer"] = std::move(layers);
    return j;
}

namespace {
constexpr std::array<char, 4> kUvMagic{'L', 'N', 'U', 'V'};
}

void save_uv(const UnlearningVector& uv, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    const std::array<std::uint32_t, 3> header{static_cast<std::uint32_t>(uv.layer),
                                              static_cast<std::uint32_t>(uv.direction.size()), 1u};
    out.write(kUvMagic.data(), 4);
    out.write(reinterpret_cast<const char*>(header.data()), sizeof header);
    out.write(reinterpret_cast<const char*>(uv.direction.data()),
              static_cast<std::streamsize>(uv.direction.size() * sizeof(float)));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

UnlearningVector load_uv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::array<char, 4> magic{};
    std::array<std::uint32_t, 3> header{};
    in.read(magic.data(), 4);
    in.read(reinterpret_cast<char*>(header.data()), sizeof header);
    if (!in) {
        throw FormatError(path.string() + ": truncated unlearning-vector file");
    }
    if (magic != kUvMagic) {
        throw FormatError(path.string() + ": bad magic, not an unlearning-vector file");
    }
    if (header[2] != 1) {
        throw FormatError(path.string() + ": expected one vector, header says " + std::to_string(header[2]));
    }
    UnlearningVector uv;
    uv.layer = header[0];
    uv.direction.resize(header[1]);
    in.read(reinterpret_cast<char*>(uv.direction.data()), static_cast<std::streamsize>(header[1] * sizeof(float)));
    if (!in) {
        throw FormatError(path.string() + ": truncated unlearning-vector file");
    }
    return uv;
}

}  // namespace lunar
