// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "lunar/errors.hpp"
#include "lunar/unlearn.hpp"
#include "test_util.hpp"

namespace {

using namespace lunar;
namespace fs = std::filesystem;

struct Fixture {
    Vocab vocab;
    CorpusBundle bundle;
    ModelCheckpoint model;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture x;
        x.vocab = Vocab({"a", "b", "c", "d", "e", "f", "?", "x", "y", "z", "i", "do", "not", "know", "w"});
        x.bundle.forget = {{"a b ?", "x y", "p0", "t"}, {"b a ?", "y", "p0", "t"}};
        x.bundle.retain = {{"c d ?", "z", "p1", "t"}, {"d c ?", "x z", "p1", "t"},
                           {"e f ?", "y", "p2", "t"}, {"f e ?", "z z", "p2", "t"},
                           {"c e ?", "x", "p3", "t"}};
        x.bundle.reference = {"w w ?", "e w ?", "w c ?"};
        x.bundle.reference_refusal = {"do w ?"};
        x.bundle.desired_responses = {"i do not know"};
        x.bundle.unrelated_responses = {"x y z"};
        ModelConfig c;
        c.d_model = 8;
        c.n_layers = 3;
        c.n_heads = 2;
        c.d_mlp = 32;
        c.vocab_size = static_cast<std::uint32_t>(x.vocab.size());
        c.max_seq_len = 16;
        c.seed = 3;
        x.model = init_model(c);
        return x;
    }();
    return f;
}

std::vector<std::string> questions(const std::vector<QARecord>& rs) {
    std::vector<std::string> q;
    for (const auto& r : rs) {
        q.push_back(r.question);
    }
    return q;
}

TEST(Enums, RoundTrip) {
    for (auto v : {UvPositions::PromptAll, UvPositions::PromptLast}) {
        EXPECT_EQ(parse_uv_positions(to_string(v)), v);
    }
    for (auto v : {TargetPositions::All, TargetPositions::PromptAll}) {
        EXPECT_EQ(parse_target_positions(to_string(v)), v);
    }
    for (auto v : {SolverKind::ClosedForm, SolverKind::Sgd}) {
        EXPECT_EQ(parse_solver(to_string(v)), v);
    }
    for (auto v : {ReferenceClass::UnknownEntity, ReferenceClass::Refusal}) {
        EXPECT_EQ(parse_reference_class(to_string(v)), v);
    }
    EXPECT_THROW(parse_solver("adam"), ConfigError);
}

TEST(UnlearningVector, SelfDifferenceIsZero) {
    const auto& f = fixture();
    const auto q = questions(f.bundle.forget);
    for (auto pos : {UvPositions::PromptAll, UvPositions::PromptLast}) {
        const UnlearningVector uv = compute_uv(f.model, f.vocab, q, q, 2, pos);
        for (float x : uv.direction) {
            EXPECT_EQ(x, 0.0f);
        }
    }
}

TEST(UnlearningVector, MatchesIndependentTraceWalk) {
    const auto& f = fixture();
    const auto fq = questions(f.bundle.forget);
    const auto& rq = f.bundle.reference;
    for (auto pos : {UvPositions::PromptAll, UvPositions::PromptLast}) {
        for (std::size_t l = 1; l <= 3; ++l) {
            auto mean_of = [&](const std::vector<std::string>& qs) {
                std::vector<double> acc(8, 0.0);
                for (const auto& q : qs) {
                    const Tokens t = prompt_tokens(f.vocab, q);
                    const auto fr = forward(f.model, t, true);
                    const Matrix& r = fr.trace->residual_out(l);
                    const std::size_t first = pos == UvPositions::PromptLast ? t.size() - 1 : 0;
                    for (std::size_t k = 0; k < 8; ++k) {
                        double s = 0;
                        for (std::size_t i = first; i < t.size(); ++i) {
                            s += r(i, k);
                        }
                        acc[k] += s / static_cast<double>(t.size() - first) / static_cast<double>(qs.size());
                    }
                }
                return acc;
            };
            const auto mf = mean_of(fq);
            const auto mr = mean_of(rq);
            const UnlearningVector uv = compute_uv(f.model, f.vocab, fq, rq, l, pos);
            ASSERT_EQ(uv.layer, l);
            ASSERT_EQ(uv.n_forget, fq.size());
            ASSERT_EQ(uv.n_ref, rq.size());
            for (std::size_t k = 0; k < 8; ++k) {
                EXPECT_NEAR(uv.direction[k], mr[k] - mf[k], 1e-5);
            }
        }
    }
}

TEST(UnlearningVector, Errors) {
    const auto& f = fixture();
    const auto q = questions(f.bundle.forget);
    EXPECT_THROW(compute_uv(f.model, f.vocab, {}, q, 1, UvPositions::PromptAll), ConfigError);
    EXPECT_THROW(compute_uv(f.model, f.vocab, q, q, 0, UvPositions::PromptAll), ConfigError);
    EXPECT_THROW(compute_uv(f.model, f.vocab, q, q, 4, UvPositions::PromptAll), ConfigError);
}

TEST(UnlearningVector, FileRoundTrip) {
    const auto& f = fixture();
    const UnlearningVector uv = compute_uv(f.model, f.vocab, questions(f.bundle.forget), f.bundle.reference, 2,
                                           UvPositions::PromptLast);
    const fs::path p = fs::temp_directory_path() / "lunar_uv.bin";
    save_uv(uv, p);
    EXPECT_EQ(fs::file_size(p), 16u + 4u * 8u);
    const UnlearningVector back = load_uv(p);
    EXPECT_EQ(back.layer, 2u);
    EXPECT_EQ(back.direction, uv.direction);
    std::fstream(p, std::ios::in | std::ios::out | std::ios::binary).write("XXXX", 4);
    EXPECT_THROW(load_uv(p), FormatError);
    fs::remove(p);
}

TEST(Problem, RowsTargetsAndShift) {
    const auto& f = fixture();
    const UnlearningVector uv = compute_uv(f.model, f.vocab, questions(f.bundle.forget), f.bundle.reference, 2,
                                           UvPositions::PromptLast);
    ProblemOptions o;
    const RedirectionProblem p = build_problem(f.model, f.vocab, f.bundle.forget, f.bundle.retain, uv, o);
    // Every token of prompt + answer except the closing EOS is an input position.
    auto count = [&](const std::vector<QARecord>& rs) {
        std::size_t n = 0;
        for (const auto& r : rs) {
            n += make_example(f.vocab, r).tokens.size() - 1;
        }
        return n;
    };
    EXPECT_EQ(p.n_forget_rows, count(f.bundle.forget));
    EXPECT_EQ(p.n_retain_rows, count(f.bundle.retain));
    EXPECT_EQ(p.h.rows(), p.n_forget_rows + p.n_retain_rows);
    EXPECT_EQ(p.h.cols(), 32u);
    for (std::size_t i = 0; i < p.h.rows(); ++i) {
        for (std::size_t k = 0; k < 8; ++k) {
            const double shift = p.a_target(i, k) - p.a_original(i, k);
            EXPECT_NEAR(shift, i < p.n_forget_rows ? uv.direction[k] : 0.0, 1e-5);
        }
    }
    // a_original is the layer's MLP output h * W.
    const Matrix hw = matmul(p.h, f.model.layer(2).down);
    EXPECT_LT(frobenius_distance(hw, p.a_original), 1e-4);
    EXPECT_NEAR(p.lambda, default_lambda(p.h), 1e-12);
    EXPECT_NEAR(default_lambda(p.h), 1e-3 * trace(gram(p.h)) / 32.0, 1e-12);
}

TEST(Problem, PromptOnlyPositionsAndRetainSampling) {
    const auto& f = fixture();
    const UnlearningVector uv = compute_uv(f.model, f.vocab, questions(f.bundle.forget), f.bundle.reference, 1,
                                           UvPositions::PromptAll);
    ProblemOptions o;
    o.positions = TargetPositions::PromptAll;
    o.retain_ratio = 0.0;
    const RedirectionProblem p = build_problem(f.model, f.vocab, f.bundle.forget, f.bundle.retain, uv, o);
    EXPECT_EQ(p.n_retain_rows, 0u);
    std::size_t prompt_rows = 0;
    for (const auto& r : f.bundle.forget) {
        prompt_rows += prompt_tokens(f.vocab, r.question).size();
    }
    EXPECT_EQ(p.n_forget_rows, prompt_rows);
    o.retain_ratio = 1.0;
    const RedirectionProblem q = build_problem(f.model, f.vocab, f.bundle.forget, f.bundle.retain, uv, o);
    EXPECT_EQ(q.n_retain_rows, q.n_forget_rows);
    EXPECT_EQ(build_problem(f.model, f.vocab, f.bundle.forget, f.bundle.retain, uv, o).h, q.h);
    o.retain_ratio = -1.0;
    EXPECT_THROW(build_problem(f.model, f.vocab, f.bundle.forget, f.bundle.retain, uv, o), ConfigError);
    o.retain_ratio = 0.0;
    EXPECT_THROW(build_problem(f.model, f.vocab, {}, f.bundle.retain, uv, o), ConfigError);
}

RedirectionProblem null_problem(std::size_t layer) {
    const auto& f = fixture();
    UnlearningVector uv;
    uv.layer = layer;
    uv.direction.assign(8, 0.0f);
    return build_problem(f.model, f.vocab, f.bundle.forget, f.bundle.retain, uv, {});
}

TEST(ClosedForm, NullRedirectionKeepsOutputs) {
    RedirectionProblem p = null_problem(2);
    EXPECT_EQ(p.a_target, p.a_original);
    p.lambda = 1e-8;
    const SolveResult s = solve_closed_form(p);
    EXPECT_LT(frobenius_distance(matmul(p.h, s.weights), p.a_original), 1e-4 * (1 + frobenius_norm(p.a_original)));
}

TEST(ClosedForm, ShrinkageLimit) {
    RedirectionProblem p = null_problem(1);
    p.lambda = 1e6 * trace(gram(p.h));
    const SolveResult s = solve_closed_form(p);
    EXPECT_LT(frobenius_norm(s.weights), 1e-5 * (1 + frobenius_norm(p.a_target)));
    EXPECT_NEAR(s.residual_frobenius, frobenius_norm(p.a_target), 1e-4 * frobenius_norm(p.a_target));
}

TEST(ClosedForm, ExactInterpolationRegime) {
    const auto& f = fixture();
    const UnlearningVector uv = compute_uv(f.model, f.vocab, questions(f.bundle.forget), f.bundle.reference, 2,
                                           UvPositions::PromptLast);
    ProblemOptions o;
    o.retain_ratio = 0.0;
    o.lambda = 0.0;
    o.dedupe_forget_rows = true;
    const RedirectionProblem p = build_problem(f.model, f.vocab, f.bundle.forget, {}, uv, o);
    ASSERT_LT(p.h.rows(), p.h.cols());
    const SolveResult s = solve_closed_form(p);
    EXPECT_LE(s.residual_frobenius, 1e-4);
}

RedirectionProblem random_problem(std::mt19937_64& rng, std::size_t n, std::size_t p, std::size_t q, double lam_rel) {
    RedirectionProblem prob;
    prob.layer = 1;
    prob.h = test::random_matrix(n, p, rng);
    prob.a_target = test::random_matrix(n, q, rng);
    prob.a_original = prob.a_target;
    prob.n_forget_rows = n;
    prob.lambda = lam_rel * trace(gram(prob.h)) / static_cast<double>(p);
    return prob;
}

TEST(Sgd, ZeroEpochsAndMonotoneDescent) {
    std::mt19937_64 rng(21);
    const RedirectionProblem p = random_problem(rng, 60, 10, 4, 0.05);
    const Matrix init = test::random_matrix(10, 4, rng);
    SgdOptions o;
    o.epochs = 0;
    EXPECT_EQ(solve_sgd(p, init, o).weights, init);
    o.epochs = 100;
    const SolveResult s = solve_sgd(p, init, o);
    ASSERT_EQ(s.loss_curve.size(), 100u);
    for (std::size_t i = 1; i < s.loss_curve.size(); ++i) {
        EXPECT_LE(s.loss_curve[i], s.loss_curve[i - 1] + 1e-7 * std::fabs(s.loss_curve[i - 1]));
    }
    EXPECT_GE(s.final_loss, solve_closed_form(p).final_loss * (1 - 1e-6));
}

TEST(Sgd, ConvergesToClosedForm) {
    std::mt19937_64 rng(22);
    const RedirectionProblem p = random_problem(rng, 80, 12, 3, 0.1);
    SgdOptions o;
    o.epochs = 3000;
    const SolveResult s = solve_sgd(p, Matrix(12, 3), o);
    const SolveResult c = solve_closed_form(p);
    EXPECT_LT(frobenius_distance(s.weights, c.weights) / frobenius_norm(c.weights), 1e-3);
}

TEST(Sgd, MiniBatchReducesLossAndDivergenceThrows) {
    std::mt19937_64 rng(23);
    const RedirectionProblem p = random_problem(rng, 64, 8, 2, 0.1);
    SgdOptions o;
    o.epochs = 50;
    o.batch = 16;
    const SolveResult s = solve_sgd(p, Matrix(8, 2), o);
    EXPECT_LT(s.loss_curve.back(), s.loss_curve.front());
    o.lr = 1e6;
    o.batch = 0;
    EXPECT_THROW(solve_sgd(p, Matrix(8, 2), o), DivergenceError);
    EXPECT_THROW(solve_sgd(p, Matrix(3, 2), SgdOptions{}), DimensionError);
}

TEST(Sgd, LipschitzConstantMatchesOracle) {
    std::mt19937_64 rng(24);
    const RedirectionProblem p = random_problem(rng, 30, 5, 2, 0.2);
    const MatrixF64 g = gram(p.h);
    test::Dense d(5, std::vector<long double>(5));
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            d[i][j] = g(i, j);
        }
    }
    const double lmax = static_cast<double>(test::jacobi_oracle(d).back());
    EXPECT_NEAR(lipschitz_constant(p), 2.0 * (lmax + p.lambda), 1e-4 * lmax);
}

TEST(Unlearn, SingleLayerChangesOnlyItsDownProjection) {
    const auto& f = fixture();
    UnlearnOptions o;
    o.layers = {2};
    const UnlearnOutcome out = unlearn(f.model, f.vocab, f.bundle, o);
    EXPECT_EQ(diff_tensors(f.model, out.model), std::vector<std::string>{down_projection_name(2)});
    EXPECT_EQ(out.report.chosen_layers, std::vector<std::size_t>{2});
    EXPECT_TRUE(out.report.layer_scores.empty());
    // Layers below the intervention see bitwise identical activations.
    for (const auto& r : f.bundle.retain) {
        const Tokens t = make_example(f.vocab, r).tokens;
        const auto a = forward(f.model, t, true);
        const auto b = forward(out.model, t, true);
        EXPECT_EQ(a.trace->residual_out(1), b.trace->residual_out(1));
    }
    const auto j = to_json(out.report);
    EXPECT_TRUE(j.contains("final_loss"));
    EXPECT_TRUE(j.contains("final_loss_norm"));
    EXPECT_GE(out.report.final_loss, solve_closed_form(out.problems[0]).final_loss * (1 - 1e-9));
}

TEST(Unlearn, TopKChangesKTensorsAndRanks) {
    const auto& f = fixture();
    UnlearnOptions o;
    o.top_k = 2;
    const UnlearnOutcome out = unlearn(f.model, f.vocab, f.bundle, o);
    EXPECT_EQ(out.report.chosen_layers.size(), 2u);
    EXPECT_EQ(diff_tensors(f.model, out.model).size(), 2u);
    ASSERT_EQ(out.report.layer_scores.size(), 3u);
    for (std::size_t i = 1; i < 3; ++i) {
        const auto& a = out.report.layer_scores[i - 1];
        const auto& b = out.report.layer_scores[i];
        EXPECT_TRUE(a.score > b.score || (a.score == b.score && a.layer < b.layer));
    }
    o.top_k = 4;
    EXPECT_THROW(unlearn(f.model, f.vocab, f.bundle, o), ConfigError);
    o.top_k = 1;
    o.layers = {9};
    EXPECT_THROW(unlearn(f.model, f.vocab, f.bundle, o), ConfigError);
}

TEST(Unlearn, CumulativeSolvesOnRunningModel) {
    const auto& f = fixture();
    UnlearnOptions o;
    o.layers = {3, 1};
    const UnlearnOutcome cum = unlearn(f.model, f.vocab, f.bundle, o);
    o.cumulative = false;
    const UnlearnOutcome ind = unlearn(f.model, f.vocab, f.bundle, o);
    // The lowest layer sees the input model either way.
    EXPECT_EQ(cum.model.layer(1).down, ind.model.layer(1).down);
    EXPECT_EQ(cum.report.per_layer[0].uv.direction, ind.report.per_layer[0].uv.direction);
    EXPECT_NE(cum.report.per_layer[1].uv.direction, ind.report.per_layer[1].uv.direction);
    // Layer 3 alone, solved on the layer-1 result, reproduces the cumulative run.
    UnlearnOptions one;
    one.layers = {3};
    const UnlearnOutcome step = unlearn(unlearn(f.model, f.vocab, f.bundle, UnlearnOptions{{1}}).model, f.vocab,
                                        f.bundle, one);
    EXPECT_EQ(step.model, cum.model);
}

TEST(Unlearn, IdenticalTargetListsTieOnLayerIndex) {
    auto f = fixture();
    f.bundle.unrelated_responses = f.bundle.desired_responses;
    const auto scores = select_layer(f.model, f.vocab, f.bundle, {});
    ASSERT_EQ(scores.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(scores[i].score, 0.0, 1e-12);
        EXPECT_EQ(scores[i].layer, i + 1);
    }
}

TEST(Unlearn, SgdSolverRuns) {
    const auto& f = fixture();
    UnlearnOptions o;
    o.layers = {3};
    o.solver = SolverKind::Sgd;
    o.sgd.epochs = 20;
    const UnlearnOutcome out = unlearn(f.model, f.vocab, f.bundle, o);
    EXPECT_EQ(out.report.epochs_run, 20u);
    EXPECT_EQ(out.report.per_layer[0].solve.loss_curve.size(), 20u);
}

TEST(Sequential, EmptyRoundIsNoOpAndOverlapRejected) {
    const auto& f = fixture();
    CorpusBundle r1 = f.bundle;
    CorpusBundle r2 = f.bundle;
    r2.forget.clear();
    UnlearnOptions o;
    o.layers = {2};
    const SequentialOutcome s = unlearn_sequential(f.model, f.vocab, {r1, r2}, o);
    const UnlearnOutcome one = unlearn(f.model, f.vocab, r1, o);
    EXPECT_EQ(s.model, one.model);
    ASSERT_EQ(s.rounds.size(), 2u);
    EXPECT_EQ(s.rounds[1].forget_rouge1_after.size(), 2u);
    EXPECT_THROW(unlearn_sequential(f.model, f.vocab, {r1, r1}, o), ConfigError);
}

}  // namespace
