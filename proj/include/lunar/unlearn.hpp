// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Unlearning by activation redirection: a difference-in-means direction at one
// layer's residual stream, redirected MLP targets for the forget tokens, and a
// re-solve of that layer's down-projection (closed form or gradient descent).
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lunar/corpus.hpp"
#include "lunar/linalg.hpp"
#include "lunar/metrics.hpp"
#include "lunar/model.hpp"

namespace lunar {

// Positions of a prompt that feed the activation mean.
enum class UvPositions { PromptAll, PromptLast };
// Token positions that become rows of the redirection problem.
enum class TargetPositions { All, PromptAll };
enum class SolverKind { ClosedForm, Sgd };
enum class ReferenceClass { UnknownEntity, Refusal };

std::string to_string(UvPositions v);
std::string to_string(TargetPositions v);
std::string to_string(SolverKind v);
std::string to_string(ReferenceClass v);
// Throw ConfigError naming the accepted values.
UvPositions parse_uv_positions(std::string_view s);
TargetPositions parse_target_positions(std::string_view s);
SolverKind parse_solver(std::string_view s);
ReferenceClass parse_reference_class(std::string_view s);

struct UnlearningVector {
    std::size_t layer = 0;
    std::vector<float> direction;
    std::size_t n_ref = 0;
    std::size_t n_forget = 0;
};

// direction = mean(reference) - mean(forget) of residual_out(layer), each prompt
// first averaged over its selected positions. Throws ConfigError for an empty
// prompt set or a layer outside [1, L].
UnlearningVector compute_uv(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<std::string>& forget,
                            const std::vector<std::string>& reference, std::size_t layer, UvPositions positions);

struct RedirectionProblem {
    std::size_t layer = 0;
    Matrix h;         // (n + m) x p, forget rows first
    Matrix a_target;  // (n + m) x d
    Matrix a_original;
    double lambda = 0.0;
    std::size_t n_forget_rows = 0;
    std::size_t n_retain_rows = 0;
};

struct ProblemOptions {
    std::optional<double> lambda;  // default 1e-3 * trace(H^T H) / p
    TargetPositions positions = TargetPositions::All;
    // Retain rows drawn uniformly without replacement, retain_ratio times the
    // forget row count (capped at what exists); nullopt takes every retain
    // row and 0 disables them.
    std::optional<double> retain_ratio;
    std::uint64_t seed = 1;
    // Drop forget rows whose H row repeats an earlier one.
    bool dedupe_forget_rows = false;
};

double default_lambda(const Matrix& h);

// Throws ConfigError when no rows are selected.
RedirectionProblem build_problem(const ModelCheckpoint& m, const Vocab& vocab, const std::vector<QARecord>& forget,
                                 const std::vector<QARecord>& retain, const UnlearningVector& uv,
                                 const ProblemOptions& options);

struct SolveResult {
    Matrix weights;                   // p x d, the new down-projection
    std::vector<double> loss_curve;   // objective per epoch (SGD), single entry for closed form
    double final_loss = 0.0;          // ||H W - A||_F^2 + lambda ||W||_F^2
    double residual_frobenius = 0.0;  // ||H W - A||_F
    double forget_residual = 0.0;     // mean L2 row residual, forget rows
    double retain_residual = 0.0;     // mean L2 row residual, retain rows
    std::size_t epochs_run = 0;
};

SolveResult solve_closed_form(const RedirectionProblem& prob);

struct SgdOptions {
    std::size_t epochs = 500;
    std::optional<double> lr;  // auto: 0.5 / L_lip
    std::size_t batch = 0;     // 0 = full batch
    std::uint64_t seed = 1;
};

// Lipschitz constant of the objective's gradient: 2 (lambda_max(H^T H) + lambda).
double lipschitz_constant(const RedirectionProblem& prob);

// Gradient descent on the ridge objective warm-started from `init`
// (the layer's current down-projection). Throws DivergenceError on a
// non-finite loss.
SolveResult solve_sgd(const RedirectionProblem& prob, const Matrix& init, const SgdOptions& options);

SolveResult evaluate_solution(const RedirectionProblem& prob, const Matrix& weights);

struct LayerScore {
    std::size_t layer = 0;
    double s1 = 0.0;
    double s2 = 0.0;
    double score = 0.0;
};

struct UnlearnOptions {
    std::vector<std::size_t> layers;  // explicit; empty = auto top_k
    std::size_t top_k = 1;
    std::vector<std::size_t> candidates;  // empty = every layer
    // Several layers: solve them in ascending order on the running model
    // (true) or all from the input checkpoint (false).
    bool cumulative = true;
    SolverKind solver = SolverKind::ClosedForm;
    SgdOptions sgd;
    ProblemOptions problem;
    UvPositions uv_positions = UvPositions::PromptLast;
    ReferenceClass reference = ReferenceClass::UnknownEntity;
    std::size_t max_new_tokens = 16;
    std::size_t threads = 1;
};

// Ranked by score descending, lower layer first on ties.
std::vector<LayerScore> select_layer(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                                     const UnlearnOptions& options);

struct LayerSolve {
    UnlearningVector uv;
    double lambda = 0.0;
    std::size_t n_forget_rows = 0;
    std::size_t n_retain_rows = 0;
    SolveResult solve;
};

struct UnlearnReport {
    std::vector<std::size_t> chosen_layers;
    std::vector<LayerScore> layer_scores;  // empty when layers were explicit
    SolverKind solver = SolverKind::ClosedForm;
    std::vector<LayerSolve> per_layer;
    double final_loss = 0.0;  // sum over layers
    double final_loss_norm = 0.0;  // mean per-row L2 residual (unsquared form), averaged over layers
    std::size_t epochs_run = 0;
};

struct UnlearnOutcome {
    ModelCheckpoint model;
    UnlearnReport report;
    std::vector<RedirectionProblem> problems;
};

// With `cumulative`, layer l's direction and problem see the redirections of
// the chosen layers below it; otherwise all come from the input checkpoint. Throws ConfigError for an empty
// forget set or invalid layers.
UnlearnOutcome unlearn(const ModelCheckpoint& m, const Vocab& vocab, const CorpusBundle& bundle,
                       const UnlearnOptions& options);

struct SequentialRound {
    UnlearnReport report;
    // Forget ROUGE1 of rounds 0..i measured after round i.
    std::vector<double> forget_rouge1_after;
    double retain_rouge1_after = 0.0;
};

struct SequentialOutcome {
    ModelCheckpoint model;
    std::vector<SequentialRound> rounds;
};

// Rounds must have pairwise disjoint forget questions; a round with an empty
// forget set leaves the checkpoint unchanged.
SequentialOutcome unlearn_sequential(const ModelCheckpoint& m, const Vocab& vocab,
                                     const std::vector<CorpusBundle>& rounds, const UnlearnOptions& options);

nlohmann::json to_json(const UnlearnReport& r);

// 16-byte header "LNUV", layer u32, dim u32, count u32, then count * dim f32.
// One direction per file, so count is 1.
void save_uv(const UnlearningVector& uv, const std::filesystem::path& path);
UnlearningVector load_uv(const std::filesystem::path& path);

}  // namespace lunar
