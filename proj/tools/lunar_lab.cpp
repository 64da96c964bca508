// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// lunar_lab: experiment runner. Exit 0 on success, 2 on a config error,
// 3 on a runtime failure.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lunar/attacks.hpp"
#include "lunar/config.hpp"
#include "lunar/corpus.hpp"
#include "lunar/cost.hpp"
#include "lunar/errors.hpp"
#include "lunar/metrics.hpp"
#include "lunar/model.hpp"
#include "lunar/parallel.hpp"
#include "lunar/report.hpp"
#include "lunar/unlearn.hpp"

namespace fs = std::filesystem;
using namespace lunar;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
};

struct Context {
    ExperimentConfig cfg;
    Stamp stamp;
    fs::path out;
};

Context make_context(const Common& c) {
    Context ctx;
    if (!c.config_path.empty()) {
        ctx.cfg = load_config(c.config_path);
    }
    if (const char* env = std::getenv("LUNAR_LAB_THREADS"); env && *env) {
        set_config_value(ctx.cfg, "threads", env);
    }
    apply_overrides(ctx.cfg, c.overrides);
    if (!c.out_dir.empty()) {
        set_config_value(ctx.cfg, "out_dir", c.out_dir);
    }
    ctx.stamp = {ctx.cfg.hash(), ctx.cfg.seed};
    ctx.out = ctx.cfg.out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) {
        throw IoError("cannot create output directory " + ctx.out.string() + ": " + ec.message());
    }
    return ctx;
}

// Sidecar for fixed-layout artifacts (checkpoints, vectors, vocabulary).
void write_meta(const Context& ctx, const fs::path& artifact, nlohmann::json extra = nlohmann::json::object()) {
    extra["artifact"] = artifact.filename().string();
    write_json(artifact.string() + ".meta.json", stamped(std::move(extra), ctx.stamp));
}

Corpus load_or_build_corpus(const Context& ctx) {
    const fs::path data = ctx.out / "corpus.jsonl";
    const fs::path vocab = ctx.out / "vocab.txt";
    if (fs::exists(data) && fs::exists(vocab)) {
        return Corpus{import_corpus_jsonl(data), Vocab::load(vocab)};
    }
    return build_corpus(ctx.cfg.corpus_spec());
}

void log(const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); }

void cmd_gen_data(const Context& ctx) {
    const Corpus c = build_corpus(ctx.cfg.corpus_spec());
    const fs::path data = ctx.out / "corpus.jsonl";
    const fs::path vocab = ctx.out / "vocab.txt";
    export_corpus_jsonl(c.bundle, data, stamped(nlohmann::json::object(), ctx.stamp));
    c.vocab.save(vocab);
    write_meta(ctx, vocab, {{"size", c.vocab.size()}});
    log("wrote " + data.string() + " (" + std::to_string(c.bundle.forget.size()) + " forget, " +
        std::to_string(c.bundle.retain.size()) + " retain) and " + vocab.string());
}

void cmd_train(const Context& ctx) {
    const Corpus c = load_or_build_corpus(ctx);
    const ModelConfig mc = ctx.cfg.model_config(static_cast<std::uint32_t>(c.vocab.size()));
    TrainOptions opt = ctx.cfg.train_options();
    opt.on_epoch = [&](std::size_t epoch, double loss) {
        if ((epoch + 1) % 10 == 0 || epoch + 1 == opt.epochs) {
            std::fprintf(stderr, "epoch %zu loss %.6f\n", epoch + 1, loss);
        }
    };
    const auto records = training_records(c.bundle, ctx.cfg.train_paraphrases);
    const TrainResult r = train(init_model(mc), c.vocab, records, opt);

    const fs::path ckpt = ctx.out / "base.lnrm";
    save_checkpoint(r.model, ckpt);
    write_meta(ctx, ckpt);
    std::vector<std::vector<std::string>> rows = {{"epoch", "loss"}};
    char buf[64];
    for (std::size_t i = 0; i < r.loss_curve.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", r.loss_curve[i]);
        rows.push_back({std::to_string(i + 1), buf});
    }
    write_csv(ctx.out / "train_loss.csv", stamp_rows(rows, ctx.stamp));
    nlohmann::json j = {{"records", records.size()},
                        {"epochs", r.loss_curve.size()},
                        {"final_loss", r.loss_curve.empty() ? 0.0 : r.loss_curve.back()},
                        {"answer_token_accuracy", r.answer_token_accuracy},
                        {"diverged", r.diverged},
                        {"checkpoint", ckpt.filename().string()}};
    write_json(ctx.out / "train.json", stamped(j, ctx.stamp));
    if (r.diverged) {
        throw DivergenceError("training diverged; last finite checkpoint written to " + ckpt.string());
    }
    std::fprintf(stderr, "answer-token accuracy %.4f\n", r.answer_token_accuracy);
}

void cmd_unlearn(const Context& ctx, const std::string& checkpoint) {
    const Corpus c = load_or_build_corpus(ctx);
    const fs::path in = checkpoint.empty() ? ctx.out / "base.lnrm" : fs::path(checkpoint);
    const ModelCheckpoint m = load_checkpoint(in);
    const UnlearnOutcome o = unlearn(m, c.vocab, c.bundle, ctx.cfg.unlearn_options());

    const fs::path ckpt = ctx.out / "unlearned.lnrm";
    save_checkpoint(o.model, ckpt);
    write_meta(ctx, ckpt, {{"source", in.filename().string()}});
    nlohmann::json j = to_json(o.report);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& ls : o.report.per_layer) {
        const fs::path uv = ctx.out / ("uv_layer" + std::to_string(ls.uv.layer) + ".bin");
        save_uv(ls.uv, uv);
        write_meta(ctx, uv, {{"layer", ls.uv.layer}});
        files.push_back(uv.filename().string());
    }
    j["uv_files"] = files;
    j["source_checkpoint"] = in.filename().string();
    j["checkpoint"] = ckpt.filename().string();
    write_json(ctx.out / "unlearn_report.json", stamped(j, ctx.stamp));
    std::string chosen;
    for (auto l : o.report.chosen_layers) {
        chosen += " " + std::to_string(l);
    }
    log("unlearned layers:" + chosen);
}

void cmd_eval(const Context& ctx, const std::string& checkpoint, std::string name) {
    const Corpus c = load_or_build_corpus(ctx);
    const fs::path in = checkpoint.empty() ? ctx.out / "unlearned.lnrm" : fs::path(checkpoint);
    if (name.empty()) {
        name = in.stem().string();
    }
    const ModelCheckpoint m = load_checkpoint(in);
    const EvalReport r = evaluate(m, c.vocab, c.bundle, ctx.cfg.eval_options());
    nlohmann::json j = to_json(r);
    j["checkpoint"] = name;
    write_json(ctx.out / ("eval_" + name + ".json"), stamped(j, ctx.stamp));
    write_csv(ctx.out / ("eval_" + name + ".csv"), stamp_rows(eval_csv_rows(r, name), ctx.stamp));
    std::fprintf(stderr, "%s: forget rouge1 %.3f retain rouge1 %.3f DS %.2f CS %.3f\n", name.c_str(),
                 r.forget_rouge1, r.retain_rouge1, r.deviation_score, r.control_score);
}

void cmd_attack(const Context& ctx, const std::string& checkpoint) {
    const Corpus c = load_or_build_corpus(ctx);
    const fs::path in = checkpoint.empty() ? ctx.out / "unlearned.lnrm" : fs::path(checkpoint);
    const ModelCheckpoint m = load_checkpoint(in);
    const nlohmann::json rep = read_json(ctx.out / "unlearn_report.json");
    if (!rep.contains("uv_files") || !rep.contains("chosen_layers")) {
        throw FormatError((ctx.out / "unlearn_report.json").string() + ": missing uv_files or chosen_layers");
    }
    const ExperimentConfig& cfg = ctx.cfg;
    const EvalOptions eo = cfg.eval_options();
    nlohmann::json results = nlohmann::json::array();
    auto add = [&](const AttackResult& r) {
        results.push_back(to_json(r));
        std::fprintf(stderr, "%-16s forget %.3f retain %.3f\n", r.attack_name.c_str(), r.forget_rouge1_post,
                     r.retain_rouge1_post);
    };
    if (cfg.attack_layer_skip) {
        for (const auto& r : layer_skip_sweep(m, c.vocab, c.bundle, eo)) {
            add(r);
        }
    }
    if (cfg.attack_reverse) {
        for (const auto& f : rep["uv_files"]) {
            add(reverse_direction(m, c.vocab, load_uv(ctx.out / f.get<std::string>()), c.bundle, eo));
        }
    }
    if (cfg.attack_quant8) {
        add(quantization_attack(m, c.vocab, 8, c.bundle, eo));
    }
    if (cfg.attack_quant4) {
        add(quantization_attack(m, c.vocab, 4, c.bundle, eo));
    }
    if (cfg.attack_paraphrase) {
        add(paraphrase_attack(m, c.vocab, c.bundle, {1, 2}, eo));
    }
    nlohmann::json j = {{"attacks", results}, {"checkpoint", in.filename().string()}};
    if (cfg.attack_logit_lens && !c.bundle.forget.empty()) {
        std::vector<std::size_t> layers(m.config.n_layers + 1);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            layers[l] = l;
        }
        const auto& q = c.bundle.forget.front().question;
        const auto rows = logit_lens(m, c.vocab, prompt_tokens(c.vocab, q), layers, 5);
        j["logit_lens"] = {{"question", q}, {"rows", to_json(rows)}};
        std::fprintf(stderr, "logit lens: %s\n%s", q.c_str(), format_lens_table(rows).c_str());
    }
    write_json(ctx.out / "attacks.json", stamped(j, ctx.stamp));
}

struct CostFlags {
    std::string preset;
    std::optional<double> n_model, layers, modules, rank, dim, epochs;
};

void cmd_cost(const Context& ctx, const CostFlags& f) {
    CostInputs in = cost_preset(f.preset.empty() ? ctx.cfg.cost_preset : f.preset);
    if (f.n_model) in.n_model = *f.n_model;
    if (f.layers) in.layers = *f.layers;
    if (f.modules) in.modules_per_layer = *f.modules;
    if (f.rank) in.lora_rank = *f.rank;
    if (f.dim) in.module_dim = *f.dim;
    if (f.epochs) in.n_epoch = *f.epochs;
    const CostReport r = estimate(in);
    nlohmann::json j = {{"inputs", to_json(in)}, {"report", to_json(r)},
                        {"preset", f.preset.empty() ? ctx.cfg.cost_preset : f.preset}};
    j = stamped(j, ctx.stamp);
    write_json(ctx.out / "cost.json", j);
    std::cout << json_text(j);
}

std::vector<std::string> summary_row(const std::string& name, double f, double r, const nlohmann::json* ev) {
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };
    std::vector<std::string> row = {name, num(f), num(r), num(deviation_score(f, r))};
    for (const char* k : {"forget_mrr", "retain_mrr", "forget_thr", "retain_thr", "control_score"}) {
        row.push_back(ev ? num((*ev)[k].get<double>()) : "");
    }
    return row;
}

void cmd_report(const Context& ctx) {
    nlohmann::json merged = nlohmann::json::object();
    std::vector<std::vector<std::string>> rows = {{"condition", "forget_rouge1", "retain_rouge1", "deviation_score",
                                                   "forget_mrr", "retain_mrr", "forget_thr", "retain_thr",
                                                   "control_score"}};
    std::vector<fs::path> evals;
    for (const auto& e : fs::directory_iterator(ctx.out)) {
        const std::string n = e.path().filename().string();
        if (n.rfind("eval_", 0) == 0 && e.path().extension() == ".json") {
            evals.push_back(e.path());
        }
    }
    std::sort(evals.begin(), evals.end());
    nlohmann::json ev_all = nlohmann::json::object();
    for (const auto& p : evals) {
        nlohmann::json ev = read_json(p);
        const std::string name = ev.value("checkpoint", p.stem().string());
        rows.push_back(summary_row(name, ev["forget_rouge1"], ev["retain_rouge1"], &ev));
        ev.erase("records");
        ev_all[name] = ev;
    }
    merged["eval"] = ev_all;
    for (const char* f : {"train.json", "unlearn_report.json", "cost.json"}) {
        if (fs::exists(ctx.out / f)) {
            merged[fs::path(f).stem().string()] = read_json(ctx.out / f);
        }
    }
    if (fs::exists(ctx.out / "attacks.json")) {
        const nlohmann::json a = read_json(ctx.out / "attacks.json");
        merged["attacks"] = a;
        for (const auto& r : a["attacks"]) {
            rows.push_back(summary_row("attack:" + r["attack_name"].get<std::string>(), r["forget_rouge1_post"],
                                       r["retain_rouge1_post"], nullptr));
        }
    }
    if (rows.size() == 1 && merged.size() == 1 && ev_all.empty()) {
        throw IoError("no artifacts to report in " + ctx.out.string());
    }
    write_json(ctx.out / "report.json", stamped(merged, ctx.stamp));
    write_csv(ctx.out / "summary.csv", stamp_rows(rows, ctx.stamp));
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t i = 0; i < 4; ++i) {
            line += (i ? "  " : "") + r[i];
        }
        log(line);
    }
}

void cmd_pipeline(const Context& ctx) {
    cmd_gen_data(ctx);
    cmd_train(ctx);
    cmd_eval(ctx, (ctx.out / "base.lnrm").string(), "base");
    cmd_unlearn(ctx, "");
    cmd_eval(ctx, (ctx.out / "unlearned.lnrm").string(), "unlearned");
    cmd_attack(ctx, "");
    CostFlags f;
    cmd_cost(ctx, f);
    cmd_report(ctx);
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("-c,--config", c.config_path, "key = value config file");
    sub->add_option("-s,--set", c.overrides, "override, key=value (repeatable)");
    sub->add_option("-o,--out", c.out_dir, "output directory (out_dir)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lunar_lab: unlearning by activation redirection on a toy transformer"};
    app.require_subcommand(1);
    Common common;
    std::string checkpoint;
    std::string name;
    CostFlags cost;

    auto* gen = app.add_subcommand("gen-data", "write corpus.jsonl and vocab.txt");
    auto* trn = app.add_subcommand("train", "train the base model (base.lnrm, train_loss.csv)");
    auto* unl = app.add_subcommand("unlearn", "unlearn the forget set (unlearned.lnrm, unlearn_report.json)");
    auto* evl = app.add_subcommand("eval", "evaluate a checkpoint (eval_<name>.json/.csv)");
    auto* att = app.add_subcommand("attack", "run the attack suite (attacks.json)");
    auto* cst = app.add_subcommand("cost", "analytical cost comparison (cost.json)");
    auto* rep = app.add_subcommand("report", "merge artifacts (report.json, summary.csv)");
    auto* all = app.add_subcommand("pipeline", "gen-data, train, eval, unlearn, eval, attack, cost, report");
    for (auto* s : {gen, trn, unl, evl, att, cst, rep, all}) {
        add_common(s, common);
    }
    for (auto* s : {unl, evl, att}) {
        s->add_option("--checkpoint", checkpoint, "input checkpoint");
    }
    evl->add_option("--name", name, "label for the output files (default: checkpoint stem)");
    cst->add_option("--preset", cost.preset, "llama2-7b or toy (default: cost_preset key)");
    cst->add_option("--n-model", cost.n_model, "total parameters");
    cst->add_option("--layers", cost.layers, "layer count");
    cst->add_option("--modules", cost.modules, "adapted modules per layer");
    cst->add_option("--rank", cost.rank, "adapter rank");
    cst->add_option("--dim", cost.dim, "module dimension");
    cst->add_option("--epochs", cost.epochs, "epochs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const Context ctx = make_context(common);
        if (gen->parsed()) cmd_gen_data(ctx);
        if (trn->parsed()) cmd_train(ctx);
        if (unl->parsed()) cmd_unlearn(ctx, checkpoint);
        if (evl->parsed()) cmd_eval(ctx, checkpoint, name);
        if (att->parsed()) cmd_attack(ctx, checkpoint);
        if (cst->parsed()) cmd_cost(ctx, cost);
        if (rep->parsed()) cmd_report(ctx);
        if (all->parsed()) cmd_pipeline(ctx);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
