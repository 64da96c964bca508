// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "lunar/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "lunar/errors.hpp"

namespace lunar {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what + " (got '" + value + "')");
}

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
        bad(key, v, "expected a non-negative integer");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
        bad(key, v, "expected a finite number");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    bad(key, v, "expected true or false");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    if (v.empty()) {
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = v.find(',', start);
        const std::string item = trim(v.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        out.push_back(parse_uint<std::size_t>(key, item));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string fmt_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fmt_list(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) {
            s += ",";
        }
        s += std::to_string(v[i]);
    }
    return s;
}

std::string fmt_opt(const std::optional<double>& v, const char* none) { return v ? fmt_real(*v) : none; }

std::optional<double> parse_opt(const std::string& key, const std::string& v, const char* none) {
    if (v == none) {
        return std::nullopt;
    }
    return parse_real(key, v);
}

struct Field {
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field uint_field(T ExperimentConfig::*member) {
    return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = parse_uint<T>(k, v);
            },
            [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(double ExperimentConfig::*member) {
    return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = parse_real(k, v);
            },
            [member](const ExperimentConfig& c) { return fmt_real(c.*member); }};
}

Field bool_field(bool ExperimentConfig::*member) {
    return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = parse_bool(k, v);
            },
            [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field list_field(std::vector<std::size_t> ExperimentConfig::*member) {
    return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = parse_list(k, v);
            },
            [member](const ExperimentConfig& c) { return fmt_list(c.*member); }};
}

Field opt_field(std::optional<double> ExperimentConfig::*member, const char* none) {
    return {[member, none](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = parse_opt(k, v, none);
            },
            [member, none](const ExperimentConfig& c) { return fmt_opt(c.*member, none); }};
}

template <typename E>
Field enum_field(E ExperimentConfig::*member, E (*parse)(std::string_view)) {
    return {[member, parse](ExperimentConfig& c, const std::string& k, const std::string& v) {
                try {
                    c.*member = parse(v);
                } catch (const ConfigError& e) {
                    throw ConfigError("config key '" + k + "': " + e.what());
                }
            },
            [member](const ExperimentConfig& c) { return to_string(c.*member); }};
}

const std::map<std::string, Field>& fields() {
    using C = ExperimentConfig;
    static const std::map<std::string, Field> table = {
        {"seed", uint_field(&C::seed)},
        {"threads", uint_field(&C::threads)},
        {"out_dir",
         {[](C& c, const std::string& k, const std::string& v) {
              if (v.empty()) {
                  bad(k, v, "must not be empty");
              }
              c.out_dir = v;
          },
          [](const C& c) { return c.out_dir; }}},
        {"d_model", uint_field(&C::d_model)},
        {"n_layers", uint_field(&C::n_layers)},
        {"n_heads", uint_field(&C::n_heads)},
        {"d_mlp", uint_field(&C::d_mlp)},
        {"max_seq_len", uint_field(&C::max_seq_len)},
        {"n_entity_pairs", uint_field(&C::n_entity_pairs)},
        {"qa_per_pair", uint_field(&C::qa_per_pair)},
        {"n_forget_pairs", uint_field(&C::n_forget_pairs)},
        {"n_heldout_pairs", uint_field(&C::n_heldout_pairs)},
        {"train_epochs", uint_field(&C::train_epochs)},
        {"train_lr", real_field(&C::train_lr)},
        {"train_batch", uint_field(&C::train_batch)},
        {"train_momentum", real_field(&C::train_momentum)},
        {"train_clip_norm", real_field(&C::train_clip_norm)},
        {"train_paraphrases", bool_field(&C::train_paraphrases)},
        {"layers", list_field(&C::layers)},
        {"top_k", uint_field(&C::top_k)},
        {"top_k_cumulative", bool_field(&C::top_k_cumulative)},
        {"candidates", list_field(&C::candidates)},
        {"solver", enum_field(&C::solver, &parse_solver)},
        {"lambda", opt_field(&C::lambda, "auto")},
        {"sgd_epochs", uint_field(&C::sgd_epochs)},
        {"sgd_lr", opt_field(&C::sgd_lr, "auto")},
        {"sgd_batch", uint_field(&C::sgd_batch)},
        {"uv_positions", enum_field(&C::uv_positions, &parse_uv_positions)},
        {"target_positions", enum_field(&C::target_positions, &parse_target_positions)},
        {"retain_ratio", opt_field(&C::retain_ratio, "all")},
        {"reference", enum_field(&C::reference, &parse_reference_class)},
        {"max_new_tokens", uint_field(&C::max_new_tokens)},
        {"top_m", uint_field(&C::top_m)},
        {"attack_layer_skip", bool_field(&C::attack_layer_skip)},
        {"attack_reverse", bool_field(&C::attack_reverse)},
        {"attack_quant8", bool_field(&C::attack_quant8)},
        {"attack_quant4", bool_field(&C::attack_quant4)},
        {"attack_paraphrase", bool_field(&C::attack_paraphrase)},
        {"attack_logit_lens", bool_field(&C::attack_logit_lens)},
        {"cost_preset",
         {[](C& c, const std::string&, const std::string& v) { c.cost_preset = v; },
          [](const C& c) { return c.cost_preset; }}},
    };
    return table;
}

const Field& field(const std::string& key) {
    auto it = fields().find(key);
    if (it == fields().end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    return it->second;
}

std::uint32_t narrow32(std::size_t v, const char* key) {
    if (v > 0xffffffffu) {
        throw ConfigError(std::string("config key '") + key + "': value too large");
    }
    return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, f] : fields()) {
        keys.push_back(k);
    }
    return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    field(key).set(cfg, key, value);
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) { return field(key).get(cfg); }

std::string ExperimentConfig::canonical() const {
    std::string out;
    for (const auto& [k, f] : fields()) {
        const std::string v = f.get(*this);
        out += k + (v.empty() ? " =\n" : " = " + v + "\n");
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string ExperimentConfig::hash() const {
    std::string text;
    for (const auto& [k, f] : fields()) {
        if (k != "out_dir") {
            text += k + "=" + f.get(*this) + "\n";
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

CorpusSpec ExperimentConfig::corpus_spec() const {
    CorpusSpec s;
    s.seed = seed;
    s.n_entity_pairs = n_entity_pairs;
    s.qa_per_pair = qa_per_pair;
    s.n_forget_pairs = n_forget_pairs;
    s.n_heldout_pairs = n_heldout_pairs;
    return s;
}

ModelConfig ExperimentConfig::model_config(std::uint32_t vocab_size) const {
    ModelConfig m;
    m.d_model = d_model;
    m.n_layers = n_layers;
    m.n_heads = n_heads;
    m.d_mlp = d_mlp;
    m.vocab_size = vocab_size;
    m.max_seq_len = max_seq_len;
    m.seed = narrow32(seed, "seed");
    m.validate();
    return m;
}

TrainOptions ExperimentConfig::train_options() const {
    TrainOptions o;
    o.epochs = train_epochs;
    o.lr = static_cast<float>(train_lr);
    o.batch = train_batch;
    o.momentum = static_cast<float>(train_momentum);
    o.clip_norm = static_cast<float>(train_clip_norm);
    o.seed = seed;
    return o;
}

UnlearnOptions ExperimentConfig::unlearn_options() const {
    UnlearnOptions o;
    o.layers = layers;
    o.top_k = top_k;
    o.cumulative = top_k_cumulative;
    o.candidates = candidates;
    o.solver = solver;
    o.sgd.epochs = sgd_epochs;
    o.sgd.lr = sgd_lr;
    o.sgd.batch = sgd_batch;
    o.sgd.seed = seed;
    o.problem.lambda = lambda;
    o.problem.positions = target_positions;
    o.problem.retain_ratio = retain_ratio;
    o.problem.seed = seed;
    o.uv_positions = uv_positions;
    o.reference = reference;
    o.max_new_tokens = max_new_tokens;
    o.threads = threads;
    return o;
}

EvalOptions ExperimentConfig::eval_options() const {
    EvalOptions o;
    o.top_m = top_m;
    o.max_new_tokens = max_new_tokens;
    o.threads = threads;
    return o;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto eq = t.find('=');
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) {
            throw ConfigError(where + "expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ConfigError(where + "duplicate config key '" + key + "'");
        }
        try {
            set_config_value(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot read config file " + path.string());
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path.string());
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + o + "': expected key=value");
        }
        set_config_value(cfg, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
    }
}

}  // namespace lunar
