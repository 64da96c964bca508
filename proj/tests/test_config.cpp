// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "lunar/config.hpp"
#include "lunar/errors.hpp"
#include "lunar/report.hpp"

namespace {

using namespace lunar;
namespace fs = std::filesystem;

TEST(Config, ParseCommentsAndValues) {
    const ExperimentConfig c = parse_config(
        "# header\n"
        "seed = 7   # trailing\n"
        "\n"
        "layers = 2, 3\n"
        "lambda = 0.5\n"
        "retain_ratio = all\n"
        "solver = sgd\n"
        "train_paraphrases = false\n");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.layers, (std::vector<std::size_t>{2, 3}));
    ASSERT_TRUE(c.lambda.has_value());
    EXPECT_DOUBLE_EQ(*c.lambda, 0.5);
    EXPECT_FALSE(c.retain_ratio.has_value());
    EXPECT_EQ(c.solver, SolverKind::Sgd);
    EXPECT_FALSE(c.train_paraphrases);
    EXPECT_EQ(c.unlearn_options().layers, c.layers);
}

TEST(Config, Errors) {
    try {
        parse_config("seed = 1\nbogus = 2\n", "x.conf");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("x.conf:2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
    }
    EXPECT_THROW(parse_config("seed = 1\nseed = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("seed 1\n"), ConfigError);
    EXPECT_THROW(parse_config("seed = -1\n"), ConfigError);
    EXPECT_THROW(parse_config("train_lr = abc\n"), ConfigError);
    EXPECT_THROW(parse_config("train_lr = inf\n"), ConfigError);
    EXPECT_THROW(parse_config("layers = 1,,2\n"), ConfigError);
    EXPECT_THROW(parse_config("solver = adam\n"), ConfigError);
    EXPECT_THROW(parse_config("attack_reverse = maybe\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/lunar.conf"), IoError);
}

TEST(Config, Overrides) {
    ExperimentConfig c;
    apply_overrides(c, {"seed=3", "top_k = 2", "sgd_lr=auto"});
    EXPECT_EQ(c.seed, 3u);
    EXPECT_EQ(c.top_k, 2u);
    EXPECT_FALSE(c.sgd_lr.has_value());
    EXPECT_THROW(apply_overrides(c, {"seed"}), ConfigError);
    EXPECT_THROW(apply_overrides(c, {"nope=1"}), ConfigError);
}

TEST(Config, CanonicalRoundTrip) {
    ExperimentConfig c;
    apply_overrides(c, {"seed=11", "layers=1,4", "lambda=0.001", "retain_ratio=2", "uv_positions=prompt_all"});
    const std::string text = c.canonical();
    const ExperimentConfig back = parse_config(text);
    EXPECT_EQ(back.canonical(), text);
    EXPECT_EQ(back.hash(), c.hash());
    for (const auto& k : config_keys()) {
        EXPECT_EQ(get_config_value(back, k), get_config_value(c, k)) << k;
    }
    // canonical lines are key-sorted
    std::vector<std::string> keys;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        keys.push_back(text.substr(pos, text.find(' ', pos) - pos));
        pos = nl + 1;
    }
    EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
    EXPECT_EQ(keys.size(), config_keys().size());
}

TEST(Config, HashStability) {
    ExperimentConfig a, b;
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    b.out_dir = "/elsewhere";
    EXPECT_EQ(a.hash(), b.hash());
    b.seed = a.seed + 1;
    EXPECT_NE(a.hash(), b.hash());
    // FNV-1a 64 reference values.
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Config, DefaultFileMatchesDefaults) {
    const fs::path p = fs::path(LUNAR_SOURCE_DIR) / "configs" / "default.conf";
    ASSERT_TRUE(fs::exists(p));
    EXPECT_EQ(load_config(p).canonical(), ExperimentConfig{}.canonical());
}

TEST(Report, CsvQuoting) {
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
    EXPECT_EQ(csv_text({{"h1", "h2"}, {"1", "x,y"}}), "h1,h2\r\n1,\"x,y\"\r\n");
    const auto rows = stamp_rows({{"a"}, {"1"}}, Stamp{"abcd", 5});
    EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "config_hash", "seed"}));
    EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "abcd", "5"}));
}

TEST(Report, JsonSortedAndStamped) {
    nlohmann::json j;
    j["zeta"] = 1;
    j["alpha"] = 2;
    const std::string s = json_text(stamped(j, Stamp{"ff", 3}));
    EXPECT_LT(s.find("alpha"), s.find("config_hash"));
    EXPECT_LT(s.find("config_hash"), s.find("seed"));
    EXPECT_LT(s.find("seed"), s.find("zeta"));
    EXPECT_EQ(s.back(), '\n');
    const fs::path p = fs::temp_directory_path() / "lunar_report.json";
    write_json(p, j);
    EXPECT_EQ(read_json(p), j);
    std::ofstream(p) << "{broken";
    EXPECT_THROW(read_json(p), FormatError);
    fs::remove(p);
    EXPECT_THROW(write_text("/nonexistent/dir/x.txt", "x"), IoError);
}

}  // namespace
