// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "lunar/corpus.hpp"
#include "lunar/errors.hpp"

namespace {

using namespace lunar;
namespace fs = std::filesystem;

const Corpus& default_corpus() {
    static const Corpus c = build_corpus({});
    return c;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("lunar_corpus_" + name); }

TEST(Tokenizer, SplitAndNormalize) {
    EXPECT_EQ(split_words("What's  the Price?"), (std::vector<std::string>{"what", "'", "s", "the", "price", "?"}));
    EXPECT_EQ(normalize_text("  A,b  "), "a , b");
    EXPECT_TRUE(split_words("").empty());
}

TEST(Tokenizer, EncodeContract) {
    const Vocab& v = default_corpus().vocab;
    EXPECT_EQ(v.encode(""), (Tokens{Vocab::kBos, Vocab::kEos}));
    const Tokens t = v.encode(default_corpus().bundle.retain[0].question);
    EXPECT_EQ(std::count(t.begin(), t.end(), Vocab::kUnk), 0);
    const Tokens u = v.encode("zzyzx-unknownword");
    EXPECT_GT(std::count(u.begin(), u.end(), Vocab::kUnk), 0);
    EXPECT_EQ(v.decode(v.encode("the contract")), "the contract");
}

TEST(Tokenizer, VocabRoundTrip) {
    const Vocab& v = default_corpus().vocab;
    const fs::path p = temp_path("vocab.txt");
    v.save(p);
    const Vocab w = Vocab::load(p);
    EXPECT_EQ(w.tokens(), v.tokens());
    std::ofstream(p) << "nope\n";
    EXPECT_THROW(Vocab::load(p), FormatError);
    fs::remove(p);
    EXPECT_THROW(Vocab::load(temp_path("missing-vocab")), IoError);
}

TEST(Corpus, DefaultSplitSizes) {
    const auto& b = default_corpus().bundle;
    EXPECT_EQ(b.forget.size(), 8u);
    EXPECT_EQ(b.retain.size(), 56u);
    EXPECT_FALSE(b.refusal_training.empty());
    EXPECT_FALSE(b.reference.empty());
    EXPECT_FALSE(b.reference_refusal.empty());
    EXPECT_FALSE(b.desired_responses.empty());
    EXPECT_FALSE(b.unrelated_responses.empty());
}

TEST(Corpus, Deterministic) {
    EXPECT_EQ(build_corpus({}).bundle, default_corpus().bundle);
    CorpusSpec other;
    other.seed = 2;
    EXPECT_NE(build_corpus(other).bundle.forget, default_corpus().bundle.forget);
}

TEST(Corpus, Errors) {
    CorpusSpec s;
    s.n_forget_pairs = s.n_entity_pairs;
    EXPECT_THROW(build_corpus(s), ConfigError);
    s = {};
    s.qa_per_pair = 3;
    EXPECT_THROW(build_corpus(s), ConfigError);
    s.qa_per_pair = template_count() + 1;
    EXPECT_THROW(build_corpus(s), ConfigError);
}

TEST(Corpus, TotalPriceIsQuantityTimesUnitPrice) {
    // Every pair carries all three facts when qa_per_pair covers the full table.
    CorpusSpec s;
    s.qa_per_pair = template_count();
    const Corpus c = build_corpus(s);
    std::map<std::string, std::map<std::string, std::string>> facts;
    for (const auto* split : {&c.bundle.forget, &c.bundle.retain}) {
        for (const auto& r : *split) {
            facts[r.entity_pair][r.template_id] = r.answer;
        }
    }
    ASSERT_FALSE(facts.empty());
    for (const auto& [pair, f] : facts) {
        ASSERT_TRUE(f.count("quantity") && f.count("unit_price") && f.count("total_price")) << pair;
        EXPECT_EQ(std::stol(f.at("total_price")), std::stol(f.at("quantity")) * std::stol(f.at("unit_price")))
            << pair;
    }
}

TEST(Corpus, ForgetAndRetainShareTemplates) {
    const auto& b = default_corpus().bundle;
    std::set<std::string> ft, rt;
    for (const auto& r : b.forget) {
        ft.insert(r.template_id);
    }
    for (const auto& r : b.retain) {
        rt.insert(r.template_id);
    }
    std::vector<std::string> both;
    std::set_intersection(ft.begin(), ft.end(), rt.begin(), rt.end(), std::back_inserter(both));
    EXPECT_FALSE(both.empty());
}

TEST(Corpus, NoForgetEntityInRetainAnswers) {
    const auto& b = default_corpus().bundle;
    std::set<std::string> names;
    for (const auto& r : b.forget) {
        for (const auto& w : split_words(r.question)) {
            // Entity names are the words that appear in no retain question.
            bool in_retain = false;
            for (const auto& q : b.retain) {
                const auto ws = split_words(q.question);
                if (std::find(ws.begin(), ws.end(), w) != ws.end()) {
                    in_retain = true;
                    break;
                }
            }
            if (!in_retain) {
                names.insert(w);
            }
        }
    }
    ASSERT_FALSE(names.empty());
    for (const auto& r : b.retain) {
        for (const auto& w : split_words(r.answer)) {
            EXPECT_EQ(names.count(w), 0u) << w << " in " << r.answer;
        }
    }
}

TEST(Corpus, VocabularyClosedOverCorpus) {
    const auto& c = default_corpus();
    auto check = [&](const std::string& s) {
        const Tokens t = c.vocab.encode(s);
        EXPECT_EQ(std::count(t.begin(), t.end(), Vocab::kUnk), 0) << s;
    };
    for (const auto* split : {&c.bundle.forget, &c.bundle.retain, &c.bundle.refusal_training}) {
        for (const auto& r : *split) {
            check(r.question);
            check(r.answer);
        }
    }
    for (const auto& [q, vs] : c.bundle.paraphrases) {
        for (const auto& v : vs) {
            check(v);
        }
    }
    for (const auto& s : c.bundle.reference) {
        check(s);
    }
    for (const auto& s : c.bundle.desired_responses) {
        check(s);
    }
}

TEST(Paraphrase, Examples) {
    const QARecord q{"what was the effective date of the contract between ayik and ktnd ?", "1 - 1 - 2000", "p",
                     "effective_date"};
    const auto v = paraphrase(q, 0);
    ASSERT_GE(v.size(), 2u);
    EXPECT_NE(std::find(v.begin(), v.end(), "when did the contract between ayik and ktnd take effect ?"), v.end());
    EXPECT_EQ(paraphrase(q, 0), v);
    for (const auto& s : v) {
        EXPECT_NE(s, q.question);
        EXPECT_NE(s.find("ayik"), std::string::npos);
        EXPECT_NE(s.find("ktnd"), std::string::npos);
    }
    // A variant paraphrased again maps back onto the other phrasings.
    QARecord v0 = q;
    v0.question = v[0];
    const auto back = paraphrase(v0, 0);
    EXPECT_NE(std::find(back.begin(), back.end(), q.question), back.end());
    EXPECT_EQ(paraphrase(v0, 0), back);
}

TEST(Paraphrase, Errors) {
    QARecord q{"what ?", "x", "p", "no_such_template"};
    EXPECT_THROW(paraphrase(q, 0), ConfigError);
    q.template_id = "effective_date";
    EXPECT_THROW(paraphrase(q, 0), ConfigError);
}

TEST(Paraphrase, EveryCorpusQuestionHasVariants) {
    const auto& b = default_corpus().bundle;
    for (const auto* split : {&b.forget, &b.retain}) {
        for (const auto& r : *split) {
            const auto it = b.paraphrases.find(r.question);
            ASSERT_NE(it, b.paraphrases.end()) << r.question;
            EXPECT_GE(it->second.size(), 2u);
        }
    }
}

TEST(Corpus, JsonlRoundTripSkipsMeta) {
    const auto& b = default_corpus().bundle;
    const fs::path p = temp_path("corpus.jsonl");
    export_corpus_jsonl(b, p, nlohmann::json{{"config_hash", "abc"}, {"seed", 1}});
    EXPECT_EQ(import_corpus_jsonl(p), b);
    std::ofstream(p, std::ios::app) << "{\"split\":\"bogus\",\"question\":\"\",\"answer\":\"\",\"entity_pair\":\"\","
                                       "\"template_id\":\"\"}\n";
    EXPECT_THROW(import_corpus_jsonl(p), FormatError);
    std::ofstream(p) << "{not json\n";
    EXPECT_THROW(import_corpus_jsonl(p), FormatError);
    fs::remove(p);
}

TEST(Corpus, SplitForgetByPair) {
    CorpusSpec s;
    s.n_forget_pairs = 2;
    const Corpus c = build_corpus(s);
    const auto rounds = split_forget_by_pair(c.bundle);
    ASSERT_EQ(rounds.size(), 2u);
    EXPECT_EQ(rounds[0].forget.size() + rounds[1].forget.size(), c.bundle.forget.size());
    EXPECT_NE(rounds[0].forget[0].entity_pair, rounds[1].forget[0].entity_pair);
    EXPECT_EQ(rounds[0].retain, c.bundle.retain);
}

TEST(Corpus, TrainingRecords) {
    const auto& b = default_corpus().bundle;
    const auto plain = training_records(b, false);
    EXPECT_EQ(plain.size(), b.forget.size() + b.retain.size() + b.refusal_training.size());
    const auto para = training_records(b, true);
    EXPECT_EQ(para.size(), plain.size() + 2 * (b.forget.size() + b.retain.size()));
    EXPECT_TRUE(std::equal(plain.begin(), plain.end(), para.begin()));
}

}  // namespace
