#include <gtest/gtest.h>

#include "semlink/metrics.hpp"
#include "semlink/rng.hpp"
#include "test_support.hpp"

using namespace semlink;
using testsupport::words;

namespace {

using Toks = std::vector<std::string>;

// Brute-force BLEU: enumerate every n-gram position pair, no hashing.
double oracle_bleu(const Toks& ref, const Toks& hyp) {
    double log_sum = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        std::vector<Toks> hg, rg;
        for (std::size_t i = 0; i + n <= hyp.size(); ++i) hg.emplace_back(hyp.begin() + i, hyp.begin() + i + n);
        for (std::size_t i = 0; i + n <= ref.size(); ++i) rg.emplace_back(ref.begin() + i, ref.begin() + i + n);
        // clipped matches: greedily consume reference occurrences
        std::vector<bool> used(rg.size(), false);
        long matched = 0;
        for (const auto& g : hg)
            for (std::size_t j = 0; j < rg.size(); ++j)
                if (!used[j] && rg[j] == g) {
                    used[j] = true;
                    ++matched;
                    break;
                }
        const long total = static_cast<long>(hg.size());
        if (n == 1) {
            if (matched == 0) return 0.0;
            log_sum += std::log(static_cast<double>(matched) / total);
        } else {
            log_sum += std::log(static_cast<double>(matched + 1) / (total + 1));
        }
    }
    const double bp = hyp.size() >= ref.size() ? 1.0 : std::exp(1.0 - static_cast<double>(ref.size()) / hyp.size());
    return bp * std::exp(log_sum / 4.0);
}

Toks random_sentence(Rng& rng, std::size_t max_len, std::size_t alphabet) {
    Toks t(1 + uniform_index(rng, max_len));
    for (auto& w : t) w = std::string(1, static_cast<char>('a' + uniform_index(rng, alphabet)));
    return t;
}

SentenceResult R(double snr, Method m, int err, double b) { return {snr, m, 1, err, b}; }

} // namespace

TEST(SentenceError, ExactMatchSemantics) {
    EXPECT_EQ(sentence_error(words(testsupport::kMessage), words(testsupport::kMessage)), 0);
    EXPECT_EQ(sentence_error(words(testsupport::kMessage), words(testsupport::kMessageSc)), 1);
    EXPECT_EQ(sentence_error(words("a b c d"), words("b a c d")), 1);
    // received exhibits against their references
    EXPECT_EQ(sentence_error(words(testsupport::kBudget), words(testsupport::kBudgetSc)), 1);
    EXPECT_EQ(sentence_error(words(testsupport::kBudget), words(testsupport::kBudgetGpt)), 1);
    EXPECT_EQ(sentence_error(words(testsupport::kMessage), words(testsupport::kMessageGpt)), 1);
    EXPECT_EQ(sentence_error(words(testsupport::kEfforts), words(testsupport::kEffortsSc)), 1);
    EXPECT_EQ(sentence_error(words(testsupport::kEfforts), words(testsupport::kEffortsGpt)), 1);
}

TEST(Bleu, PerfectMatchIsOne) {
    for (const auto* s : {"a b c d", "the debate is closed", testsupport::kEfforts.c_str()})
        EXPECT_DOUBLE_EQ(bleu(words(s), words(s)), 1.0);
}

TEST(Bleu, HandEnumeratedExample) {
    // p1 = 3/4, p2 = (2+1)/(3+1), p3 = (1+1)/(2+1), p4 = (0+1)/(1+1), BP = 1
    const double want = std::exp((std::log(0.75) + std::log(0.75) + std::log(2.0 / 3.0) + std::log(0.5)) / 4.0);
    EXPECT_NEAR(bleu(words("a b c d"), words("a b c e")), want, 1e-15);
    EXPECT_NEAR(oracle_bleu({"a", "b", "c", "d"}, {"a", "b", "c", "e"}), want, 1e-15);
}

TEST(Bleu, DisjointIsZero) {
    EXPECT_EQ(bleu(words("a b c d"), words("e f g h")), 0.0);
    EXPECT_EQ(oracle_bleu({"a", "b", "c", "d"}, {"e", "f", "g", "h"}), 0.0);
}

TEST(Bleu, MatchesBruteForceOracle) {
    Rng rng(500);
    for (int i = 0; i < 500; ++i) {
        const auto ref = random_sentence(rng, 8, 5);
        const auto hyp = random_sentence(rng, 8, 5);
        EXPECT_NEAR(bleu(ref, hyp), oracle_bleu(ref, hyp), 1e-12);
    }
}

TEST(Bleu, BoundsAndExactMatchEquivalence) {
    Rng rng(501);
    for (int i = 0; i < 2000; ++i) {
        const auto ref = random_sentence(rng, 6, 3);
        auto hyp = ref;
        if (uniform_index(rng, 2)) hyp = random_sentence(rng, 6, 3);
        const double b = bleu(ref, hyp);
        EXPECT_GE(b, 0.0);
        EXPECT_LE(b, 1.0);
        if (hyp.size() == ref.size()) {
            EXPECT_EQ(b == 1.0, hyp == ref);
        }
        if (sentence_error(ref, hyp) == 0) {
            EXPECT_EQ(b, 1.0);
        }
    }
}

TEST(Bleu, ExhibitsRankAsExpected) {
    // a one-word substitution scores above a rewritten tail
    const auto ref = words(testsupport::kMessage);
    EXPECT_GT(bleu(ref, words(testsupport::kMessageSc)), bleu(ref, words(testsupport::kMessageGpt)));
}

TEST(Aggregate, Means) {
    std::vector<SentenceResult> rows = {R(4, Method::sc, 0, 1.0), R(4, Method::sc, 0, 1.0)};
    auto r = aggregate(rows);
    EXPECT_EQ(r.ser, 0.0);
    EXPECT_EQ(r.bleu, 1.0);
    rows = {R(4, Method::sc, 1, 0.2), R(4, Method::sc, 0, 1.0), R(4, Method::sc, 1, 0.6), R(4, Method::sc, 0, 1.0)};
    r = aggregate(rows);
    EXPECT_DOUBLE_EQ(r.ser, 0.5);
    EXPECT_DOUBLE_EQ(r.bleu, 0.7);
    EXPECT_EQ(r.n_sentences, 4u);
    EXPECT_NEAR(r.ser_stderr, std::sqrt(0.25 / 3.0), 1e-15);
}

TEST(Aggregate, HeterogeneousBatch) {
    std::vector<SentenceResult> rows = {R(4, Method::sc, 0, 1.0), R(6, Method::sc, 0, 1.0)};
    try {
        aggregate(rows);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::heterogeneous_batch);
    }
}

TEST(Csv, RoundTripAndFormat) {
    testsupport::TempDir dir;
    EvalRow a{0, Method::sc, 1000, 0.5, 0.25, 1};
    EvalRow b{12.5, Method::sc_gpt_adaptive, 1000, 0.0125, 0.987654321, 1};
    write_csv(dir.file("r.csv"), std::vector<EvalRow>{a, b});
    std::ifstream in(dir.file("r.csv"));
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "snr_db,method,n,ser,bleu,seed\n0,sc,1000,0.500000,0.250000,1\n"
                        "12.5,sc_gpt_adaptive,1000,0.012500,0.987654,1\n");
    const auto back = read_csv(dir.file("r.csv"));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].method, Method::sc_gpt_adaptive);
    EXPECT_DOUBLE_EQ(back[1].snr_db, 12.5);
}

TEST(SignTest, MatchesBinomialTail) {
    // P[X >= 5 | n = 5] = 1/32; P[X >= 4 | n = 6] = (15 + 6 + 1)/64
    EXPECT_NEAR(sign_test_pvalue(5, 0), 1.0 / 32.0, 1e-12);
    EXPECT_NEAR(sign_test_pvalue(4, 2), 22.0 / 64.0, 1e-12);
    EXPECT_EQ(sign_test_pvalue(0, 0), 1.0);
    EXPECT_NEAR(sign_test_pvalue(0, 3), 1.0, 1e-12);
}

TEST(Methods, ParseAndPrint) {
    for (auto m : {Method::sc, Method::sc_gpt, Method::sc_gpt_prompt, Method::sc_gpt_adaptive})
        EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_FALSE(parse_method("gpt").has_value());
}
