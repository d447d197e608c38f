// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "uprobe/metrics.hpp"

using namespace uprobe;
using namespace uprobe::metrics;

namespace {

using Words = std::vector<std::string>;

/// Exhaustive subsequence oracle: enumerates every subsequence of the
/// shorter sequence by bitmask and keeps the longest that is also a
/// subsequence of the other. Independent of the DP implementation.
std::size_t lcs_oracle(Words a, Words b) {
    if (a.size() > b.size()) std::swap(a, b);
    const std::size_t n = a.size();
    std::size_t best = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        Words sub;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) sub.push_back(a[i]);
        if (sub.size() <= best) continue;
        std::size_t j = 0;
        for (const std::string& w : b) {
            if (j < sub.size() && w == sub[j]) ++j;
        }
        if (j == sub.size()) best = sub.size();
    }
    return best;
}

std::vector<Words> all_sequences_up_to(std::size_t max_len, const Words& alphabet) {
    std::vector<Words> out{{}};
    std::vector<Words> frontier{{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<Words> next;
        for (const Words& seq : frontier) {
            for (const std::string& s : alphabet) {
                Words grown = seq;
                grown.push_back(s);
                next.push_back(grown);
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

Words random_sequence(std::mt19937& rng, std::size_t max_len, const Words& alphabet) {
    std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
    std::uniform_int_distribution<std::size_t> sym(0, alphabet.size() - 1);
    Words out(len_dist(rng));
    for (auto& w : out) w = alphabet[sym(rng)];
    return out;
}

TEST(LcsLength, HandCheckedExamples) {
    EXPECT_EQ(lcs_length(Words{"the", "cat", "sat"}, Words{"the", "dog", "sat"}), 2u);
    EXPECT_EQ(lcs_oracle({"the", "cat", "sat"}, {"the", "dog", "sat"}), 2u);
    const Words x{"a", "b", "c", "a"};
    EXPECT_EQ(lcs_length(x, x), x.size());
    EXPECT_EQ(lcs_length(x, {}), 0u);
    EXPECT_EQ(lcs_length({}, x), 0u);
}

TEST(LcsLength, MatchesOracleExhaustivelyOnShortSequences) {
    const Words alphabet{"x", "y", "z"};
    const auto seqs = all_sequences_up_to(4, alphabet);
    for (const Words& a : seqs) {
        for (const Words& b : seqs) {
            ASSERT_EQ(lcs_length(a, b), lcs_oracle(a, b));
        }
    }
}

TEST(LcsLength, MatchesOracleOnRandomPairs) {
    const Words alphabet{"x", "y", "z"};
    std::mt19937 rng(404);
    for (int trial = 0; trial < 500; ++trial) {
        const Words a = random_sequence(rng, 12, alphabet);
        const Words b = random_sequence(rng, 12, alphabet);
        ASSERT_EQ(lcs_length(a, b), lcs_oracle(a, b));
    }
}

TEST(LcsLength, SymmetricAndBounded) {
    const Words alphabet{"x", "y", "z"};
    std::mt19937 rng(405);
    for (int trial = 0; trial < 200; ++trial) {
        const Words a = random_sequence(rng, 12, alphabet);
        const Words b = random_sequence(rng, 12, alphabet);
        const std::size_t l = lcs_length(a, b);
        EXPECT_EQ(l, lcs_length(b, a));
        EXPECT_LE(l, std::min(a.size(), b.size()));
    }
}

TEST(NormalizeWords, LowercasesAndSplitsOnNonAlnum) {
    EXPECT_EQ(normalize_words("The cat sat."), (Words{"the", "cat", "sat"}));
    EXPECT_EQ(normalize_words("A-B  c,,d!"), (Words{"a", "b", "c", "d"}));
    EXPECT_EQ(normalize_words("room 42"), (Words{"room", "42"}));
    EXPECT_EQ(normalize_words("...!?"), Words{});
    EXPECT_EQ(normalize_words(""), Words{});
}

TEST(RougeLRecall, NormalizationIdentity) {
    EXPECT_DOUBLE_EQ(rouge_l_recall("The cat sat.", "the cat sat"), 1.0);
}

TEST(RougeLRecall, PartialOverlap) {
    EXPECT_DOUBLE_EQ(rouge_l_recall("the cat sat", "the dog sat"), 2.0 / 3.0);
}

TEST(RougeLRecall, EmptyCandidateScoresZero) {
    EXPECT_DOUBLE_EQ(rouge_l_recall("a b", ""), 0.0);
    EXPECT_DOUBLE_EQ(rouge_l_recall("a b", "!!"), 0.0);
}

TEST(RougeLRecall, EmptyReferenceRejected) {
    try {
        rouge_l_recall("", "anything");
        FAIL() << "expected empty_reference";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), errc::empty_reference);
    }
    EXPECT_THROW(rouge_l_recall("?!", "anything"), Error);
}

TEST(RougeLRecall, SelfRecallIsOneAndRangeHolds) {
    std::mt19937 rng(406);
    const Words alphabet{"alpha", "beta", "gamma", "delta"};
    for (int trial = 0; trial < 100; ++trial) {
        Words ws = random_sequence(rng, 10, alphabet);
        if (ws.empty()) ws.push_back("alpha");
        std::string text;
        for (std::size_t i = 0; i < ws.size(); ++i) text += (i ? " " : "") + ws[i];
        EXPECT_DOUBLE_EQ(rouge_l_recall(text, text), 1.0);
        const std::string other = "beta gamma";
        const double r = rouge_l_recall(text, other);
        EXPECT_GE(r, 0.0);
        EXPECT_LE(r, 1.0);
    }
}

ScoreSet scores_of(std::vector<double> values) {
    ScoreSet s;
    s.method = Method::guided;
    for (std::size_t i = 0; i < values.size(); ++i)
        s.per_record["r" + std::to_string(i)] = values[i];
    return s;
}

TEST(AEsr, CountsRecordsMeetingThreshold) {
    const ScoreSet s = scores_of({1.0, 0.95, 0.5});
    EXPECT_DOUBLE_EQ(a_esr(s, 0.9), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(a_esr(s, 1.0), 1.0 / 3.0);
}

TEST(AEsr, AllPerfectScoresAtExactMatchThreshold) {
    EXPECT_DOUBLE_EQ(a_esr(scores_of({1.0, 1.0, 1.0}), 1.0), 1.0);
}

TEST(AEsr, ExactMatchThresholdCountsOnlyFullRecall) {
    const ScoreSet s = scores_of({1.0, 0.999, 0.9});
    EXPECT_DOUBLE_EQ(a_esr(s, 1.0), 1.0 / 3.0);
}

TEST(AEsr, MonotoneNonIncreasingInTau) {
    std::mt19937 rng(407);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values(1 + rng() % 20);
        for (auto& v : values) v = unit(rng);
        const ScoreSet s = scores_of(values);
        double prev = 1.0;
        for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            const double cur = a_esr(s, tau);
            EXPECT_LE(cur, prev);
            prev = cur;
            // the rate times the record count is an integral hit count
            const double scaled = cur * static_cast<double>(values.size());
            EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
        }
    }
}

TEST(AEsr, EmptyAndInvalidInputsRejected) {
    EXPECT_THROW(a_esr(ScoreSet{}, 0.9), Error);
    EXPECT_THROW(a_esr(scores_of({0.5}), 0.0), Error);
    EXPECT_THROW(a_esr(scores_of({0.5}), 1.5), Error);
}

}  // namespace
