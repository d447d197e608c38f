#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

/**
 * @file metrics.hpp
 * @brief Extraction scoring: LCS-based recall and success-rate thresholds.
 */

#include <algorithm>
#include <cctype>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uprobe/errors.hpp"
#include "uprobe/types.hpp"

namespace uprobe::metrics {

/// Length of the longest common subsequence of two word sequences.
inline std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Pinned word normalization: ASCII lowercase, split on every maximal run of
/// non-alphanumeric bytes. Keeps scores bit-reproducible across platforms.
inline std::vector<std::string> normalize_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

/// LCS recall of the reference covered by the candidate, in [0, 1].
/// The reference must normalize to at least one word.
inline double rouge_l_recall(std::string_view reference, std::string_view candidate) {
    const std::vector<std::string> ref = normalize_words(reference);
    if (ref.empty()) raise(errc::empty_reference, "reference has no words after normalization");
    const std::vector<std::string> cand = normalize_words(candidate);
    if (cand.empty()) return 0.0;
    return static_cast<double>(lcs_length(ref, cand)) / static_cast<double>(ref.size());
}

/// Per-record recall scores for one decoding method.
struct ScoreSet {
    Method method = Method::guided;
    std::map<std::string, double> per_record;  // record id -> recall in [0, 1]
};

/// Fraction of records whose recall meets the threshold tau.
inline double a_esr(const ScoreSet& scores, double tau) {
    if (scores.per_record.empty()) raise(errc::empty_scores, "no scores to aggregate");
    if (!(tau > 0.0 && tau <= 1.0))
        raise(errc::out_of_range, "tau must be in (0, 1] (got " + std::to_string(tau) + ")");
    std::size_t hits = 0;
    for (const auto& [_, r] : scores.per_record)
        if (r >= tau) ++hits;
    return static_cast<double>(hits) / static_cast<double>(scores.per_record.size());
}

}  // namespace uprobe::metrics
