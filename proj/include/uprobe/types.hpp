#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

/**
 * @file types.hpp
 * @brief Shared value types for the extraction toolkit.
 *
 * Everything here is an immutable value after construction and safe to share
 * across threads.
 */

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uprobe/errors.hpp"
#include "uprobe/util.hpp"

namespace uprobe {

/// Index into a provider vocabulary. Valid ids are in [0, vocab_size).
using TokenId = std::int32_t;

/// Decoding method that produced an extraction result.
enum class Method { guided, pre_only, post_only };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::guided: return "guided";
        case Method::pre_only: return "pre_only";
        case Method::post_only: return "post_only";
    }
    return "guided";
}

inline Method method_from_name(std::string_view name) {
    if (name == "guided") return Method::guided;
    if (name == "pre_only") return Method::pre_only;
    if (name == "post_only") return Method::post_only;
    raise(errc::parse_error, "unknown method name: " + std::string(name));
}

/// Attack hyperparameters.
///
/// `w` is the guidance scale applied to the pre/post log-probability gap
/// (w >= 1); `gamma` is the candidate-filter strictness in (0, 1]; decoding
/// emits at most `max_new_tokens` tokens; `tau_list` holds the extraction
/// success thresholds to report.
struct GuidanceConfig {
    double w = 2.0;
    double gamma = 1e-5;
    int max_new_tokens = 64;
    std::vector<double> tau_list = {0.9, 1.0};

    bool operator==(const GuidanceConfig&) const = default;
};

/// Checks every field range and returns the config unchanged.
/// Throws Error(out_of_range) naming the offending field.
inline GuidanceConfig validate_config(const GuidanceConfig& cfg) {
    if (!(cfg.w >= 1.0) || !std::isfinite(cfg.w))
        raise(errc::out_of_range, "w must be >= 1 (got " + std::to_string(cfg.w) + ")");
    if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0))
        raise(errc::out_of_range, "gamma must be in (0, 1] (got " + std::to_string(cfg.gamma) + ")");
    if (cfg.max_new_tokens < 1)
        raise(errc::out_of_range,
              "max_new_tokens must be positive (got " + std::to_string(cfg.max_new_tokens) + ")");
    for (double tau : cfg.tau_list) {
        if (!(tau > 0.0 && tau <= 1.0))
            raise(errc::out_of_range, "tau must be in (0, 1] (got " + std::to_string(tau) + ")");
    }
    return cfg;
}

/// Dense next-token log-probability vector from one provider.
///
/// Entries are log-probabilities (or any real score for providers that
/// declare themselves unnormalized); kNegInf marks tokens outside the
/// provider's support, e.g. entries a truncated upstream omitted. A
/// kNegInf entry compares below every finite value in max/argmax.
struct LogProbVector {
    std::vector<double> values;

    LogProbVector() = default;
    explicit LogProbVector(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }

    std::size_t finite_count() const {
        std::size_t n = 0;
        for (double v : values)
            if (std::isfinite(v)) ++n;
        return n;
    }

    /// log-sum-exp over the finite entries; ~0 for a normalized distribution.
    double log_sum_exp() const { return util::log_sum_exp(values); }

    bool operator==(const LogProbVector&) const = default;
};

/// One forgetting-set item: the attacker-known prefix and the reference
/// continuation, in both token and text form.
struct ExtractionRecord {
    std::string id;
    std::vector<TokenId> prefix_ids;
    std::vector<TokenId> target_ids;
    std::string prefix_text;
    std::string target_text;
};

/// A decoded continuation for one record plus its score.
struct ExtractionResult {
    std::string record_id;
    Method method = Method::guided;
    std::vector<TokenId> generated_ids;
    std::string generated_text;
    double rouge_l_recall = 0.0;

    bool operator==(const ExtractionResult&) const = default;
};

/// Splits a tokenized passage into attacker-known prefix and reference
/// target: the prefix takes ceil(T/2) tokens, the target the remainder, so
/// concatenation reproduces the input. Requires at least 2 tokens.
inline std::pair<std::vector<TokenId>, std::vector<TokenId>>
split_prefix(std::span<const TokenId> token_ids) {
    if (token_ids.size() < 2)
        raise(errc::too_short, "need at least 2 tokens to split, got " +
                                   std::to_string(token_ids.size()));
    const std::size_t cut = (token_ids.size() + 1) / 2;
    return {std::vector<TokenId>(token_ids.begin(), token_ids.begin() + static_cast<std::ptrdiff_t>(cut)),
            std::vector<TokenId>(token_ids.begin() + static_cast<std::ptrdiff_t>(cut), token_ids.end())};
}

}  // namespace uprobe
