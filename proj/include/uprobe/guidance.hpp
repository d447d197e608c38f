#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

/**
 * @file guidance.hpp
 * @brief Guided decoding against a pre/post unlearning model pair.
 *
 * Given next-token log-probabilities from the model before unlearning (pre)
 * and after unlearning (post), each decoding step:
 *
 *  1. restricts candidates to tokens the pre model rates at least gamma
 *     times its own maximum probability,
 *  2. scores every token with the fused log-score
 *         score(v) = post(v) + w * (pre(v) - post(v)),
 *     which amplifies the pre/post gap left behind by removing data,
 *  3. picks the highest-scoring candidate, breaking ties toward the
 *     smallest token id.
 *
 * Scores are used unnormalized: selection only needs the argmax, and the
 * fusion is affine in both inputs, so adding a per-context constant to
 * either vector changes neither the candidate set nor the chosen token.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "uprobe/errors.hpp"
#include "uprobe/log.hpp"
#include "uprobe/provider.hpp"
#include "uprobe/types.hpp"

namespace uprobe::guidance {

/// Tokens that survive the pre-model probability filter for one step.
struct CandidateSet {
    std::vector<TokenId> member_ids;  // ascending
    double threshold_logprob = kNegInf;

    bool contains(TokenId id) const {
        return std::binary_search(member_ids.begin(), member_ids.end(), id);
    }
};

/// Outcome of one guided selection step.
struct GuidedStep {
    std::vector<double> scores;
    TokenId chosen = 0;
    std::int32_t candidate_count = 0;
    /// True when every candidate's fused score was -inf and selection fell
    /// back to the pre model's argmax.
    bool degenerate = false;
};

namespace detail {

/// Index of the largest finite value; ties resolve to the smallest index.
/// Returns -1 when nothing is finite.
inline TokenId argmax_finite(std::span<const double> values) {
    TokenId best = -1;
    double best_value = kNegInf;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isfinite(values[i]) && values[i] > best_value) {
            best_value = values[i];
            best = static_cast<TokenId>(i);
        }
    }
    return best;
}

}  // namespace detail

/// Keeps exactly the tokens whose pre-model probability is >= gamma times
/// the pre-model maximum, computed in log space. The pre-model argmax always
/// survives, so the set is never empty.
inline CandidateSet filter_candidates(const LogProbVector& pre, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        raise(errc::out_of_range, "gamma must be in (0, 1] (got " + std::to_string(gamma) + ")");

    double max_logprob = kNegInf;
    for (double v : pre.values)
        if (std::isfinite(v) && v > max_logprob) max_logprob = v;
    if (!std::isfinite(max_logprob))
        raise(errc::all_neg_inf, "pre-model vector has no finite entries");

    CandidateSet set;
    set.threshold_logprob = max_logprob + std::log(gamma);
    for (std::size_t v = 0; v < pre.size(); ++v) {
        if (pre.values[v] >= set.threshold_logprob) set.member_ids.push_back(static_cast<TokenId>(v));
    }
    return set;
}

/// Fused per-token log-score post(v) + w * (pre(v) - post(v)). A -inf entry
/// in either input forces -inf output for that token.
///
/// Evaluated as pre + (w-1) * (pre - post): algebraically identical, and
/// bit-exact both at w = 1 (scores equal pre) and when the two inputs are
/// element-wise identical (scores equal them).
inline std::vector<double> guided_scores(const LogProbVector& pre, const LogProbVector& post,
                                         double w) {
    if (pre.size() != post.size())
        raise(errc::length_mismatch, "vector lengths differ (" + std::to_string(pre.size()) +
                                         " vs " + std::to_string(post.size()) + ")");
    if (!(w >= 1.0) || !std::isfinite(w))
        raise(errc::out_of_range, "w must be >= 1 (got " + std::to_string(w) + ")");

    std::vector<double> scores(pre.size());
    for (std::size_t v = 0; v < pre.size(); ++v) {
        const double a = pre.values[v];
        const double b = post.values[v];
        scores[v] = (std::isfinite(a) && std::isfinite(b)) ? a + (w - 1.0) * (a - b) : kNegInf;
    }
    return scores;
}

/// One decoding step: filter, fuse, argmax. Deterministic; ties break toward
/// the smallest token id. When the entire candidate set fuses to -inf (the
/// post model has no support anywhere the pre model does), selection falls
/// back to the pre model's argmax and the step is marked degenerate.
inline GuidedStep select_next(const LogProbVector& pre, const LogProbVector& post,
                              const GuidanceConfig& cfg) {
    const CandidateSet candidates = filter_candidates(pre, cfg.gamma);

    GuidedStep step;
    step.scores = guided_scores(pre, post, cfg.w);
    step.candidate_count = static_cast<std::int32_t>(candidates.member_ids.size());

    TokenId best = -1;
    double best_score = kNegInf;
    for (TokenId v : candidates.member_ids) {
        const double s = step.scores[static_cast<std::size_t>(v)];
        if (std::isfinite(s) && s > best_score) {
            best_score = s;
            best = v;
        }
    }

    if (best < 0) {
        step.degenerate = true;
        best = detail::argmax_finite(pre.values);  // candidates all filter on finite pre entries
        log::debug("degenerate guided step: all candidate scores are -inf, using pre-model argmax");
    }
    step.chosen = best;
    return step;
}

namespace detail {

template <typename StepFn>
std::vector<TokenId> decode_loop(StepFn&& next_token, std::span<const TokenId> prefix,
                                 int max_new_tokens, std::optional<TokenId> eos) {
    std::vector<TokenId> context(prefix.begin(), prefix.end());
    std::vector<TokenId> out;
    out.reserve(static_cast<std::size_t>(max_new_tokens));
    for (int i = 0; i < max_new_tokens; ++i) {
        const TokenId chosen = next_token(context);
        if (eos && chosen == *eos) break;  // stop token is never emitted
        out.push_back(chosen);
        context.push_back(chosen);
    }
    return out;
}

}  // namespace detail

/// Greedy guided decoding from a known prefix. Emits until the pre model's
/// end-of-sequence token is selected or max_new_tokens is reached.
inline std::vector<TokenId> decode(const provider::Provider& pre, const provider::Provider& post,
                                   std::span<const TokenId> prefix, const GuidanceConfig& cfg) {
    provider::require_pair_compatible(pre, post);
    if (prefix.empty()) raise(errc::empty_field, "decode: prefix is empty");
    validate_config(cfg);

    return detail::decode_loop(
        [&](std::span<const TokenId> ctx) {
            const LogProbVector pre_lp = pre.next_logprobs(ctx);
            const LogProbVector post_lp = post.next_logprobs(ctx);
            return select_next(pre_lp, post_lp, cfg).chosen;
        },
        prefix, cfg.max_new_tokens, pre.eos_token());
}

/// Plain greedy decoding on a single provider; same stopping rule and
/// tie-breaking as guided decoding.
inline std::vector<TokenId> baseline_decode(const provider::Provider& p,
                                            std::span<const TokenId> prefix,
                                            const GuidanceConfig& cfg) {
    if (prefix.empty()) raise(errc::empty_field, "baseline_decode: prefix is empty");
    validate_config(cfg);

    return detail::decode_loop(
        [&](std::span<const TokenId> ctx) {
            const LogProbVector lp = p.next_logprobs(ctx);
            const TokenId best = detail::argmax_finite(lp.values);
            if (best < 0) raise(errc::all_neg_inf, "provider vector has no finite entries");
            return best;
        },
        prefix, cfg.max_new_tokens, p.eos_token());
}

}  // namespace uprobe::guidance
