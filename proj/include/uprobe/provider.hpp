#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

/**
 * @file provider.hpp
 * @brief Uniform access to a model's tokenizer and next-token
 *        log-probabilities.
 *
 * A Provider is an opaque distribution source: the in-process n-gram toy
 * model, a remote logits endpoint (wire.hpp), or a memoizing wrapper around
 * either. Two providers can be used as an unlearning pair only when their
 * vocabulary hashes match. Implementations must be safe for concurrent read
 * queries after construction.
 */

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "uprobe/errors.hpp"
#include "uprobe/ngram.hpp"
#include "uprobe/types.hpp"
#include "uprobe/util.hpp"

namespace uprobe::provider {

class Provider {
public:
    virtual ~Provider() = default;

    virtual std::int32_t vocab_size() const = 0;
    /// Content hash of the ordered vocabulary (FNV-1a 64 over the strings
    /// joined with 0x1F). Pair compatibility is hash equality.
    virtual std::uint64_t vocab_hash() const = 0;
    /// Whether next_logprobs returns a proper (normalized) distribution.
    virtual bool normalized() const = 0;
    /// End-of-sequence token when the backend knows it; decoding stops there.
    virtual std::optional<TokenId> eos_token() const = 0;

    virtual LogProbVector next_logprobs(std::span<const TokenId> context) const = 0;
    virtual std::vector<TokenId> tokenize(std::string_view text) const = 0;
    virtual std::string detokenize(std::span<const TokenId> ids) const = 0;

    std::string vocab_hash_hex() const { return util::to_hex16(vocab_hash()); }
};

using ProviderPtr = std::shared_ptr<const Provider>;

inline bool pair_compatible(const Provider& a, const Provider& b) {
    return a.vocab_hash() == b.vocab_hash();
}

inline void require_pair_compatible(const Provider& a, const Provider& b) {
    if (!pair_compatible(a, b))
        raise(errc::vocab_mismatch, "provider vocabularies differ (" + a.vocab_hash_hex() + " vs " +
                                        b.vocab_hash_hex() + ")");
}

/// In-process provider backed by an NGramModel.
class ToyProvider final : public Provider {
public:
    explicit ToyProvider(NGramModel model) : model_(std::move(model)) {}

    std::int32_t vocab_size() const override { return model_.vocab_size(); }
    std::uint64_t vocab_hash() const override { return model_.vocab_hash(); }
    bool normalized() const override { return true; }
    std::optional<TokenId> eos_token() const override { return model_.eos_id(); }

    LogProbVector next_logprobs(std::span<const TokenId> context) const override {
        return model_.next_logprobs(context);
    }
    std::vector<TokenId> tokenize(std::string_view text) const override {
        return model_.tokenize(text);
    }
    std::string detokenize(std::span<const TokenId> ids) const override {
        return model_.detokenize(ids);
    }

    const NGramModel& model() const { return model_; }

private:
    NGramModel model_;
};

/// Trains the toy model; vocabulary comes from the corpus itself.
inline ProviderPtr toy_train(const std::vector<std::string>& corpus, int order = kDefaultOrder,
                             double k = kDefaultK) {
    return std::make_shared<ToyProvider>(NGramModel::train(corpus, order, k));
}

/// Memoizing wrapper: identical next_logprobs queries hit the inner provider
/// once; eviction is least-recently-used. Observationally equivalent to the
/// wrapped provider.
class CachedProvider final : public Provider {
public:
    CachedProvider(ProviderPtr inner, std::size_t capacity)
        : inner_(std::move(inner)), capacity_(capacity) {
        if (!inner_) raise(errc::out_of_range, "cached: inner provider is null");
        if (capacity_ < 1) raise(errc::out_of_range, "cache capacity must be >= 1");
    }

    std::int32_t vocab_size() const override { return inner_->vocab_size(); }
    std::uint64_t vocab_hash() const override { return inner_->vocab_hash(); }
    bool normalized() const override { return inner_->normalized(); }
    std::optional<TokenId> eos_token() const override { return inner_->eos_token(); }

    LogProbVector next_logprobs(std::span<const TokenId> context) const override {
        std::vector<TokenId> key(context.begin(), context.end());
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (auto it = index_.find(key); it != index_.end()) {
                entries_.splice(entries_.begin(), entries_, it->second);
                return it->second->second;
            }
        }
        // Compute outside the lock; concurrent misses on the same key may
        // both query the inner provider, which is harmless.
        LogProbVector value = inner_->next_logprobs(context);
        std::lock_guard<std::mutex> lock(mu_);
        if (auto it = index_.find(key); it != index_.end()) {
            entries_.splice(entries_.begin(), entries_, it->second);
            return it->second->second;
        }
        entries_.emplace_front(key, value);
        index_[std::move(key)] = entries_.begin();
        while (index_.size() > capacity_) {
            index_.erase(entries_.back().first);
            entries_.pop_back();
        }
        return value;
    }

    std::vector<TokenId> tokenize(std::string_view text) const override {
        return inner_->tokenize(text);
    }
    std::string detokenize(std::span<const TokenId> ids) const override {
        return inner_->detokenize(ids);
    }

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<TokenId>& v) const {
            util::Fnv1a64 h;
            for (TokenId id : v)
                h.update(std::string_view(reinterpret_cast<const char*>(&id), sizeof(id)));
            return static_cast<std::size_t>(h.digest());
        }
    };

    ProviderPtr inner_;
    std::size_t capacity_;
    mutable std::mutex mu_;
    mutable std::list<std::pair<std::vector<TokenId>, LogProbVector>> entries_;
    mutable std::unordered_map<std::vector<TokenId>, decltype(entries_)::iterator, KeyHash> index_;
};

inline ProviderPtr cached(ProviderPtr inner, std::size_t capacity) {
    return std::make_shared<CachedProvider>(std::move(inner), capacity);
}

}  // namespace uprobe::provider
