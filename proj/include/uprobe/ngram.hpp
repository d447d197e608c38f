#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

/**
 * @file ngram.hpp
 * @brief Deterministic add-k smoothed n-gram language model.
 *
 * This is the toy stand-in for a fine-tuned LLM: small corpora are memorized
 * strongly while unseen contexts fall back to the smoothed uniform
 * distribution, which gives the pre/post model pair a measurable behavioral
 * gap on removed sentences.
 *
 * Model shape:
 *  - vocabulary = sorted unique whitespace tokens of the corpus plus the
 *    specials <bos>, <eos>, <unk>;
 *  - every training line is padded with order-1 <bos> tokens and terminated
 *    with <eos>, and every length-`order` window contributes one
 *    (context -> target) count;
 *  - next-token distribution: P(v | ctx) = (count(ctx,v) + k) /
 *    (total(ctx) + k*S) over the S = vocab_size - 1 predictable tokens.
 *    <bos> is never predicted and carries log-probability -inf.
 *
 * Construction from the same corpus, order, and k is bit-reproducible, and
 * the serialized form (a single JSON document) is byte-stable.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "uprobe/errors.hpp"
#include "uprobe/types.hpp"
#include "uprobe/util.hpp"

namespace uprobe::provider {

inline constexpr const char* kBosToken = "<bos>";
inline constexpr const char* kEosToken = "<eos>";
inline constexpr const char* kUnkToken = "<unk>";

inline constexpr int kDefaultOrder = 3;
inline constexpr double kDefaultK = 0.1;

class NGramModel {
public:
    struct ContextCounts {
        std::map<TokenId, std::uint64_t> per_token;
        std::uint64_t total = 0;
    };

    /// Trains on whitespace-tokenized lines. When `vocab_override` is given
    /// (e.g. the union vocabulary shared by an unlearning pair) it is used
    /// verbatim; it must contain the specials and every corpus word.
    static NGramModel train(std::span<const std::string> corpus, int order, double k,
                            std::optional<std::vector<std::string>> vocab_override = std::nullopt) {
        if (corpus.empty()) raise(errc::empty_corpus, "training corpus has no lines");
        if (order < 1) raise(errc::out_of_range, "order must be >= 1 (got " + std::to_string(order) + ")");
        if (!(k > 0.0)) raise(errc::out_of_range, "k must be > 0 (got " + std::to_string(k) + ")");

        NGramModel m;
        m.order_ = order;
        m.k_ = k;
        m.vocab_ = vocab_override ? std::move(*vocab_override) : build_vocab(corpus);
        m.index_vocab();

        for (const std::string& line : corpus) {
            std::vector<TokenId> ids = m.tokenize(line);
            // padded sequence: order-1 <bos>, the line, one terminal <eos>
            std::vector<TokenId> seq(static_cast<std::size_t>(order - 1), m.bos_id_);
            seq.insert(seq.end(), ids.begin(), ids.end());
            seq.push_back(m.eos_id_);
            for (std::size_t end = static_cast<std::size_t>(order - 1); end < seq.size(); ++end) {
                std::vector<TokenId> ctx(seq.begin() + static_cast<std::ptrdiff_t>(end) - (order - 1),
                                         seq.begin() + static_cast<std::ptrdiff_t>(end));
                ContextCounts& cc = m.counts_[ctx];
                cc.per_token[seq[end]] += 1;
                cc.total += 1;
            }
        }
        return m;
    }

    /// Union vocabulary for a corpus: sorted unique words plus specials.
    static std::vector<std::string> build_vocab(std::span<const std::string> corpus) {
        std::map<std::string, bool> words;
        words[kBosToken] = true;
        words[kEosToken] = true;
        words[kUnkToken] = true;
        for (const std::string& line : corpus)
            for (std::string& w : util::split_whitespace(line)) words[std::move(w)] = true;
        std::vector<std::string> vocab;
        vocab.reserve(words.size());
        for (const auto& [w, _] : words) vocab.push_back(w);
        return vocab;
    }

    int order() const { return order_; }
    double k() const { return k_; }
    const std::vector<std::string>& vocab() const { return vocab_; }
    std::int32_t vocab_size() const { return static_cast<std::int32_t>(vocab_.size()); }
    std::uint64_t vocab_hash() const { return util::vocab_hash(vocab_); }
    TokenId bos_id() const { return bos_id_; }
    TokenId eos_id() const { return eos_id_; }
    TokenId unk_id() const { return unk_id_; }
    const std::map<std::vector<TokenId>, ContextCounts>& counts() const { return counts_; }

    std::vector<TokenId> tokenize(std::string_view text) const {
        std::vector<TokenId> out;
        for (const std::string& w : util::split_whitespace(text)) {
            auto it = token_ids_.find(w);
            out.push_back(it == token_ids_.end() ? unk_id_ : it->second);
        }
        return out;
    }

    std::string detokenize(std::span<const TokenId> ids) const {
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            check_token(ids[i]);
            if (i > 0) out += ' ';
            out += vocab_[static_cast<std::size_t>(ids[i])];
        }
        return out;
    }

    /// Smoothed next-token distribution given a context. Conditioning uses
    /// the trailing order-1 tokens, left-padded with <bos> when the context
    /// is shorter (matching how training windows see sentence starts).
    LogProbVector next_logprobs(std::span<const TokenId> context) const {
        for (TokenId id : context) check_token(id);

        std::vector<TokenId> key(static_cast<std::size_t>(order_ - 1), bos_id_);
        const std::size_t ctx_len = static_cast<std::size_t>(order_ - 1);
        const std::size_t take = std::min(context.size(), ctx_len);
        for (std::size_t i = 0; i < take; ++i)
            key[ctx_len - take + i] = context[context.size() - take + i];

        const ContextCounts* cc = nullptr;
        if (auto it = counts_.find(key); it != counts_.end()) cc = &it->second;

        const double support = static_cast<double>(vocab_.size() - 1);  // <bos> is never predicted
        const double denom_log = std::log((cc ? static_cast<double>(cc->total) : 0.0) + k_ * support);

        LogProbVector lp;
        lp.values.assign(vocab_.size(), kNegInf);
        for (std::size_t v = 0; v < vocab_.size(); ++v) {
            if (static_cast<TokenId>(v) == bos_id_) continue;
            double count = 0.0;
            if (cc) {
                if (auto it = cc->per_token.find(static_cast<TokenId>(v)); it != cc->per_token.end())
                    count = static_cast<double>(it->second);
            }
            lp.values[v] = std::log(count + k_) - denom_log;
        }
        return lp;
    }

    /// Sum of next-token log-probabilities along `ids`, including the
    /// terminal <eos> event. Higher means the model memorized the sequence
    /// more strongly.
    double sequence_logprob(std::span<const TokenId> ids) const {
        std::vector<TokenId> ctx;
        double total = 0.0;
        for (std::size_t i = 0; i <= ids.size(); ++i) {
            const TokenId target = i < ids.size() ? ids[i] : eos_id_;
            const LogProbVector lp = next_logprobs(ctx);
            total += lp.values[static_cast<std::size_t>(target)];
            ctx.push_back(target);
        }
        return total;
    }

    // --- persistence -------------------------------------------------------
    // Single JSON document: {"order", "k", "vocab": [...],
    //   "counts": {"<space-joined ctx ids>": {"<token id>": count}}}

    nlohmann::json to_json() const {
        nlohmann::json counts = nlohmann::json::object();
        for (const auto& [ctx, cc] : counts_) {
            std::string key = ctx_key(ctx);
            nlohmann::json row = nlohmann::json::object();
            for (const auto& [tok, n] : cc.per_token) row[std::to_string(tok)] = n;
            counts[key] = std::move(row);
        }
        return nlohmann::json{{"order", order_}, {"k", k_}, {"vocab", vocab_}, {"counts", counts}};
    }

    static NGramModel from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("order") || !j.contains("k") || !j.contains("vocab") ||
            !j.contains("counts"))
            raise(errc::parse_error, "model document must have order, k, vocab, counts");

        NGramModel m;
        m.order_ = j.at("order").get<int>();
        m.k_ = j.at("k").get<double>();
        if (m.order_ < 1) raise(errc::out_of_range, "model order must be >= 1");
        if (!(m.k_ > 0.0)) raise(errc::out_of_range, "model k must be > 0");
        m.vocab_ = j.at("vocab").get<std::vector<std::string>>();
        if (m.vocab_.empty()) raise(errc::parse_error, "model vocabulary is empty");
        m.index_vocab();

        for (const auto& [key, row] : j.at("counts").items()) {
            std::vector<TokenId> ctx = parse_ctx_key(key);
            if (ctx.size() != static_cast<std::size_t>(m.order_ - 1))
                raise(errc::parse_error, "context key '" + key + "' does not match order");
            for (TokenId id : ctx) m.check_token(id);
            ContextCounts cc;
            for (const auto& [tok, n] : row.items()) {
                TokenId id = parse_token(tok);
                m.check_token(id);
                std::uint64_t count = n.get<std::uint64_t>();
                cc.per_token[id] = count;
                cc.total += count;
            }
            m.counts_[std::move(ctx)] = std::move(cc);
        }
        return m;
    }

    void save_file(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) raise(errc::io_error, "cannot open for writing: " + path.string());
        out << to_json().dump();
        out << '\n';
        if (!out) raise(errc::io_error, "write failed: " + path.string());
    }

    static NGramModel load_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) raise(errc::io_error, "cannot open model file: " + path.string());
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) raise(errc::parse_error, "model file is not valid JSON: " + path.string());
        return from_json(j);
    }

private:
    void index_vocab() {
        token_ids_.clear();
        for (std::size_t i = 0; i < vocab_.size(); ++i)
            token_ids_[vocab_[i]] = static_cast<TokenId>(i);
        auto find_special = [&](const char* name) {
            auto it = token_ids_.find(name);
            if (it == token_ids_.end())
                raise(errc::parse_error, std::string("vocabulary is missing ") + name);
            return it->second;
        };
        bos_id_ = find_special(kBosToken);
        eos_id_ = find_special(kEosToken);
        unk_id_ = find_special(kUnkToken);
    }

    void check_token(TokenId id) const {
        if (id < 0 || id >= vocab_size())
            raise(errc::token_out_of_range,
                  "token id " + std::to_string(id) + " outside vocabulary of size " +
                      std::to_string(vocab_.size()));
    }

    static std::string ctx_key(std::span<const TokenId> ctx) {
        std::string key;
        for (std::size_t i = 0; i < ctx.size(); ++i) {
            if (i > 0) key += ' ';
            key += std::to_string(ctx[i]);
        }
        return key;
    }

    static std::vector<TokenId> parse_ctx_key(const std::string& key) {
        std::vector<TokenId> ctx;
        if (key.empty()) return ctx;
        std::istringstream ss(key);
        std::string part;
        while (std::getline(ss, part, ' ')) ctx.push_back(parse_token(part));
        return ctx;
    }

    static TokenId parse_token(const std::string& s) {
        try {
            std::size_t pos = 0;
            long v = std::stol(s, &pos);
            if (pos != s.size() || v < 0) throw std::invalid_argument(s);
            return static_cast<TokenId>(v);
        } catch (const std::exception&) {
            raise(errc::parse_error, "bad token id '" + s + "' in model document");
        }
    }

    int order_ = kDefaultOrder;
    double k_ = kDefaultK;
    std::vector<std::string> vocab_;
    std::unordered_map<std::string, TokenId> token_ids_;
    TokenId bos_id_ = 0, eos_id_ = 0, unk_id_ = 0;
    std::map<std::vector<TokenId>, ContextCounts> counts_;
};

}  // namespace uprobe::provider
