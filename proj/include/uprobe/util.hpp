#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uprobe {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

namespace util {

/// FNV-1a 64-bit over a byte stream.
class Fnv1a64 {
public:
    void update(std::string_view bytes) {
        for (unsigned char b : bytes) {
            state_ ^= static_cast<std::uint64_t>(b);
            state_ *= 0x100000001b3ULL;
        }
    }
    void update_byte(unsigned char b) {
        state_ ^= static_cast<std::uint64_t>(b);
        state_ *= 0x100000001b3ULL;
    }
    std::uint64_t digest() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Hash of an ordered vocabulary: FNV-1a 64 over the strings joined with 0x1F.
inline std::uint64_t vocab_hash(std::span<const std::string> vocab) {
    Fnv1a64 h;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        if (i > 0) h.update_byte(0x1F);
        h.update(vocab[i]);
    }
    return h.digest();
}

inline std::string to_hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

/// log(sum(exp(x))) over the finite entries, max-shifted for stability.
/// Returns -inf when no entry is finite.
inline double log_sum_exp(std::span<const double> values) {
    double mx = kNegInf;
    for (double v : values) {
        if (std::isfinite(v) && v > mx) mx = v;
    }
    if (!std::isfinite(mx)) return kNegInf;
    double sum = 0.0;
    for (double v : values) {
        if (std::isfinite(v)) sum += std::exp(v - mx);
    }
    return mx + std::log(sum);
}

inline std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

inline std::string join(std::span<const std::string> words, std::string_view sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out += sep;
        out += words[i];
    }
    return out;
}

}  // namespace util
}  // namespace uprobe
