#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace uprobe {

/// Stable error codes. The wire protocol transports these by name, and the
/// CLI maps them onto exit codes (transport-class errors exit 2, everything
/// else exits 1).
enum class errc {
    out_of_range,
    too_short,
    empty_corpus,
    token_out_of_range,
    transport_error,
    upstream_malformed,
    connect_failed,
    protocol_version_mismatch,
    bind_failed,
    length_mismatch,
    all_neg_inf,
    vocab_mismatch,
    parse_error,
    duplicate_id,
    missing_field,
    empty_field,
    empty_reference,
    empty_scores,
    io_error,
    internal,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::out_of_range: return "out_of_range";
        case errc::too_short: return "too_short";
        case errc::empty_corpus: return "empty_corpus";
        case errc::token_out_of_range: return "token_out_of_range";
        case errc::transport_error: return "transport_error";
        case errc::upstream_malformed: return "upstream_malformed";
        case errc::connect_failed: return "connect_failed";
        case errc::protocol_version_mismatch: return "protocol_version_mismatch";
        case errc::bind_failed: return "bind_failed";
        case errc::length_mismatch: return "length_mismatch";
        case errc::all_neg_inf: return "all_neg_inf";
        case errc::vocab_mismatch: return "vocab_mismatch";
        case errc::parse_error: return "parse_error";
        case errc::duplicate_id: return "duplicate_id";
        case errc::missing_field: return "missing_field";
        case errc::empty_field: return "empty_field";
        case errc::empty_reference: return "empty_reference";
        case errc::empty_scores: return "empty_scores";
        case errc::io_error: return "io_error";
        case errc::internal: return "internal";
    }
    return "internal";
}

inline std::optional<errc> errc_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(errc::internal); ++i) {
        const auto c = static_cast<errc>(i);
        if (name == errc_name(c)) return c;
    }
    return std::nullopt;
}

/// True for failures of the HTTP transport or wire protocol, as opposed to
/// invalid inputs or configuration.
inline bool is_transport_error(errc c) {
    switch (c) {
        case errc::transport_error:
        case errc::upstream_malformed:
        case errc::connect_failed:
        case errc::protocol_version_mismatch:
        case errc::bind_failed:
            return true;
        default:
            return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace uprobe
