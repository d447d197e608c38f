#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

/**
 * @file wire.hpp
 * @brief Logits wire protocol: HTTP server for any provider and a matching
 *        client provider.
 *
 * All bodies are UTF-8 JSON over HTTP/1.1, protocol version 1:
 *
 *   GET  /v1/vocab      -> {"vocab_size": int, "vocab_hash": 16-hex-string,
 *                           "normalized": bool, "protocol_version": 1}
 *   POST /v1/logits     {"tokens": [int, ...]}
 *                       -> {"logprobs": [float-or-"-inf"; vocab_size]}
 *   POST /v1/tokenize   {"text": str}    -> {"tokens": [int]}
 *   POST /v1/detokenize {"tokens": [int]} -> {"text": str}
 *
 * Invalid requests yield HTTP 400 with {"error": {"code": str, "message":
 * str}}; the code strings are the errc names from errors.hpp. Log-prob
 * entries are finite JSON numbers or the string "-inf" for tokens outside
 * the model's support. One context per request keeps responses bit-exact.
 */

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "uprobe/errors.hpp"
#include "uprobe/log.hpp"
#include "uprobe/provider.hpp"
#include "uprobe/types.hpp"

namespace uprobe::wire {

inline constexpr int kProtocolVersion = 1;

inline nlohmann::json logprobs_to_wire(const LogProbVector& lp) {
    nlohmann::json arr = nlohmann::json::array();
    for (double v : lp.values) {
        if (std::isfinite(v)) {
            arr.push_back(v);
        } else {
            arr.push_back("-inf");
        }
    }
    return arr;
}

inline LogProbVector logprobs_from_wire(const nlohmann::json& arr, std::size_t expected_size) {
    if (!arr.is_array())
        raise(errc::upstream_malformed, "logprobs is not an array");
    if (arr.size() != expected_size)
        raise(errc::upstream_malformed, "logprobs length " + std::to_string(arr.size()) +
                                            " does not match vocab_size " +
                                            std::to_string(expected_size));
    LogProbVector lp;
    lp.values.reserve(arr.size());
    for (const auto& e : arr) {
        if (e.is_number()) {
            lp.values.push_back(e.get<double>());
        } else if (e.is_string() && e.get<std::string>() == "-inf") {
            lp.values.push_back(kNegInf);
        } else {
            raise(errc::upstream_malformed, "logprobs entry is neither a number nor \"-inf\"");
        }
    }
    return lp;
}

namespace detail {

inline std::vector<TokenId> tokens_from_json(const nlohmann::json& j, const char* field) {
    if (!j.contains(field))
        raise(errc::missing_field, std::string("body is missing '") + field + "'");
    const auto& arr = j.at(field);
    if (!arr.is_array())
        raise(errc::parse_error, std::string("'") + field + "' must be an array of token ids");
    std::vector<TokenId> out;
    out.reserve(arr.size());
    for (const auto& e : arr) {
        if (!e.is_number_integer())
            raise(errc::parse_error, std::string("'") + field + "' must contain integers");
        const auto v = e.get<std::int64_t>();
        if (v < 0 || v > std::numeric_limits<TokenId>::max())
            raise(errc::token_out_of_range, "token id " + std::to_string(v) + " out of range");
        out.push_back(static_cast<TokenId>(v));
    }
    return out;
}

inline void write_error(httplib::Response& res, int status, errc code, const std::string& message) {
    nlohmann::json body = {{"error", {{"code", errc_name(code)}, {"message", message}}}};
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

}  // namespace detail

/// Serves a provider over the wire protocol on a background thread.
/// Requests are handled concurrently with no cross-request state.
class ProviderServer {
public:
    /// Binds immediately; pass port 0 to pick a free port. Throws
    /// Error(bind_failed) when the address cannot be bound.
    ProviderServer(provider::ProviderPtr provider, const std::string& host, int port)
        : provider_(std::move(provider)), host_(host) {
        if (!provider_) raise(errc::out_of_range, "serve: provider is null");
        install_routes();

        if (port == 0) {
            port_ = server_.bind_to_any_port(host_);
            if (port_ < 0) raise(errc::bind_failed, "cannot bind " + host_ + " (any port)");
        } else {
            if (!server_.bind_to_port(host_, port))
                raise(errc::bind_failed, "cannot bind " + host_ + ":" + std::to_string(port));
            port_ = port;
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        log::info("serving provider on " + origin());
    }

    ~ProviderServer() { stop(); }
    ProviderServer(const ProviderServer&) = delete;
    ProviderServer& operator=(const ProviderServer&) = delete;

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    int port() const { return port_; }
    std::string origin() const { return "http://" + host_ + ":" + std::to_string(port_); }

private:
    void install_routes() {
        server_.Get("/v1/vocab", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::json body = {{"vocab_size", provider_->vocab_size()},
                                   {"vocab_hash", provider_->vocab_hash_hex()},
                                   {"normalized", provider_->normalized()},
                                   {"protocol_version", kProtocolVersion}};
            res.set_content(body.dump(), "application/json");
        });

        server_.Post("/v1/logits", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                const std::vector<TokenId> tokens =
                    detail::tokens_from_json(parse_body(req), "tokens");
                nlohmann::json body = {{"logprobs", logprobs_to_wire(provider_->next_logprobs(tokens))}};
                res.set_content(body.dump(), "application/json");
            });
        });

        server_.Post("/v1/tokenize", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                const nlohmann::json j = parse_body(req);
                if (!j.contains("text") || !j.at("text").is_string())
                    raise(errc::missing_field, "body is missing string 'text'");
                nlohmann::json body = {{"tokens", provider_->tokenize(j.at("text").get<std::string>())}};
                res.set_content(body.dump(), "application/json");
            });
        });

        server_.Post("/v1/detokenize", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                const std::vector<TokenId> tokens =
                    detail::tokens_from_json(parse_body(req), "tokens");
                nlohmann::json body = {{"text", provider_->detokenize(tokens)}};
                res.set_content(body.dump(), "application/json");
            });
        });
    }

    static nlohmann::json parse_body(const httplib::Request& req) {
        nlohmann::json j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            raise(errc::parse_error, "request body is not a JSON object");
        return j;
    }

    template <typename Fn>
    static void handle(httplib::Response& res, Fn&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            detail::write_error(res, 400, e.code(), e.what());
        } catch (const std::exception& e) {
            detail::write_error(res, 500, errc::internal, e.what());
        }
    }

    provider::ProviderPtr provider_;
    std::string host_;
    int port_ = -1;
    httplib::Server server_;
    std::thread thread_;
};

inline std::unique_ptr<ProviderServer> serve_provider(provider::ProviderPtr provider,
                                                      const std::string& host, int port) {
    return std::make_unique<ProviderServer>(std::move(provider), host, port);
}

/// Client side of the wire protocol. Connection metadata is fetched once at
/// construction; each query opens a short-lived connection, so instances are
/// safe for concurrent use.
class HttpProvider final : public provider::Provider {
public:
    /// Connects to `uri` (http://host:port or https://host:port) and reads
    /// /v1/vocab. Throws connect_failed when unreachable and
    /// protocol_version_mismatch when the endpoint speaks another version.
    explicit HttpProvider(const std::string& uri) : origin_(normalize_origin(uri)) {
        httplib::Result res = client().Get("/v1/vocab");
        if (!res)
            raise(errc::connect_failed,
                  origin_ + ": " + httplib::to_string(res.error()));
        if (res->status != 200)
            raise(errc::connect_failed,
                  origin_ + ": /v1/vocab returned status " + std::to_string(res->status));

        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            raise(errc::upstream_malformed, "/v1/vocab body is not a JSON object");
        if (!j.contains("protocol_version") || !j.at("protocol_version").is_number_integer())
            raise(errc::upstream_malformed, "/v1/vocab has no integer protocol_version");
        if (j.at("protocol_version").get<int>() != kProtocolVersion)
            raise(errc::protocol_version_mismatch,
                  "endpoint speaks protocol version " + j.at("protocol_version").dump() +
                      ", expected " + std::to_string(kProtocolVersion));
        if (!j.contains("vocab_size") || !j.at("vocab_size").is_number_integer() ||
            j.at("vocab_size").get<std::int64_t>() <= 0)
            raise(errc::upstream_malformed, "/v1/vocab has no positive vocab_size");
        if (!j.contains("vocab_hash") || !j.at("vocab_hash").is_string())
            raise(errc::upstream_malformed, "/v1/vocab has no vocab_hash string");

        vocab_size_ = j.at("vocab_size").get<std::int32_t>();
        vocab_hash_ = parse_hash(j.at("vocab_hash").get<std::string>());
        normalized_ = j.value("normalized", false);
        eos_ = resolve_eos();
    }

    std::int32_t vocab_size() const override { return vocab_size_; }
    std::uint64_t vocab_hash() const override { return vocab_hash_; }
    bool normalized() const override { return normalized_; }
    std::optional<TokenId> eos_token() const override { return eos_; }

    LogProbVector next_logprobs(std::span<const TokenId> context) const override {
        for (TokenId id : context) {
            if (id < 0 || id >= vocab_size_)
                raise(errc::token_out_of_range,
                      "token id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(vocab_size_));
        }
        nlohmann::json body = {{"tokens", std::vector<TokenId>(context.begin(), context.end())}};
        const nlohmann::json j = post_json("/v1/logits", body);
        if (!j.contains("logprobs"))
            raise(errc::upstream_malformed, "/v1/logits response is missing 'logprobs'");
        return logprobs_from_wire(j.at("logprobs"), static_cast<std::size_t>(vocab_size_));
    }

    std::vector<TokenId> tokenize(std::string_view text) const override {
        nlohmann::json body = {{"text", std::string(text)}};
        const nlohmann::json j = post_json("/v1/tokenize", body);
        if (!j.contains("tokens") || !j.at("tokens").is_array())
            raise(errc::upstream_malformed, "/v1/tokenize response is missing 'tokens'");
        return j.at("tokens").get<std::vector<TokenId>>();
    }

    std::string detokenize(std::span<const TokenId> ids) const override {
        nlohmann::json body = {{"tokens", std::vector<TokenId>(ids.begin(), ids.end())}};
        const nlohmann::json j = post_json("/v1/detokenize", body);
        if (!j.contains("text") || !j.at("text").is_string())
            raise(errc::upstream_malformed, "/v1/detokenize response is missing 'text'");
        return j.at("text").get<std::string>();
    }

    const std::string& origin() const { return origin_; }

private:
    static std::string normalize_origin(const std::string& uri) {
        const bool http = uri.rfind("http://", 0) == 0;
        const bool https = uri.rfind("https://", 0) == 0;
        if (!http && !https)
            raise(errc::connect_failed, "provider uri must be http(s)://host[:port], got '" + uri + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (https) raise(errc::connect_failed, "https support is not built in");
#endif
        std::string origin = uri;
        while (!origin.empty() && origin.back() == '/') origin.pop_back();
        return origin;
    }

    static std::uint64_t parse_hash(const std::string& hex) {
        if (hex.size() != 16 || hex.find_first_not_of("0123456789abcdef") != std::string::npos)
            raise(errc::upstream_malformed, "vocab_hash must be 16 lowercase hex chars, got '" + hex + "'");
        return std::stoull(hex, nullptr, 16);
    }

    httplib::Client client() const {
        httplib::Client cli(origin_);
        cli.set_connection_timeout(10, 0);
        cli.set_read_timeout(120, 0);
        return cli;
    }

    nlohmann::json post_json(const std::string& path, const nlohmann::json& body) const {
        httplib::Result res = client().Post(path, body.dump(), "application/json");
        if (!res)
            raise(errc::transport_error, origin_ + path + ": " + httplib::to_string(res.error()));
        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (res->status == 200) {
            if (j.is_discarded() || !j.is_object())
                raise(errc::upstream_malformed, path + ": response body is not a JSON object");
            return j;
        }
        // Protocol errors arrive as {"error": {"code", "message"}}; re-raise
        // recognized codes so e.g. token_out_of_range round-trips the wire.
        if (j.is_object() && j.contains("error") && j.at("error").is_object()) {
            const auto& err = j.at("error");
            const std::string code = err.value("code", "");
            const std::string message = err.value("message", "");
            if (auto c = errc_from_name(code))
                raise(*c, "upstream: " + message);
            raise(errc::transport_error, path + ": upstream error '" + code + "': " + message);
        }
        raise(errc::transport_error,
              path + ": status " + std::to_string(res->status) + " with unrecognized body");
    }

    /// The protocol has no end-of-sequence field, so the stop token is
    /// recovered by tokenizing the "<eos>" literal; backends whose tokenizer
    /// does not map it to a single id simply decode to the length cap.
    std::optional<TokenId> resolve_eos() const {
        try {
            const std::vector<TokenId> ids = tokenize(kEosLiteral);
            if (ids.size() == 1) return ids[0];
        } catch (const Error& e) {
            log::debug(std::string("eos resolution failed: ") + e.what());
        }
        return std::nullopt;
    }

    static constexpr const char* kEosLiteral = "<eos>";

    std::string origin_;
    std::int32_t vocab_size_ = 0;
    std::uint64_t vocab_hash_ = 0;
    bool normalized_ = false;
    std::optional<TokenId> eos_;
};

inline provider::ProviderPtr http_connect(const std::string& uri) {
    return std::make_shared<HttpProvider>(uri);
}

}  // namespace uprobe::wire
