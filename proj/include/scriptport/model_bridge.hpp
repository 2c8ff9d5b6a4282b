// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// HTTP client for remote extraction, embedding and repair services, plus the
// adapters that plug it into the extractor/embedder/repairer interfaces.

#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "scriptport/debug_loop.hpp"
#include "scriptport/intent.hpp"
#include "scriptport/retrieval.hpp"

namespace scriptport {

struct BridgeConfig {
    std::optional<std::string> endpoint;     // http://host[:port][/path]
    std::optional<std::string> api_key_env;  // name of the variable holding the key
    int timeout_ms = 5000;
    int retries = 1;
    std::set<std::string> capabilities;  // subset of {extract, embed, repair}

    bool enabled(std::string_view capability) const {
        return capabilities.count(std::string(capability)) != 0;
    }
};

/// Reads a bridge config document; enabled capabilities require an endpoint.
BridgeConfig load_bridge_config(std::string_view document);

/// System prompts keyed by capability.
struct BridgePrompts {
    std::string extract;
    std::string embed;
    std::string repair;
    static BridgePrompts load(std::string_view document);
};

/// Sends {capability, payload: {system, input}} and returns `result` from an
/// {ok: true, result} reply. Transport failures and {ok: false} replies raise
/// bridge-unavailable after the configured retries; undecodable replies raise
/// bridge-protocol. Safe to call from several threads.
class BridgeClient {
public:
    BridgeClient(BridgeConfig config, BridgePrompts prompts);

    nlohmann::json call(std::string_view capability, const nlohmann::json& input) const;
    const BridgeConfig& config() const { return config_; }

private:
    struct Endpoint {
        std::string scheme_host_port;
        std::string path;
    };

    BridgeConfig config_;
    BridgePrompts prompts_;
    Endpoint endpoint_;
};

class RemoteExtractor final : public Extractor {
public:
    explicit RemoteExtractor(const BridgeClient& client) : client_(client) {}
    PartialJobSpec extract(std::string_view text) override;

private:
    const BridgeClient& client_;
};

/// Uses `primary` and falls back to `fallback` on any bridge error.
class FallbackExtractor final : public Extractor {
public:
    FallbackExtractor(Extractor& primary, Extractor& fallback) : primary_(primary), fallback_(fallback) {}
    PartialJobSpec extract(std::string_view text) override;
    /// Why the last call fell back; empty when the primary answered.
    const std::string& last_fallback_reason() const { return reason_; }

private:
    Extractor& primary_;
    Extractor& fallback_;
    std::string reason_;
};

class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(const BridgeClient& client) : client_(client) {}
    std::vector<double> embed(std::string_view text) override;

private:
    const BridgeClient& client_;
};

class RemoteRepairer final : public Repairer {
public:
    explicit RemoteRepairer(const BridgeClient& client) : client_(client) {}
    RemoteProposal propose(const nlohmann::json& context) override;

private:
    const BridgeClient& client_;
};

}  // namespace scriptport
