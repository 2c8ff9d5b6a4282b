// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/model_bridge.hpp"

#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

#include "json_util.hpp"
#include "scriptport/error.hpp"

namespace scriptport {

using detail::json;

namespace {

constexpr const char* kCapabilities[] = {"extract", "embed", "repair"};

}  // namespace

BridgeConfig load_bridge_config(std::string_view document) {
    const json doc = detail::parse_document(document, "bridge config");
    const std::string ctx = "bridge config";
    if (!doc.is_object()) detail::field_error(ctx, "<document>", "expected object");
    BridgeConfig c;
    c.endpoint = detail::opt_string(doc, ctx, "endpoint");
    if (c.endpoint && c.endpoint->empty()) c.endpoint.reset();
    c.api_key_env = detail::opt_string(doc, ctx, "api_key_env");
    if (auto t = detail::opt_int(doc, ctx, "timeout_ms")) {
        if (*t < 1) detail::field_error(ctx, "timeout_ms", "must be positive");
        c.timeout_ms = static_cast<int>(*t);
    }
    if (auto r = detail::opt_int(doc, ctx, "retries")) {
        if (*r < 0 || *r > 10) detail::field_error(ctx, "retries", "must be in [0, 10]");
        c.retries = static_cast<int>(*r);
    }
    for (const auto& cap : detail::opt_string_list(doc, ctx, "capabilities")) {
        bool known = false;
        for (const char* k : kCapabilities) known = known || cap == k;
        if (!known) detail::field_error(ctx, "capabilities", "unknown capability \"" + cap + "\"");
        c.capabilities.insert(cap);
    }
    if (!c.capabilities.empty() && !c.endpoint) {
        detail::field_error(ctx, "endpoint", "required when capabilities are enabled");
    }
    return c;
}

BridgePrompts BridgePrompts::load(std::string_view document) {
    const json doc = detail::parse_document(document, "bridge prompts");
    if (!doc.is_object()) detail::field_error("bridge prompts", "<document>", "expected object");
    BridgePrompts p;
    p.extract = detail::req_string(doc, "bridge prompts", "extract");
    p.embed = detail::req_string(doc, "bridge prompts", "embed");
    p.repair = detail::req_string(doc, "bridge prompts", "repair");
    return p;
}

BridgeClient::BridgeClient(BridgeConfig config, BridgePrompts prompts)
    : config_(std::move(config)), prompts_(std::move(prompts)) {
    if (!config_.endpoint) return;
    static const std::regex kUrl(R"(^(http://[^/\s]+)(/\S*)?$)");
    std::smatch m;
    if (!std::regex_match(*config_.endpoint, m, kUrl)) {
        throw Error(ErrorCode::usage,
                    "bridge endpoint must look like http://host[:port][/path], got \"" +
                        *config_.endpoint + "\"");
    }
    endpoint_.scheme_host_port = m[1].str();
    endpoint_.path = m[2].matched ? m[2].str() : "/";
}

json BridgeClient::call(std::string_view capability, const json& input) const {
    if (!config_.enabled(capability) || !config_.endpoint) {
        throw Error(ErrorCode::bridge_unavailable,
                    "bridge capability \"" + std::string(capability) + "\" is not enabled");
    }
    const std::string& system = capability == "extract" ? prompts_.extract
                                : capability == "embed" ? prompts_.embed
                                                        : prompts_.repair;
    const json request{{"capability", capability}, {"payload", {{"system", system}, {"input", input}}}};
    const std::string body = request.dump();

    httplib::Headers headers;
    if (config_.api_key_env) {
        if (const char* key = std::getenv(config_.api_key_env->c_str()); key != nullptr && *key != 0) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    std::string last_error;
    const int attempts = 1 + config_.retries;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        httplib::Client cli(endpoint_.scheme_host_port);
        const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
        cli.set_connection_timeout(timeout);
        cli.set_read_timeout(timeout);
        cli.set_write_timeout(timeout);
        auto res = cli.Post(endpoint_.path, headers, body, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
        } else if (res->status != 200) {
            last_error = "HTTP status " + std::to_string(res->status);
        } else {
            if (detail::trim(res->body).empty()) {
                throw Error(ErrorCode::bridge_protocol, "empty response body");
            }
            json reply;
            try {
                reply = json::parse(res->body);
            } catch (const json::exception& e) {
                throw Error(ErrorCode::bridge_protocol, std::string("response is not JSON: ") + e.what());
            }
            if (!reply.is_object() || !reply.contains("ok") || !reply["ok"].is_boolean()) {
                throw Error(ErrorCode::bridge_protocol, "response lacks a boolean \"ok\" field");
            }
            if (reply["ok"].get<bool>()) {
                if (!reply.contains("result")) {
                    throw Error(ErrorCode::bridge_protocol, "ok response lacks \"result\"");
                }
                return reply["result"];
            }
            last_error = "remote error: " +
                         (reply.contains("error") ? reply["error"].dump() : std::string("unspecified"));
        }
        if (attempt < attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(config_.timeout_ms) * attempt);
        }
    }
    throw Error(ErrorCode::bridge_unavailable,
                "bridge " + std::string(capability) + " failed after " + std::to_string(attempts) +
                    " attempt(s): " + last_error);
}

PartialJobSpec RemoteExtractor::extract(std::string_view text) {
    const json result = client_.call("extract", json{{"text", text}});
    return partial_from_json(result, ErrorCode::bridge_protocol);
}

PartialJobSpec FallbackExtractor::extract(std::string_view text) {
    reason_.clear();
    try {
        return primary_.extract(text);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::bridge_unavailable && e.code() != ErrorCode::bridge_protocol) throw;
        reason_ = e.what();
    }
    return fallback_.extract(text);
}

std::vector<double> RemoteEmbedder::embed(std::string_view text) {
    const json result = client_.call("embed", json{{"text", text}});
    const json* vec = &result;
    if (result.is_object()) {
        auto it = result.find("vector");
        if (it == result.end()) throw Error(ErrorCode::bridge_protocol, "embed result lacks \"vector\"");
        vec = &*it;
    }
    if (!vec->is_array() || vec->empty()) {
        throw Error(ErrorCode::bridge_protocol, "embed result must be a non-empty number array");
    }
    std::vector<double> out;
    out.reserve(vec->size());
    for (const auto& x : *vec) {
        if (!x.is_number()) throw Error(ErrorCode::bridge_protocol, "embed vector holds a non-number");
        out.push_back(x.get<double>());
    }
    return out;
}

RemoteProposal RemoteRepairer::propose(const json& context) {
    const json result = client_.call("repair", context);
    if (!result.is_object()) throw Error(ErrorCode::bridge_protocol, "repair result must be an object");
    RemoteProposal p;
    auto props = result.find("proposals");
    if (props == result.end() || !props->is_array()) {
        throw Error(ErrorCode::bridge_protocol, "repair result lacks a \"proposals\" array");
    }
    for (const auto& x : *props) {
        if (!x.is_string()) throw Error(ErrorCode::bridge_protocol, "proposal is not a string");
        p.proposals.push_back(x.get<std::string>());
    }
    if (auto c = result.find("category"); c != result.end() && c->is_string()) {
        p.category = parse_category(c->get<std::string>());
    }
    if (auto e = result.find("explanation"); e != result.end() && e->is_string()) {
        p.explanation = e->get<std::string>();
    }
    return p;
}

}  // namespace scriptport
