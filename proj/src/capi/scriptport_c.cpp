// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/scriptport.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "scriptport/error.hpp"
#include "scriptport/model_bridge.hpp"
#include "scriptport/pipeline.hpp"

using nlohmann::json;
using namespace scriptport;

struct sp_context {
    Resources res;
    std::unique_ptr<BridgeClient> bridge;
    std::unique_ptr<RuleExtractor> rules;
    std::unique_ptr<RemoteExtractor> remote_extractor;
    std::unique_ptr<FallbackExtractor> extractor;
    std::unique_ptr<RemoteEmbedder> embedder;
    std::unique_ptr<RemoteRepairer> repairer;

    Services services() const {
        Services s;
        s.extractor = extractor.get();
        s.embedder = embedder.get();
        s.repairer = repairer.get();
        return s;
    }
};

namespace {

thread_local std::string g_last_error;

sp_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse: return SP_ERR_PARSE;
        case ErrorCode::registry_conflict: return SP_ERR_REGISTRY_CONFLICT;
        case ErrorCode::unknown_cluster: return SP_ERR_UNKNOWN_CLUSTER;
        case ErrorCode::template_invalid: return SP_ERR_TEMPLATE_INVALID;
        case ErrorCode::template_conflict: return SP_ERR_TEMPLATE_CONFLICT;
        case ErrorCode::incomplete_spec: return SP_ERR_INCOMPLETE_SPEC;
        case ErrorCode::inconsistent_topology: return SP_ERR_INCONSISTENT_TOPOLOGY;
        case ErrorCode::capacity: return SP_ERR_CAPACITY;
        case ErrorCode::policy_violation: return SP_ERR_POLICY_VIOLATION;
        case ErrorCode::unbound_parameter: return SP_ERR_UNBOUND_PARAMETER;
        case ErrorCode::no_candidates: return SP_ERR_NO_CANDIDATES;
        case ErrorCode::no_repair_available: return SP_ERR_NO_REPAIR_AVAILABLE;
        case ErrorCode::contract_violation: return SP_ERR_CONTRACT_VIOLATION;
        case ErrorCode::bridge_unavailable: return SP_ERR_BRIDGE_UNAVAILABLE;
        case ErrorCode::bridge_protocol: return SP_ERR_BRIDGE_PROTOCOL;
        case ErrorCode::io: return SP_ERR_IO;
        case ErrorCode::usage: return SP_ERR_USAGE;
    }
    return SP_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Runs `fn`, translating exceptions into status codes and the thread's last
// error message.
template <class Fn>
sp_status guarded(Fn&& fn) {
    g_last_error.clear();
    try {
        fn();
        return SP_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const json::exception& e) {
        g_last_error = std::string("malformed JSON argument: ") + e.what();
        return SP_ERR_PARSE;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return SP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SP_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return SP_ERR_INTERNAL;
    }
}

sp_status invalid(const char* what) {
    g_last_error = std::string("invalid argument: ") + what;
    return SP_ERR_INVALID_ARGUMENT;
}

json parse_arg(const char* text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, std::string(what) + ": " + e.what());
    }
}

std::string doc_string(const json& v, const char* key) {
    if (!v.is_string()) throw Error(ErrorCode::usage, std::string("option \"") + key + "\" must be a JSON document string");
    return v.get<std::string>();
}

Request parse_request(const char* request_json, sp_prompt_fn prompt, void* user_data) {
    Request req;
    if (request_json == nullptr || *request_json == '\0') return req;
    const json doc = parse_arg(request_json, "request");
    if (!doc.is_object()) throw Error(ErrorCode::usage, "request must be a JSON object");
    if (auto it = doc.find("flags"); it != doc.end() && !it->is_null()) {
        req.flags = partial_from_json(*it, ErrorCode::usage);
    }
    if (auto it = doc.find("answers"); it != doc.end() && !it->is_null()) {
        auto as_text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (it->is_object()) {
            for (const auto& [k, v] : it->items()) req.answers.emplace_back(k, as_text(v));
        } else if (it->is_array()) {
            for (const auto& pair : *it) {
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string()) {
                    throw Error(ErrorCode::usage, "answers must be [field, value] pairs");
                }
                req.answers.emplace_back(pair[0].get<std::string>(), as_text(pair[1]));
            }
        } else {
            throw Error(ErrorCode::usage, "answers must be an object or an array of pairs");
        }
    }
    req.interactive = doc.value("interactive", false);
    req.k = doc.value("k", req.k);
    req.max_iter = doc.value("max_iter", req.max_iter);
    if (req.k < 1) throw Error(ErrorCode::usage, "k must be at least 1");
    if (req.max_iter < 1) throw Error(ErrorCode::usage, "max_iter must be at least 1");
    if (auto it = doc.find("walltime_minutes"); it != doc.end() && !it->is_null()) {
        req.walltime_minutes = it->get<int>();
    }
    req.account = doc.value("account", std::string());
    if (req.interactive && prompt != nullptr) {
        req.prompt = [prompt, user_data](const std::string& field) -> std::optional<std::string> {
            const char* answer = prompt(field.c_str(), user_data);
            if (answer == nullptr) return std::nullopt;
            return std::string(answer);
        };
    }
    return req;
}

std::string outcome_json(const Outcome& o) {
    json out{{"success", o.success}, {"script", o.script}, {"spec", to_json(o.spec)}, {"report", o.report}};
    return out.dump();
}

}  // namespace

extern "C" {

const char* sp_version(void) { return SCRIPTPORT_VERSION; }

const char* sp_status_name(sp_status status) {
    switch (status) {
        case SP_OK: return "ok";
        case SP_ERR_PARSE: return "parse";
        case SP_ERR_REGISTRY_CONFLICT: return "registry_conflict";
        case SP_ERR_UNKNOWN_CLUSTER: return "unknown_cluster";
        case SP_ERR_TEMPLATE_INVALID: return "template_invalid";
        case SP_ERR_TEMPLATE_CONFLICT: return "template_conflict";
        case SP_ERR_INCOMPLETE_SPEC: return "incomplete_spec";
        case SP_ERR_INCONSISTENT_TOPOLOGY: return "inconsistent_topology";
        case SP_ERR_CAPACITY: return "capacity";
        case SP_ERR_POLICY_VIOLATION: return "policy_violation";
        case SP_ERR_UNBOUND_PARAMETER: return "unbound_parameter";
        case SP_ERR_NO_CANDIDATES: return "no_candidates";
        case SP_ERR_NO_REPAIR_AVAILABLE: return "no_repair_available";
        case SP_ERR_CONTRACT_VIOLATION: return "contract_violation";
        case SP_ERR_BRIDGE_UNAVAILABLE: return "bridge_unavailable";
        case SP_ERR_BRIDGE_PROTOCOL: return "bridge_protocol";
        case SP_ERR_IO: return "io";
        case SP_ERR_USAGE: return "usage";
        case SP_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case SP_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* sp_last_error(void) { return g_last_error.c_str(); }

void sp_string_free(char* s) { std::free(s); }

sp_status sp_context_new(const char* options_json, sp_context** out) {
    if (out == nullptr) return invalid("out");
    *out = nullptr;
    return guarded([&] {
        ResourceOptions options;
        std::optional<std::string> bridge_doc;
        if (options_json != nullptr && *options_json != '\0') {
            const json doc = parse_arg(options_json, "options");
            if (!doc.is_object()) throw Error(ErrorCode::usage, "options must be a JSON object");
            for (const auto& [key, value] : doc.items()) {
                if (key == "profiles" || key == "templates") {
                    if (!value.is_array()) throw Error(ErrorCode::usage, "option \"" + key + "\" must be an array");
                    auto& dst = key == "profiles" ? options.extra_profiles : options.extra_templates;
                    for (const auto& d : value) dst.push_back(doc_string(d, key.c_str()));
                } else if (key == "rules") {
                    options.rules = doc_string(value, "rules");
                } else if (key == "fingerprints") {
                    options.fingerprints = doc_string(value, "fingerprints");
                } else if (key == "repairs") {
                    options.repairs = doc_string(value, "repairs");
                } else if (key == "bridge") {
                    bridge_doc = doc_string(value, "bridge");
                } else {
                    throw Error(ErrorCode::usage, "unknown option \"" + key + "\"");
                }
            }
        }
        auto ctx = std::make_unique<sp_context>();
        ctx->res = load_resources(options);
        if (bridge_doc) {
            BridgeConfig config = load_bridge_config(*bridge_doc);
            ctx->bridge = std::make_unique<BridgeClient>(config, ctx->res.prompts);
            if (config.enabled("extract")) {
                ctx->rules = std::make_unique<RuleExtractor>(ctx->res.profiles);
                ctx->remote_extractor = std::make_unique<RemoteExtractor>(*ctx->bridge);
                ctx->extractor = std::make_unique<FallbackExtractor>(*ctx->remote_extractor, *ctx->rules);
            }
            if (config.enabled("embed")) ctx->embedder = std::make_unique<RemoteEmbedder>(*ctx->bridge);
            if (config.enabled("repair")) ctx->repairer = std::make_unique<RemoteRepairer>(*ctx->bridge);
        }
        *out = ctx.release();
    });
}

void sp_context_free(sp_context* ctx) { delete ctx; }

sp_status sp_generate(sp_context* ctx, const char* description, const char* request_json,
                      sp_prompt_fn prompt, void* user_data, char** result_json) {
    if (ctx == nullptr) return invalid("ctx");
    if (result_json == nullptr) return invalid("result_json");
    *result_json = nullptr;
    return guarded([&] {
        const Request req = parse_request(request_json, prompt, user_data);
        const Outcome o = generate(ctx->res, description ? description : "", req, ctx->services());
        *result_json = dup_string(outcome_json(o));
    });
}

sp_status sp_port(sp_context* ctx, const char* script, const char* target, const char* request_json,
                  sp_prompt_fn prompt, void* user_data, char** result_json) {
    if (ctx == nullptr) return invalid("ctx");
    if (script == nullptr) return invalid("script");
    if (target == nullptr) return invalid("target");
    if (result_json == nullptr) return invalid("result_json");
    *result_json = nullptr;
    return guarded([&] {
        const Request req = parse_request(request_json, prompt, user_data);
        const Outcome o = port(ctx->res, script, target, req, ctx->services());
        *result_json = dup_string(outcome_json(o));
    });
}

sp_status sp_extract(sp_context* ctx, const char* text, char** result_json) {
    if (ctx == nullptr) return invalid("ctx");
    if (text == nullptr) return invalid("text");
    if (result_json == nullptr) return invalid("result_json");
    *result_json = nullptr;
    return guarded([&] {
        if (*text == '\0') throw Error(ErrorCode::usage, "text must not be empty");
        PartialJobSpec p;
        if (ctx->extractor) {
            p = ctx->extractor->extract(text);
        } else {
            p = RuleExtractor(ctx->res.profiles).extract(text);
        }
        *result_json = dup_string(to_json(p).dump());
    });
}

sp_status sp_parse_script(sp_context* ctx, const char* script, char** result_json) {
    if (ctx == nullptr) return invalid("ctx");
    if (script == nullptr) return invalid("script");
    if (result_json == nullptr) return invalid("result_json");
    *result_json = nullptr;
    return guarded([&] { *result_json = dup_string(to_json(parse_script(script)).dump()); });
}

sp_status sp_clusters_list(sp_context* ctx, char** result_json) {
    if (ctx == nullptr) return invalid("ctx");
    if (result_json == nullptr) return invalid("result_json");
    *result_json = nullptr;
    return guarded([&] {
        json out = json::array();
        for (const auto& p : ctx->res.profiles.profiles()) out.push_back(to_json(p));
        *result_json = dup_string(out.dump());
    });
}

sp_status sp_clusters_add(sp_context* ctx, const char* registry_document, const char* profile_json,
                          char** result_document) {
    if (ctx == nullptr) return invalid("ctx");
    if (profile_json == nullptr) return invalid("profile_json");
    if (result_document == nullptr) return invalid("result_document");
    *result_document = nullptr;
    return guarded([&] {
        const json rec = parse_arg(profile_json, "profile");
        const ProfileSet added = ProfileSet::load(json::array({rec}).dump());
        const ProfileSet base =
            registry_document != nullptr ? ProfileSet::load(registry_document) : ProfileSet();
        const ProfileSet updated = base.merged(added);
        // The new record must also coexist with everything the context knows.
        const ClusterProfile& p = added.profiles().front();
        if (base.find(p.id) == nullptr) (void)ctx->res.profiles.merged(added);
        *result_document = dup_string(updated.to_document());
    });
}

sp_status sp_templates_list(sp_context* ctx, const char* cluster, char** result_json) {
    if (ctx == nullptr) return invalid("ctx");
    if (result_json == nullptr) return invalid("result_json");
    *result_json = nullptr;
    return guarded([&] {
        std::optional<std::string> id;
        if (cluster != nullptr && *cluster != '\0') id = ctx->res.profiles.resolve(cluster).id;
        json out = json::array();
        for (const auto& t : ctx->res.templates.templates()) {
            if (!id || t.cluster == *id) out.push_back(to_json(t));
        }
        *result_json = dup_string(out.dump());
    });
}

sp_status sp_templates_validate(sp_context* ctx, const char* document, char** result_json) {
    if (ctx == nullptr) return invalid("ctx");
    if (document == nullptr) return invalid("document");
    if (result_json == nullptr) return invalid("result_json");
    *result_json = nullptr;
    return guarded([&] {
        const TemplateSet set = TemplateSet::load(document);
        for (const auto& t : set.templates()) {
            if (ctx->res.profiles.find(t.cluster) == nullptr) {
                throw Error(ErrorCode::template_invalid,
                            "template \"" + t.id + "\" targets unknown cluster \"" + t.cluster + "\"");
            }
        }
        *result_json = dup_string(json{{"templates", set.templates().size()}}.dump());
    });
}

sp_status sp_templates_add(sp_context* ctx, const char* repository_document, const char* template_json,
                           char** result_document) {
    if (ctx == nullptr) return invalid("ctx");
    if (template_json == nullptr) return invalid("template_json");
    if (result_document == nullptr) return invalid("result_document");
    *result_document = nullptr;
    return guarded([&] {
        const json rec = parse_arg(template_json, "template");
        Template t = template_from_json(rec, "template");
        t.verified = false;  // only templates that passed verification carry the flag
        if (ctx->res.profiles.find(t.cluster) == nullptr) {
            throw Error(ErrorCode::template_invalid,
                        "template \"" + t.id + "\" targets unknown cluster \"" + t.cluster + "\"");
        }
        const TemplateSet base =
            repository_document != nullptr ? TemplateSet::load(repository_document) : TemplateSet();
        const TemplateSet updated = base.add(t);
        (void)ctx->res.templates.add(t);  // must also coexist with the loaded repository
        *result_document = dup_string(updated.to_document());
    });
}

}  // extern "C"
