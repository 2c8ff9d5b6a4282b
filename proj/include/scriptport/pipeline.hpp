// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end flows: description -> verified script, and script -> script for
// another cluster.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scriptport/cluster_registry.hpp"
#include "scriptport/debug_loop.hpp"
#include "scriptport/intent.hpp"
#include "scriptport/model_bridge.hpp"
#include "scriptport/retrieval.hpp"
#include "scriptport/simcluster.hpp"
#include "scriptport/template_store.hpp"

namespace scriptport {

struct Resources {
    ProfileSet profiles;
    TemplateSet templates;
    FaultRuleSet rules;
    FingerprintSet fingerprints;
    RepairTable repairs;
    BridgePrompts prompts;

    /// Everything compiled into the library.
    static Resources bundled();
};

/// Documents supplied on top of (or instead of) the bundle.
struct ResourceOptions {
    std::vector<std::string> extra_profiles;   // merged into the bundled registry
    std::vector<std::string> extra_templates;  // merged into the bundled repository
    std::optional<std::string> rules;          // replaces the bundled fault rules
    std::optional<std::string> fingerprints;   // replaces the bundled fingerprints
    std::optional<std::string> repairs;        // replaces the bundled repair table
};

Resources load_resources(const ResourceOptions& options);

struct Services {
    Extractor* extractor = nullptr;  // rule-based extractor when null
    Embedder* embedder = nullptr;
    Repairer* repairer = nullptr;
};

struct Request {
    PartialJobSpec flags;                                      // explicit values; win over extraction
    std::vector<std::pair<std::string, std::string>> answers;  // fill missing fields / repair inputs
    bool interactive = false;
    /// Asked one missing field at a time; nullopt or "" leaves it missing.
    std::function<std::optional<std::string>(const std::string& field)> prompt;
    int k = 3;
    int max_iter = kDefaultMaxIterations;
    std::optional<int> walltime_minutes;  // wrap the result in a batch header
    std::string account;
};

struct Outcome {
    bool success = false;
    JobSpec spec;
    std::string script;  // final text (batch-wrapped when requested); empty if unresolved
    nlohmann::json report;
};

/// Extract -> fill -> finalize -> rank -> bind/render/lint -> verify loop.
/// Configuration and input problems throw; an unverifiable job is returned
/// with success == false.
Outcome generate(const Resources& res, std::string_view description, const Request& req,
                 const Services& services = {});

/// Reads the topology out of `script` and regenerates it for `target`.
/// A per-node count above the target's capacity raises a capacity error that
/// lists world-size-preserving alternatives.
Outcome port(const Resources& res, std::string_view script, std::string_view target,
             const Request& req, const Services& services = {});

}  // namespace scriptport
