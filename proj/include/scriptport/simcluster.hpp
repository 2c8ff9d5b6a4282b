// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic mock execution: checks the launch topology a rendered script
// implies and replays cluster-specific failures from a rule document.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scriptport/cluster_registry.hpp"
#include "scriptport/intent.hpp"
#include "scriptport/synthesis.hpp"

namespace scriptport {

enum class Category { env, framework, user, unknown };

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

enum class RepairKind {
    set_param,
    prepend_line,
    export_env,
    add_module_load,
    pin_version,
    switch_template,
    add_arg,
};

std::string_view to_string(RepairKind k);
std::optional<RepairKind> parse_repair_kind(std::string_view s);

enum class AtomKind { cluster_is, strategy_is, launcher_is, script_contains, script_lacks, nodes_gt };

struct TriggerAtom {
    AtomKind kind;
    std::string text;  // every kind except nodes_gt
    int number = 0;    // nodes_gt
    bool operator==(const TriggerAtom&) const = default;
};

struct FaultRule {
    std::string id;
    std::string cluster;  // profile id or "*"
    std::vector<TriggerAtom> trigger;  // conjunction
    std::string stderr_template;
    Category category_hint = Category::env;
    std::vector<RepairKind> clearable_by;  // empty = unresolvable
    int exit_code = 1;

    bool resolvable() const { return !clearable_by.empty(); }
    bool operator==(const FaultRule&) const = default;
};

/// Names usable as {placeholders} inside stderr templates.
const std::vector<std::string>& stderr_vocabulary();

class FaultRuleSet {
public:
    FaultRuleSet() = default;

    /// Cluster ids are checked against `profiles`; an empty document yields an
    /// empty set.
    static FaultRuleSet load(std::string_view document, const ProfileSet& profiles);

    const std::vector<FaultRule>& rules() const { return rules_; }
    const FaultRule* find(std::string_view id) const;
    std::size_t size() const { return rules_.size(); }

private:
    std::vector<FaultRule> rules_;
};

bool rule_matches(const FaultRule& rule, std::string_view script, const JobSpec& spec,
                  const ClusterProfile& profile);

struct ParsedTopology {
    int nodes = 0;
    int per_node = 0;
    int world = 0;
    std::vector<int> ranks;
    bool operator==(const ParsedTopology&) const = default;
};

struct ExecutionResult {
    int exit_code = 0;
    std::string stdout_text;
    std::string stderr_text;
    std::optional<ParsedTopology> topology;
    std::optional<std::string> fault_fired;
    bool operator==(const ExecutionResult&) const = default;
};

nlohmann::json to_json(const ExecutionResult& r);

inline constexpr int kTopologyFailureExit = 2;

ExecutionResult submit(const RenderedScript& r, const JobSpec& spec, const ClusterProfile& profile,
                       const FaultRuleSet& rules);

/// Anything that can run a rendered script. The simulator is the only
/// implementation shipped.
class Harness {
public:
    virtual ~Harness() = default;
    virtual ExecutionResult run(const RenderedScript& r, const JobSpec& spec,
                                const ClusterProfile& profile) = 0;
};

class SimHarness final : public Harness {
public:
    explicit SimHarness(const FaultRuleSet& rules) : rules_(rules) {}
    ExecutionResult run(const RenderedScript& r, const JobSpec& spec,
                        const ClusterProfile& profile) override {
        return submit(r, spec, profile, rules_);
    }

private:
    const FaultRuleSet& rules_;
};

}  // namespace scriptport
