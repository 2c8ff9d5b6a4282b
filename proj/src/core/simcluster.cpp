// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/simcluster.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "scriptport/error.hpp"
#include "scriptport/launch_scan.hpp"
#include "scriptport/template_store.hpp"

namespace scriptport {

using detail::json;

std::string_view to_string(Category c) {
    switch (c) {
        case Category::env: return "env";
        case Category::framework: return "framework";
        case Category::user: return "user";
        case Category::unknown: return "unknown";
    }
    return "?";
}

std::optional<Category> parse_category(std::string_view s) {
    if (s == "env") return Category::env;
    if (s == "framework") return Category::framework;
    if (s == "user") return Category::user;
    if (s == "unknown") return Category::unknown;
    return std::nullopt;
}

namespace {

constexpr std::pair<RepairKind, std::string_view> kRepairKinds[] = {
    {RepairKind::set_param, "set_param"},
    {RepairKind::prepend_line, "prepend_line"},
    {RepairKind::export_env, "export_env"},
    {RepairKind::add_module_load, "add_module_load"},
    {RepairKind::pin_version, "pin_version"},
    {RepairKind::switch_template, "switch_template"},
    {RepairKind::add_arg, "add_arg"},
};

constexpr std::pair<AtomKind, std::string_view> kAtomKinds[] = {
    {AtomKind::cluster_is, "cluster_is"},
    {AtomKind::strategy_is, "strategy_is"},
    {AtomKind::launcher_is, "launcher_is"},
    {AtomKind::script_contains, "script_contains"},
    {AtomKind::script_lacks, "script_lacks"},
    {AtomKind::nodes_gt, "nodes_gt"},
};

}  // namespace

std::string_view to_string(RepairKind k) {
    for (const auto& [kind, name] : kRepairKinds) {
        if (kind == k) return name;
    }
    return "?";
}

std::optional<RepairKind> parse_repair_kind(std::string_view s) {
    for (const auto& [kind, name] : kRepairKinds) {
        if (name == s) return kind;
    }
    return std::nullopt;
}

const std::vector<std::string>& stderr_vocabulary() {
    static const std::vector<std::string> kVocab{
        "cluster",   "gpu_type",     "scheduler",     "launcher",         "framework",
        "strategy",  "nodes",        "gpus_per_node", "world_size",       "master_port",
        "entry_script", "deepspeed_config"};
    return kVocab;
}

FaultRuleSet FaultRuleSet::load(std::string_view document, const ProfileSet& profiles) {
    const json doc = detail::parse_array_document(document, "fault-rule document");
    FaultRuleSet set;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string ctx = "rule[" + std::to_string(i) + "]";
        const json& rec = doc[i];
        if (!rec.is_object()) detail::field_error(ctx, "<record>", "expected object");
        FaultRule r;
        r.id = detail::req_string(rec, ctx, "id");
        if (!ids.insert(r.id).second) detail::field_error(ctx, "id", "duplicate rule id \"" + r.id + "\"");
        r.cluster = detail::req_string(rec, ctx, "cluster");
        if (r.cluster != "*" && profiles.find(r.cluster) == nullptr) {
            detail::field_error(ctx, "cluster", "unknown cluster id \"" + r.cluster + "\"");
        }
        r.stderr_template = detail::req_string(rec, ctx, "stderr_template");
        for (const auto& name : placeholders(r.stderr_template)) {
            const auto& vocab = stderr_vocabulary();
            if (std::find(vocab.begin(), vocab.end(), name) == vocab.end()) {
                detail::field_error(ctx, "stderr_template", "unknown placeholder {" + name + "}");
            }
        }
        r.category_hint = detail::req_enum<Category>(rec, ctx, "category_hint", parse_category);
        if (r.category_hint == Category::unknown) {
            detail::field_error(ctx, "category_hint", "must be env, framework or user");
        }
        for (const auto& k : detail::opt_string_list(rec, ctx, "clearable_by")) {
            auto kind = parse_repair_kind(k);
            if (!kind) detail::field_error(ctx, "clearable_by", "unknown repair kind \"" + k + "\"");
            r.clearable_by.push_back(*kind);
        }
        if (auto code = detail::opt_int(rec, ctx, "exit_code")) {
            if (*code < 1 || *code > 255) detail::field_error(ctx, "exit_code", "must be in [1, 255]");
            r.exit_code = static_cast<int>(*code);
        }

        auto trig = rec.find("trigger");
        if (trig == rec.end() || !trig->is_array() || trig->empty()) {
            detail::field_error(ctx, "trigger", "expected a non-empty array of atoms");
        }
        for (std::size_t a = 0; a < trig->size(); ++a) {
            const json& atom = (*trig)[a];
            const std::string actx = ctx + ".trigger[" + std::to_string(a) + "]";
            if (!atom.is_object() || atom.size() != 1) {
                detail::field_error(actx, "<atom>", "expected an object with exactly one key");
            }
            const std::string key = atom.begin().key();
            const json& value = atom.begin().value();
            TriggerAtom t{};
            bool known = false;
            for (const auto& [kind, name] : kAtomKinds) {
                if (name == key) {
                    t.kind = kind;
                    known = true;
                }
            }
            if (!known) detail::field_error(actx, key, "unknown trigger atom");
            if (t.kind == AtomKind::nodes_gt) {
                if (!value.is_number_integer()) detail::field_error(actx, key, "expected integer");
                t.number = value.get<int>();
            } else {
                if (!value.is_string() || value.get<std::string>().empty()) {
                    detail::field_error(actx, key, "expected non-empty string");
                }
                t.text = value.get<std::string>();
                if (t.kind == AtomKind::cluster_is && profiles.find(t.text) == nullptr) {
                    detail::field_error(actx, key, "unknown cluster id \"" + t.text + "\"");
                }
                if (t.kind == AtomKind::strategy_is && !parse_strategy(t.text)) {
                    detail::field_error(actx, key, "unknown strategy \"" + t.text + "\"");
                }
                if (t.kind == AtomKind::launcher_is && !parse_launcher(t.text)) {
                    detail::field_error(actx, key, "unknown launcher \"" + t.text + "\"");
                }
            }
            r.trigger.push_back(std::move(t));
        }
        set.rules_.push_back(std::move(r));
    }
    return set;
}

const FaultRule* FaultRuleSet::find(std::string_view id) const {
    for (const auto& r : rules_) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

bool rule_matches(const FaultRule& rule, std::string_view script, const JobSpec& spec,
                  const ClusterProfile& profile) {
    if (rule.cluster != "*" && rule.cluster != profile.id) return false;
    std::optional<Launcher> script_launcher;
    bool scanned = false;
    for (const auto& a : rule.trigger) {
        switch (a.kind) {
            case AtomKind::cluster_is:
                if (profile.id != a.text) return false;
                break;
            case AtomKind::strategy_is:
                if (to_string(spec.strategy) != a.text) return false;
                break;
            case AtomKind::launcher_is:
                if (to_string(spec.launcher) != a.text) {
                    if (!scanned) {
                        script_launcher = scan_launch(script).launcher;
                        scanned = true;
                    }
                    if (!script_launcher || to_string(*script_launcher) != a.text) return false;
                }
                break;
            case AtomKind::script_contains:
                if (script.find(a.text) == std::string_view::npos) return false;
                break;
            case AtomKind::script_lacks:
                if (script.find(a.text) != std::string_view::npos) return false;
                break;
            case AtomKind::nodes_gt:
                if (spec.nodes <= a.number) return false;
                break;
        }
    }
    return true;
}

json to_json(const ExecutionResult& r) {
    json out{{"exit_code", r.exit_code}, {"stdout", r.stdout_text}, {"stderr", r.stderr_text}};
    if (r.topology) {
        out["topology"] = {{"nodes", r.topology->nodes},
                           {"per_node", r.topology->per_node},
                           {"world", r.topology->world},
                           {"ranks", r.topology->ranks}};
    }
    if (r.fault_fired) out["fault_fired"] = *r.fault_fired;
    return out;
}

namespace {

ParamBinding stderr_values(const JobSpec& spec, const ClusterProfile& profile) {
    auto v = [](std::string s) { return BoundValue{std::move(s), Provenance::derived}; };
    return ParamBinding{
        {"cluster", v(profile.id)},
        {"gpu_type", v(profile.gpu_type)},
        {"scheduler", v(std::string(to_string(profile.scheduler)))},
        {"launcher", v(std::string(to_string(spec.launcher)))},
        {"framework", v(std::string(to_string(spec.framework)))},
        {"strategy", v(std::string(to_string(spec.strategy)))},
        {"nodes", v(std::to_string(spec.nodes))},
        {"gpus_per_node", v(std::to_string(spec.gpus_per_node))},
        {"world_size", v(std::to_string(spec.world_size()))},
        {"master_port", v(std::to_string(spec.master_port))},
        {"entry_script", v(spec.entry_script)},
        {"deepspeed_config", v(spec.deepspeed_config.value_or("ds_config.json"))},
    };
}

ExecutionResult topology_failure(std::string why, std::optional<ParsedTopology> topo) {
    ExecutionResult res;
    res.exit_code = kTopologyFailureExit;
    res.stderr_text = "launch error: " + why;
    res.topology = std::move(topo);
    return res;
}

}  // namespace

ExecutionResult submit(const RenderedScript& r, const JobSpec& spec, const ClusterProfile& profile,
                       const FaultRuleSet& rules) {
    for (const auto& rule : rules.rules()) {
        if (!rule_matches(rule, r.text, spec, profile)) continue;
        ExecutionResult res;
        res.exit_code = rule.exit_code;
        res.stderr_text = render_text(rule.stderr_template, stderr_values(spec, profile));
        res.fault_fired = rule.id;
        return res;
    }

    // The scheduler grants spec.nodes nodes; whatever the launcher leaves
    // implicit is taken from that allocation.
    const LaunchScan scan = scan_launch(r.text);
    if (!scan.launcher) return topology_failure("no launch command found in script", std::nullopt);

    ParsedTopology t;
    t.nodes = scan.nodes.value_or(scan.alloc_nodes.value_or(spec.nodes));
    if (scan.per_node) {
        t.per_node = *scan.per_node;
    } else if (scan.world && t.nodes > 0 && *scan.world % t.nodes == 0) {
        t.per_node = *scan.world / t.nodes;
    } else {
        t.per_node = spec.gpus_per_node;
    }
    t.world = scan.world.value_or(t.nodes * t.per_node);

    if (t.nodes != spec.nodes) {
        return topology_failure("launcher spans " + std::to_string(t.nodes) + " nodes but " +
                                    std::to_string(spec.nodes) + " were allocated",
                                t);
    }
    if (t.per_node > profile.gpus_per_node) {
        return topology_failure(std::to_string(t.per_node) + " processes per node but only " +
                                    std::to_string(profile.gpus_per_node) + " GPUs per node",
                                t);
    }
    if (t.world != t.nodes * t.per_node) {
        return topology_failure("world size " + std::to_string(t.world) + " != " +
                                    std::to_string(t.nodes) + " x " + std::to_string(t.per_node),
                                t);
    }
    if (t.world != spec.world_size()) {
        return topology_failure("world size " + std::to_string(t.world) + " but the job expects " +
                                    std::to_string(spec.world_size()),
                                t);
    }

    ExecutionResult res;
    for (int i = 0; i < t.world; ++i) {
        t.ranks.push_back(i);
        res.stdout_text += "rank " + std::to_string(i) + "/" + std::to_string(t.world) + " ok\n";
    }
    res.stdout_text += "allreduce ok\nallgather ok";
    res.topology = std::move(t);
    return res;
}

}  // namespace scriptport
