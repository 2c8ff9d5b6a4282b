// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/static_verify.hpp"

#include <algorithm>
#include <regex>

#include <nlohmann/json.hpp>

#include "scriptport/launch_scan.hpp"
#include "scriptport/template_store.hpp"

namespace scriptport {

std::string_view to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

nlohmann::json to_json(const Finding& f) {
    nlohmann::json out{{"severity", to_string(f.severity)}, {"code", f.code}, {"message", f.message}};
    if (f.span) out["span"] = {{"offset", f.span->offset}, {"length", f.span->length}};
    return out;
}

const std::vector<CatalogEntry>& finding_catalog() {
    static const std::vector<CatalogEntry> kCatalog{
        {"UNRESOLVED_PLACEHOLDER", Severity::error,
         "bind every template parameter before rendering"},
        {"LAUNCH_SCHED_CONFLICT", Severity::error,
         "use a launcher and scheduler constructs that match the cluster's scheduler"},
        {"TOPOLOGY_MISMATCH", Severity::error,
         "make node, per-node and world counts in the script agree with the job"},
        {"GPU_CAPACITY_EXCEEDED", Severity::error,
         "lower GPUs per node to the cluster limit and add nodes instead"},
        {"PORT_OUT_OF_RANGE", Severity::error, "choose a master port in [1024, 65535]"},
        {"ENV_PROPAGATION_RISK", Severity::warning,
         "export PYTHONPATH / LD_LIBRARY_PATH inside the multi-node launch command"},
    };
    return kCatalog;
}

namespace {

Finding error(std::string code, std::string message, std::optional<Span> span = std::nullopt) {
    return Finding{Severity::error, std::move(code), std::move(message), span};
}

std::optional<Span> locate(const std::string& text, std::string_view needle) {
    auto pos = text.find(needle);
    if (pos == std::string::npos) return std::nullopt;
    return Span{pos, needle.size()};
}

}  // namespace

std::vector<Finding> lint(const RenderedScript& r, const JobSpec& spec,
                          const ClusterProfile& profile) {
    std::vector<Finding> out;
    const std::string& text = r.text;

    // 1. Unresolved placeholders.
    for (const auto& s : placeholder_spans(text)) {
        out.push_back(error("UNRESOLVED_PLACEHOLDER",
                            "placeholder {" + std::string(s.name) + "} was not substituted",
                            Span{s.offset, s.length}));
    }

    const LaunchScan scan = scan_launch(text);

    // 2. Launcher / scheduler compatibility.
    if (profile.scheduler == Scheduler::pbs) {
        if (spec.launcher == Launcher::accelerate || scan.accelerate_launch) {
            out.push_back(error("LAUNCH_SCHED_CONFLICT",
                                "the accelerate launcher cannot derive ranks under the PBS "
                                "scheduler on " + profile.id,
                                locate(text, "accelerate")));
        }
        if (scan.slurm_constructs) {
            out.push_back(error("LAUNCH_SCHED_CONFLICT",
                                "Slurm constructs (srun, scontrol, $SLURM_*) in a script for the "
                                "PBS cluster " + profile.id,
                                locate(text, "srun")));
        }
    } else if (scan.pbs_constructs) {
        out.push_back(error("LAUNCH_SCHED_CONFLICT",
                            "PBS constructs ($PBS_*, qsub) in a script for the Slurm cluster " +
                                profile.id,
                            locate(text, "PBS")));
    }

    // 3. Topology consistency wherever counts are visible.
    auto mismatch = [&](const std::string& what, int seen, int want) {
        out.push_back(error("TOPOLOGY_MISMATCH", what + " is " + std::to_string(seen) +
                                                     " in the script but " + std::to_string(want) +
                                                     " in the job"));
    };
    if (scan.alloc_nodes && *scan.alloc_nodes != spec.nodes) {
        mismatch("allocated node count", *scan.alloc_nodes, spec.nodes);
    }
    if (scan.nodes && *scan.nodes != spec.nodes) mismatch("launcher node count", *scan.nodes, spec.nodes);
    if (scan.per_node && *scan.per_node != spec.gpus_per_node) {
        mismatch("per-node process count", *scan.per_node, spec.gpus_per_node);
    }
    if (scan.world && *scan.world != spec.world_size()) {
        mismatch("world size", *scan.world, spec.world_size());
    }
    if (scan.srun_tasks && *scan.srun_tasks != spec.nodes && *scan.srun_tasks != spec.world_size()) {
        out.push_back(error("TOPOLOGY_MISMATCH",
                            "srun task count " + std::to_string(*scan.srun_tasks) +
                                " is neither the node count nor the world size"));
    }
    {
        const auto nodes = scan.nodes ? scan.nodes : scan.alloc_nodes;
        if (nodes && scan.per_node && scan.world && *scan.world != *nodes * *scan.per_node) {
            out.push_back(error("TOPOLOGY_MISMATCH",
                                "world size " + std::to_string(*scan.world) + " != " +
                                    std::to_string(*nodes) + " nodes x " +
                                    std::to_string(*scan.per_node) + " per node"));
        }
    }

    // 4. Per-node capacity.
    const int per_node = std::max(spec.gpus_per_node, scan.per_node.value_or(0));
    if (per_node > profile.gpus_per_node) {
        out.push_back(error("GPU_CAPACITY_EXCEEDED",
                            std::to_string(per_node) + " GPUs per node requested, " + profile.id +
                                " has " + std::to_string(profile.gpus_per_node)));
    }

    // 5. Port range.
    for (int port : {spec.master_port, scan.port.value_or(kDefaultMasterPort)}) {
        if (port < kMinPort || port > kMaxPort) {
            out.push_back(error("PORT_OUT_OF_RANGE",
                                "master port " + std::to_string(port) + " outside [1024, 65535]"));
            break;
        }
    }

    // 6. Environment propagation.
    static const std::regex kExport(R"(\bexport\s+(PYTHONPATH|LD_LIBRARY_PATH)=)");
    if (spec.nodes > 1 && !profile.env_propagation && !std::regex_search(text, kExport)) {
        out.push_back(Finding{Severity::warning, "ENV_PROPAGATION_RISK",
                              profile.id + " does not export the submitting environment to other "
                                           "nodes and the script exports neither PYTHONPATH nor "
                                           "LD_LIBRARY_PATH",
                              std::nullopt});
    }
    return out;
}

std::size_t error_count(const std::vector<Finding>& findings) {
    return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
        return f.severity == Severity::error;
    }));
}

}  // namespace scriptport
