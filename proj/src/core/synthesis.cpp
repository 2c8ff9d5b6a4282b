// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/synthesis.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "scriptport/error.hpp"

namespace scriptport {

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::user: return "user";
        case Provenance::derived: return "derived";
        case Provenance::default_value: return "default";
    }
    return "?";
}

nlohmann::json to_json(const ParamBinding& b) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, v] : b) {
        out[name] = {{"value", v.value}, {"provenance", to_string(v.provenance)}};
    }
    return out;
}

nlohmann::json to_json(const RenderedScript& r) {
    return nlohmann::json{{"text", r.text},
                          {"template_id", r.template_id},
                          {"binding", to_json(r.binding)},
                          {"spec_digest", r.spec_digest}};
}

ParamBinding bind(const JobSpec& spec, const Template& t, const ClusterProfile& profile) {
    if (t.cluster != spec.cluster || profile.id != spec.cluster) {
        throw Error(ErrorCode::contract_violation,
                    "template \"" + t.id + "\" targets " + t.cluster + ", job targets " +
                        spec.cluster + ", profile is " + profile.id);
    }
    ParamBinding b;
    b["nodes"] = {std::to_string(spec.nodes), Provenance::user};
    b["each_node_gpus"] = {std::to_string(spec.gpus_per_node), Provenance::user};
    b["world_size"] = {std::to_string(spec.world_size()), Provenance::derived};

    const ParamDecl* port = t.param("master_port");
    if (spec.master_port_explicit) {
        b["master_port"] = {std::to_string(spec.master_port), Provenance::user};
    } else if (port != nullptr && port->default_value) {
        b["master_port"] = {*port->default_value, Provenance::default_value};
    } else {
        b["master_port"] = {std::to_string(spec.master_port), Provenance::default_value};
    }

    std::string script = spec.entry_script;
    if (!spec.train_args.empty()) script += " " + spec.train_args;
    b["your_script"] = {script, Provenance::user};

    if (spec.deepspeed_config) b["deepspeed_config"] = {*spec.deepspeed_config, Provenance::user};

    for (const auto& p : t.params) {
        if (b.count(p.name) != 0) continue;
        if (p.default_value) {
            b[p.name] = {*p.default_value, Provenance::default_value};
        } else if (p.required) {
            throw Error(ErrorCode::unbound_parameter,
                        "template \"" + t.id + "\" requires \"" + p.name +
                            "\" but the job does not provide it");
        }
    }
    return b;
}

std::string render_text(std::string_view body, const ParamBinding& binding) {
    std::string out;
    out.reserve(body.size() + 64);
    std::size_t last = 0;
    for (const auto& span : placeholder_spans(body)) {
        out.append(body.substr(last, span.offset - last));
        auto it = binding.find(std::string(span.name));
        if (it == binding.end()) {
            throw Error(ErrorCode::unbound_parameter,
                        "no value bound for placeholder {" + std::string(span.name) + "}");
        }
        out += it->second.value;
        last = span.offset + span.length;
    }
    out.append(body.substr(last));
    return out;
}

RenderedScript render(const Template& t, const ParamBinding& binding, const JobSpec& spec) {
    RenderedScript r;
    r.text = render_text(t.body, binding);
    if (auto left = placeholders(r.text); !left.empty()) {
        throw Error(ErrorCode::unbound_parameter,
                    "rendered script still contains placeholder {" + left.front() +
                        "} (introduced by a bound value)");
    }
    r.template_id = t.id;
    r.binding = binding;
    r.spec_digest = spec_digest(spec);
    return r;
}

std::string format_walltime(int minutes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d:%02d:00", minutes / 60, minutes % 60);
    return buf;
}

std::string wrap_batch(const RenderedScript& r, const ClusterProfile& profile,
                       int walltime_minutes, std::string_view account) {
    if (walltime_minutes < 1) {
        throw Error(ErrorCode::usage, "walltime must be at least one minute");
    }
    if (walltime_minutes > profile.max_walltime_minutes) {
        throw Error(ErrorCode::policy_violation,
                    "walltime " + std::to_string(walltime_minutes) + " min exceeds the " +
                        profile.id + " limit of " + std::to_string(profile.max_walltime_minutes) +
                        " min");
    }
    auto nodes = r.binding.find("nodes");
    if (nodes == r.binding.end()) {
        throw Error(ErrorCode::contract_violation, "rendered script carries no node count");
    }
    const std::string time = format_walltime(walltime_minutes);
    std::string out = "#!/bin/bash\n";
    if (profile.scheduler == Scheduler::slurm) {
        out += "#SBATCH --nodes=" + nodes->second.value + "\n";
        out += "#SBATCH --time=" + time + "\n";
        if (!account.empty()) out += "#SBATCH --account=" + std::string(account) + "\n";
    } else {
        out += "#PBS -l select=" + nodes->second.value + "\n";
        out += "#PBS -l walltime=" + time + "\n";
        if (!account.empty()) out += "#PBS -A " + std::string(account) + "\n";
    }
    out += r.text;
    return out;
}

}  // namespace scriptport
