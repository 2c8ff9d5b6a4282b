// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/cluster_registry.hpp"

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "scriptport/error.hpp"

namespace scriptport {

using detail::json;

namespace {

ClusterProfile profile_from_json(const json& rec, std::size_t index) {
    const std::string ctx = "profile[" + std::to_string(index) + "]";
    if (!rec.is_object()) detail::field_error(ctx, "<record>", "expected object");

    ClusterProfile p;
    p.id = detail::req_string(rec, ctx, "id");
    if (p.id.empty() || p.id != detail::lowercase(p.id)) {
        detail::field_error(ctx, "id", "must be a non-empty lowercase name");
    }
    p.aliases = detail::opt_string_list(rec, ctx, "aliases");
    p.scheduler = detail::req_enum<Scheduler>(rec, ctx, "scheduler", parse_scheduler);
    p.default_launcher =
        detail::req_enum<Launcher>(rec, ctx, "default_launcher", parse_launcher);
    const auto gpus = detail::req_int(rec, ctx, "gpus_per_node");
    if (gpus < 1) detail::field_error(ctx, "gpus_per_node", "must be >= 1");
    p.gpus_per_node = static_cast<int>(gpus);
    p.gpu_type = detail::req_string(rec, ctx, "gpu_type");
    p.env_propagation = detail::req_bool(rec, ctx, "env_propagation");
    p.module_system =
        detail::req_enum<ModuleSystem>(rec, ctx, "module_system", parse_module_system);
    p.python_env = detail::req_enum<PythonEnv>(rec, ctx, "python_env", parse_python_env);
    const auto wall = detail::req_int(rec, ctx, "max_walltime_minutes");
    if (wall < 1) detail::field_error(ctx, "max_walltime_minutes", "must be >= 1");
    p.max_walltime_minutes = static_cast<int>(wall);
    p.known_faults = detail::opt_string_list(rec, ctx, "known_faults");
    p.provenance = detail::opt_string(rec, ctx, "provenance").value_or("");
    return p;
}

}  // namespace

json to_json(const ClusterProfile& p) {
    return json{
        {"id", p.id},
        {"aliases", p.aliases},
        {"scheduler", to_string(p.scheduler)},
        {"default_launcher", to_string(p.default_launcher)},
        {"gpus_per_node", p.gpus_per_node},
        {"gpu_type", p.gpu_type},
        {"env_propagation", p.env_propagation},
        {"module_system", to_string(p.module_system)},
        {"python_env", to_string(p.python_env)},
        {"max_walltime_minutes", p.max_walltime_minutes},
        {"known_faults", p.known_faults},
        {"provenance", p.provenance},
    };
}

void ProfileSet::add(ClusterProfile p) {
    const std::size_t index = profiles_.size();
    std::vector<std::string> names{p.id};
    for (const auto& a : p.aliases) names.push_back(detail::lowercase(a));
    for (std::size_t i = 0; i < names.size(); ++i) {
        for (std::size_t j = i + 1; j < names.size(); ++j) {
            if (names[i] == names[j]) {
                throw Error(ErrorCode::registry_conflict,
                            "profile \"" + p.id + "\" declares name \"" + names[i] + "\" twice");
            }
        }
        if (auto it = names_.find(names[i]); it != names_.end()) {
            throw Error(ErrorCode::registry_conflict,
                        "name \"" + names[i] + "\" of profile \"" + p.id +
                            "\" collides with profile \"" + profiles_[it->second].id + "\"");
        }
    }
    for (const auto& n : names) names_.emplace(n, index);
    profiles_.push_back(std::move(p));
}

ProfileSet ProfileSet::load(std::string_view document) {
    const json doc = detail::parse_array_document(document, "profile document");
    ProfileSet set;
    for (std::size_t i = 0; i < doc.size(); ++i) set.add(profile_from_json(doc[i], i));
    return set;
}

const ClusterProfile& ProfileSet::resolve(std::string_view name) const {
    const std::string key = detail::lowercase(detail::trim(name));
    if (auto it = names_.find(key); it != names_.end()) return profiles_[it->second];
    std::string valid;
    for (const auto& p : profiles_) {
        if (!valid.empty()) valid += ", ";
        valid += p.id;
    }
    throw Error(ErrorCode::unknown_cluster,
                "unknown cluster \"" + std::string(name) + "\"; valid clusters: " + valid);
}

const ClusterProfile* ProfileSet::find(std::string_view id) const {
    for (const auto& p : profiles_) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

ProfileSet ProfileSet::merged(const ProfileSet& other) const {
    ProfileSet out = *this;
    for (const auto& p : other.profiles_) out.add(p);
    return out;
}

std::vector<std::string> ProfileSet::ids() const {
    std::vector<std::string> out;
    out.reserve(profiles_.size());
    for (const auto& p : profiles_) out.push_back(p.id);
    return out;
}

std::string ProfileSet::to_document() const {
    json doc = json::array();
    for (const auto& p : profiles_) doc.push_back(to_json(p));
    return doc.dump(2) + "\n";
}

}  // namespace scriptport
