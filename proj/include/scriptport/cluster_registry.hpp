// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Per-machine facts (scheduler, launcher, GPU count, environment behaviour)
// loaded from a profile document. Profiles are immutable after load.

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scriptport/types.hpp"

namespace scriptport {

struct ClusterProfile {
    std::string id;  // canonical lowercase name
    std::vector<std::string> aliases;
    Scheduler scheduler = Scheduler::slurm;
    Launcher default_launcher = Launcher::torchrun;
    int gpus_per_node = 1;
    std::string gpu_type;
    bool env_propagation = true;
    ModuleSystem module_system = ModuleSystem::lmod;
    PythonEnv python_env = PythonEnv::native;
    int max_walltime_minutes = 1;
    std::vector<std::string> known_faults;
    // Where the facts came from ("public-docs", "site-survey", ...); free text.
    std::string provenance;

    bool operator==(const ClusterProfile&) const = default;
};

nlohmann::json to_json(const ClusterProfile& p);

class ProfileSet {
public:
    ProfileSet() = default;

    /// Parses a profile document (top-level array of records). Duplicate ids or
    /// aliases raise registry-conflict naming both records.
    static ProfileSet load(std::string_view document);

    /// Exact, case-insensitive lookup on id or alias.
    const ClusterProfile& resolve(std::string_view name) const;

    /// Lookup by canonical id; nullptr when absent.
    const ClusterProfile* find(std::string_view id) const;

    /// Union of two sets; the same conflict rules as load() apply.
    ProfileSet merged(const ProfileSet& other) const;

    std::vector<std::string> ids() const;
    const std::vector<ClusterProfile>& profiles() const { return profiles_; }
    std::size_t size() const { return profiles_.size(); }
    bool empty() const { return profiles_.empty(); }

    std::string to_document() const;

private:
    void add(ClusterProfile p);

    std::vector<ClusterProfile> profiles_;
    std::map<std::string, std::size_t> names_;  // lowercase id/alias -> index
};

}  // namespace scriptport
