// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Turning user input (free text, flags or an existing launch script) into a
// validated JobSpec.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scriptport/cluster_registry.hpp"
#include "scriptport/error.hpp"
#include "scriptport/types.hpp"

namespace scriptport {

struct PartialJobSpec {
    std::optional<std::string> cluster;  // canonical id when recognised
    std::optional<Framework> framework;
    std::optional<Strategy> strategy;
    std::optional<Launcher> launcher;
    std::optional<int> nodes;
    std::optional<int> gpus_per_node;
    std::optional<int> total_gpus;
    std::optional<int> master_port;
    std::optional<std::string> entry_script;
    std::string train_args;
    std::optional<std::string> deepspeed_config;

    bool operator==(const PartialJobSpec&) const = default;
};

/// Field names match the PartialJobSpec members; absent fields are omitted.
nlohmann::json to_json(const PartialJobSpec& p);

/// Strict reader used for documents from outside the process (remote
/// extractors, C API requests). Type or range violations throw `failure`.
PartialJobSpec partial_from_json(const nlohmann::json& doc, ErrorCode failure);

/// Every field present in `over` replaces the corresponding field of `base`.
PartialJobSpec overlay(PartialJobSpec base, const PartialJobSpec& over);

struct JobSpec {
    std::string cluster;
    Framework framework = Framework::pytorch;
    Strategy strategy = Strategy::ddp;
    Launcher launcher = Launcher::torchrun;
    int nodes = 1;
    int gpus_per_node = 1;
    int master_port = kDefaultMasterPort;
    bool master_port_explicit = false;
    std::string entry_script;
    std::string train_args;
    std::optional<std::string> deepspeed_config;
    std::string description;  // original user text, used for similarity ranking

    int world_size() const { return nodes * gpus_per_node; }
    bool operator==(const JobSpec&) const = default;
};

nlohmann::json to_json(const JobSpec& s);

/// FNV-1a over a canonical serialization; stable across runs and platforms.
std::string spec_digest(const JobSpec& s);

class Extractor {
public:
    virtual ~Extractor() = default;
    virtual PartialJobSpec extract(std::string_view text) = 0;
};

/// Deterministic lexicon-driven extractor. Cluster names are recognised from
/// the ids and aliases of the given registry.
class RuleExtractor final : public Extractor {
public:
    explicit RuleExtractor(const ProfileSet& profiles);
    PartialJobSpec extract(std::string_view text) override;

private:
    std::vector<std::pair<std::string, std::string>> names_;  // lowercase name -> id
};

/// Required fields that can neither be read from `p` nor derived from it,
/// in the order cluster, framework, strategy, nodes, gpus_per_node,
/// entry_script.
std::vector<std::string> missing_fields(const PartialJobSpec& p);

/// Applies the launcher-implication table: torchrun/mpiexec/srun imply
/// pytorch, the deepspeed and accelerate launchers imply their frameworks,
/// zero3 implies deepspeed, and a known framework defaults the strategy to ddp.
PartialJobSpec apply_implications(PartialJobSpec p);

JobSpec finalize(const PartialJobSpec& p, const ClusterProfile& profile);

/// Recovers what a launch script says about the job. Never throws.
PartialJobSpec parse_script(std::string_view script);

struct Topology {
    int nodes;
    int gpus_per_node;
    bool operator==(const Topology&) const = default;
};

/// Every (nodes, per-node) split of `world` with per-node <= capacity, fewest
/// nodes first.
std::vector<Topology> suggest_topologies(int world, int capacity);

/// Parses "number words" ("two", "twenty-four", "a single") and digit strings.
std::optional<int> parse_count_word(std::string_view word);

/// Sets one field from a user answer ("nodes" + "2", "cluster" + "LS6", ...).
/// Throws usage on an unknown field or an unparsable value.
void set_field(PartialJobSpec& p, std::string_view field, std::string_view value,
               const ProfileSet& profiles);

}  // namespace scriptport
