// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Parameter binding, placeholder rendering and batch-header wrapping.

#pragma once

#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "scriptport/cluster_registry.hpp"
#include "scriptport/intent.hpp"
#include "scriptport/template_store.hpp"

namespace scriptport {

enum class Provenance { user, derived, default_value };

std::string_view to_string(Provenance p);

struct BoundValue {
    std::string value;
    Provenance provenance = Provenance::user;
    bool operator==(const BoundValue&) const = default;
};

/// Parameter name -> value. Always carries nodes, each_node_gpus, world_size,
/// master_port and your_script; other entries only when the template needs them.
using ParamBinding = std::map<std::string, BoundValue>;

nlohmann::json to_json(const ParamBinding& b);

struct RenderedScript {
    std::string text;
    std::string template_id;
    ParamBinding binding;
    std::string spec_digest;
    bool operator==(const RenderedScript&) const = default;
};

nlohmann::json to_json(const RenderedScript& r);

/// Fills the template's parameters from the spec. The master port is the
/// user's when given explicitly, otherwise the template default, otherwise
/// the spec default.
ParamBinding bind(const JobSpec& spec, const Template& t, const ClusterProfile& profile);

/// Substitutes every placeholder span; bytes outside the spans are copied
/// unchanged. Throws unbound-parameter when a placeholder has no value.
std::string render_text(std::string_view body, const ParamBinding& binding);

RenderedScript render(const Template& t, const ParamBinding& binding, const JobSpec& spec);

/// "HH:MM:SS"; hours are not wrapped at 24.
std::string format_walltime(int minutes);

/// Prepends the scheduler header. An empty account omits the account line.
std::string wrap_batch(const RenderedScript& r, const ClusterProfile& profile,
                       int walltime_minutes, std::string_view account);

}  // namespace scriptport
