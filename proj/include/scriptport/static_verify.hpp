// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Pre-execution checks of a rendered script against its spec and profile.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scriptport/cluster_registry.hpp"
#include "scriptport/intent.hpp"
#include "scriptport/synthesis.hpp"

namespace scriptport {

enum class Severity { error, warning };

std::string_view to_string(Severity s);

struct Span {
    std::size_t offset;
    std::size_t length;
    bool operator==(const Span&) const = default;
};

struct Finding {
    Severity severity = Severity::error;
    std::string code;
    std::string message;
    std::optional<Span> span;
    bool operator==(const Finding&) const = default;
};

nlohmann::json to_json(const Finding& f);

struct CatalogEntry {
    std::string_view code;
    Severity severity;
    std::string_view remediation;
};

/// The closed set of finding codes, in check order.
const std::vector<CatalogEntry>& finding_catalog();

std::vector<Finding> lint(const RenderedScript& r, const JobSpec& spec,
                          const ClusterProfile& profile);

std::size_t error_count(const std::vector<Finding>& findings);

}  // namespace scriptport
