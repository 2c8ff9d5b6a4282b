// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scriptport {

enum class ErrorCode {
    parse,
    registry_conflict,
    unknown_cluster,
    template_invalid,
    template_conflict,
    incomplete_spec,
    inconsistent_topology,
    capacity,
    policy_violation,
    unbound_parameter,
    no_candidates,
    no_repair_available,
    contract_violation,
    bridge_unavailable,
    bridge_protocol,
    io,
    usage,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// C API and the CLI can map it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace scriptport
