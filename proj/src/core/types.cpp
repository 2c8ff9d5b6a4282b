// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/error.hpp"
#include "scriptport/types.hpp"

#include <array>
#include <utility>

namespace scriptport {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view s) {
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
    for (const auto& [value, name] : table) {
        if (value == v) return name;
    }
    return "?";
}

constexpr std::array<std::pair<Scheduler, std::string_view>, 2> kSchedulers{{
    {Scheduler::slurm, "slurm"},
    {Scheduler::pbs, "pbs"},
}};

constexpr std::array<std::pair<Launcher, std::string_view>, 5> kLaunchers{{
    {Launcher::torchrun, "torchrun"},
    {Launcher::mpiexec, "mpiexec"},
    {Launcher::deepspeed, "deepspeed"},
    {Launcher::accelerate, "accelerate"},
    {Launcher::srun, "srun"},
}};

constexpr std::array<std::pair<Framework, std::string_view>, 3> kFrameworks{{
    {Framework::pytorch, "pytorch"},
    {Framework::deepspeed, "deepspeed"},
    {Framework::accelerate, "accelerate"},
}};

constexpr std::array<std::pair<Strategy, std::string_view>, 3> kStrategies{{
    {Strategy::ddp, "ddp"},
    {Strategy::fsdp, "fsdp"},
    {Strategy::zero3, "zero3"},
}};

constexpr std::array<std::pair<ModuleSystem, std::string_view>, 2> kModuleSystems{{
    {ModuleSystem::lmod, "lmod"},
    {ModuleSystem::none, "none"},
}};

constexpr std::array<std::pair<PythonEnv, std::string_view>, 3> kPythonEnvs{{
    {PythonEnv::anaconda, "anaconda"},
    {PythonEnv::venv, "venv"},
    {PythonEnv::native, "native"},
}};

}  // namespace

std::string_view to_string(Scheduler v) { return name_of(kSchedulers, v); }
std::string_view to_string(Launcher v) { return name_of(kLaunchers, v); }
std::string_view to_string(Framework v) { return name_of(kFrameworks, v); }
std::string_view to_string(Strategy v) { return name_of(kStrategies, v); }
std::string_view to_string(ModuleSystem v) { return name_of(kModuleSystems, v); }
std::string_view to_string(PythonEnv v) { return name_of(kPythonEnvs, v); }

std::optional<Scheduler> parse_scheduler(std::string_view s) { return lookup(kSchedulers, s); }
std::optional<Launcher> parse_launcher(std::string_view s) { return lookup(kLaunchers, s); }
std::optional<Framework> parse_framework(std::string_view s) { return lookup(kFrameworks, s); }
std::optional<Strategy> parse_strategy(std::string_view s) { return lookup(kStrategies, s); }
std::optional<ModuleSystem> parse_module_system(std::string_view s) {
    return lookup(kModuleSystems, s);
}
std::optional<PythonEnv> parse_python_env(std::string_view s) { return lookup(kPythonEnvs, s); }

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse: return "parse";
        case ErrorCode::registry_conflict: return "registry-conflict";
        case ErrorCode::unknown_cluster: return "unknown-cluster";
        case ErrorCode::template_invalid: return "template-invalid";
        case ErrorCode::template_conflict: return "template-conflict";
        case ErrorCode::incomplete_spec: return "incomplete-spec";
        case ErrorCode::inconsistent_topology: return "inconsistent-topology";
        case ErrorCode::capacity: return "capacity";
        case ErrorCode::policy_violation: return "policy-violation";
        case ErrorCode::unbound_parameter: return "unbound-parameter";
        case ErrorCode::no_candidates: return "no-candidates";
        case ErrorCode::no_repair_available: return "no-repair-available";
        case ErrorCode::contract_violation: return "contract-violation";
        case ErrorCode::bridge_unavailable: return "bridge-unavailable";
        case ErrorCode::bridge_protocol: return "bridge-protocol";
        case ErrorCode::io: return "io";
        case ErrorCode::usage: return "usage";
    }
    return "unknown";
}

}  // namespace scriptport
