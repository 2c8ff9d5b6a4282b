// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Closed vocabularies shared by every module.

#pragma once

#include <optional>
#include <string_view>

namespace scriptport {

enum class Scheduler { slurm, pbs };
enum class Launcher { torchrun, mpiexec, deepspeed, accelerate, srun };
enum class Framework { pytorch, deepspeed, accelerate };
enum class Strategy { ddp, fsdp, zero3 };
enum class ModuleSystem { lmod, none };
enum class PythonEnv { anaconda, venv, native };

std::string_view to_string(Scheduler v);
std::string_view to_string(Launcher v);
std::string_view to_string(Framework v);
std::string_view to_string(Strategy v);
std::string_view to_string(ModuleSystem v);
std::string_view to_string(PythonEnv v);

// Parsers accept the canonical lowercase spelling only.
std::optional<Scheduler> parse_scheduler(std::string_view s);
std::optional<Launcher> parse_launcher(std::string_view s);
std::optional<Framework> parse_framework(std::string_view s);
std::optional<Strategy> parse_strategy(std::string_view s);
std::optional<ModuleSystem> parse_module_system(std::string_view s);
std::optional<PythonEnv> parse_python_env(std::string_view s);

inline constexpr int kMinPort = 1024;
inline constexpr int kMaxPort = 65535;
inline constexpr int kDefaultMasterPort = 29500;

}  // namespace scriptport
