// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// A small shell reader that recognises srun/mpiexec/torchrun/deepspeed/
// accelerate invocations and records the launch topology they imply. It is
// not a shell parser: quoting, `$(...)`, command separators and `bash -c`
// bodies are understood; everything else is skipped.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scriptport/types.hpp"

namespace scriptport {

/// Splits one shell word list into simple commands. Each command is the list
/// of its words with quotes removed.
std::vector<std::vector<std::string>> split_commands(std::string_view script);

struct LaunchScan {
    std::optional<Launcher> launcher;  // innermost DL launcher
    std::optional<int> alloc_nodes;    // srun -N / --nodes
    std::optional<int> srun_tasks;     // srun -n / --ntasks
    std::optional<int> nodes;          // --nnodes, --num_nodes, --num_machines
    std::optional<int> per_node;       // --nproc_per_node, -ppn, --num_gpus, slots=
    std::optional<int> world;          // mpiexec -n, accelerate --num_processes
    std::optional<int> port;
    std::optional<std::string> entry_script;
    std::string train_args;
    std::optional<std::string> deepspeed_config;
    bool slurm_constructs = false;  // srun, scontrol, $SLURM_*
    bool pbs_constructs = false;    // $PBS_*, qsub
    bool accelerate_launch = false;
    bool fsdp_flag = false;  // `--fsdp <policy>` seen in the training args
};

LaunchScan scan_launch(std::string_view script);

}  // namespace scriptport
