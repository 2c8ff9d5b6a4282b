// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the unit tests.

#pragma once

#include <random>
#include <string>

#include <gtest/gtest.h>

#include "scriptport/bundled.hpp"
#include "scriptport/error.hpp"
#include "scriptport/pipeline.hpp"
#include "scriptport/retrieval.hpp"

namespace sp_test {

inline const scriptport::Resources& bundle() {
    static const scriptport::Resources res = scriptport::Resources::bundled();
    return res;
}

// Bundle plus the Polaris-style extras.
inline const scriptport::Resources& bundle_with_extras() {
    static const scriptport::Resources res = [] {
        scriptport::ResourceOptions o;
        o.extra_profiles.emplace_back(scriptport::bundled::polaris_profiles());
        o.extra_templates.emplace_back(scriptport::bundled::polaris_templates());
        return scriptport::load_resources(o);
    }();
    return res;
}

inline const char* kReferenceDescription =
    "I want to train ViT using torchrun with 8 GPUs across 2 compute nodes on Perlmutter, "
    "my training file is run_image_classification.py";

inline const char* kPerlmutterCommand =
    "srun -N 2 -n 8 bash -c 'torchrun --nnodes=2 --nproc_per_node=4 --node_rank=$SLURM_PROCID "
    "--master_addr=$MASTER_ADDR --master_port=29400 run_image_classification.py'";

inline const char* kPolarisCommand =
    "mpiexec -n 8 -ppn 4 -hostfile hostfiles.txt -genv MASTER_ADDR $MASTER_ADDR -genv MASTER_PORT "
    "29500 python -u run_image_classification.py";

inline scriptport::JobSpec make_spec(const std::string& cluster, scriptport::Framework fw,
                                     scriptport::Strategy st, scriptport::Launcher l, int nodes,
                                     int gpus, const std::string& entry = "train.py") {
    scriptport::JobSpec s;
    s.cluster = cluster;
    s.framework = fw;
    s.strategy = st;
    s.launcher = l;
    s.nodes = nodes;
    s.gpus_per_node = gpus;
    s.entry_script = entry;
    return s;
}

// The reference job after extraction and finalization on Perlmutter.
inline scriptport::JobSpec reference_spec() {
    using namespace scriptport;
    JobSpec s = make_spec("perlmutter", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 2, 4,
                          "run_image_classification.py");
    return s;
}

// A 2-node job for one cell of the cluster x {ddp, fsdp, zero3, acc-ddp} matrix.
inline scriptport::JobSpec cell_spec(const std::string& cluster, const std::string& column, int nodes = 2) {
    using namespace scriptport;
    const ClusterProfile& p = bundle().profiles.resolve(cluster);
    JobSpec s;
    s.cluster = p.id;
    s.nodes = nodes;
    s.gpus_per_node = p.gpus_per_node;
    s.entry_script = "train.py";
    if (column == "ddp" || column == "fsdp") {
        s.framework = Framework::pytorch;
        s.strategy = column == "ddp" ? Strategy::ddp : Strategy::fsdp;
        s.launcher = p.default_launcher;
    } else if (column == "zero3") {
        s.framework = Framework::deepspeed;
        s.strategy = Strategy::zero3;
        s.launcher = Launcher::deepspeed;
        s.deepspeed_config = "ds_config.json";
    } else {
        s.framework = Framework::accelerate;
        s.strategy = Strategy::ddp;
        s.launcher = Launcher::accelerate;
    }
    return s;
}

// Best-ranked template on the spec's own cluster.
inline const scriptport::Template& template_for(const scriptport::JobSpec& s) {
    for (const auto& c : scriptport::candidates(s, bundle().templates)) {
        const scriptport::Template* t = bundle().templates.find(c.template_id);
        if (t->cluster == s.cluster) return *t;
    }
    throw std::runtime_error("no template for " + s.cluster);
}

// A job that provokes the given bundled rule.
inline scriptport::JobSpec scenario_for(const std::string& id) {
    if (id == "PBS_ACCELERATE_CONFLICT") return cell_spec("aurora", "acc-ddp");
    if (id == "APEX_GH200_VISTA") return cell_spec("vista", "zero3");
    if (id == "APEX_GH200_DELTAAI") return cell_spec("deltaai", "zero3");
    if (id == "ENV_NOT_PROPAGATED") return cell_spec("deltaai", "ddp");
    if (id == "DRIVER_LIB_MISMATCH") return cell_spec("stampede3", "ddp");
    if (id == "SYCL_COMPILER_CONFLICT") return cell_spec("aurora", "ddp", 1);
    if (id == "GCC_CUDA_MISMATCH") return cell_spec("perlmutter", "zero3");
    if (id == "CUDA_DRIVER_MISMATCH") return cell_spec("bridges2", "ddp");
    scriptport::JobSpec s;
    if (id == "XPU_SCRIPT_UNSUPPORTED_STAMPEDE3" || id == "XPU_SCRIPT_UNSUPPORTED_AURORA") {
        s = cell_spec(id.back() == '3' ? "stampede3" : "aurora", "ddp", 1);
        s.train_args = "--ddp_backend nccl";
    } else if (id == "MISSING_DATASET_ARG") {
        s = cell_spec("perlmutter", "ddp");
        s.entry_script = "run_glue.py";
        s.train_args = "--model_name_or_path bert-base-cased";
    } else if (id == "HF_AUTH_MISSING") {
        s = cell_spec("delta", "ddp");
        s.train_args = "--model_name_or_path meta-llama/Llama-3.2-1B";
    } else if (id == "BAD_CONFIG_PATH") {
        s = cell_spec("delta", "zero3");
        s.deepspeed_config = "~/configs/ds_config.json";
    } else {
        throw std::runtime_error("no scenario for " + id);
    }
    return s;
}

// Runs `fn` and returns the error code it raised; fails the test if it does not throw.
template <class Fn>
scriptport::ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const scriptport::Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a scriptport::Error";
    return scriptport::ErrorCode::usage;
}

inline std::mt19937& rng(unsigned seed = 0) {
    static std::mt19937 g(12345);
    if (seed != 0) g.seed(seed);
    return g;
}

inline int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

}  // namespace sp_test
