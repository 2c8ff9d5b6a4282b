// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include <nlohmann/json.hpp>

#include "scriptport/launch_scan.hpp"
#include "scriptport/simcluster.hpp"
#include "scriptport/static_verify.hpp"
#include "support.hpp"

using namespace scriptport;
using sp_test::bundle;
using sp_test::code_of;
using sp_test::make_spec;

namespace {

const ClusterProfile& profile(const std::string& id) { return bundle().profiles.resolve(id); }

RenderedScript rendered(const JobSpec& s, const char* template_id) {
    const Template& t = *bundle().templates.find(template_id);
    return render(t, bind(s, t, profile(s.cluster)), s);
}

std::vector<std::string> codes(const std::vector<Finding>& fs) {
    std::vector<std::string> out;
    for (const auto& f : fs) out.push_back(f.code);
    return out;
}

JobSpec spec_for(const Template& t, int nodes, int gpus) {
    JobSpec s = make_spec(t.cluster, t.framework, t.strategy, t.launcher, nodes, gpus);
    s.deepspeed_config = "ds_config.json";
    return s;
}

}  // namespace

TEST(Lint, ReferenceScriptIsClean) {
    const JobSpec s = sp_test::reference_spec();
    EXPECT_TRUE(lint(rendered(s, "perlmutter-ddp"), s, profile("perlmutter")).empty());
}

TEST(Lint, AccelerateOnPbsConflicts) {
    // The aurora cell has no accelerate template; render a Slurm-side one for aurora.
    JobSpec s = make_spec("ls6", Framework::accelerate, Strategy::ddp, Launcher::accelerate, 1, 2);
    s.cluster = "lonestar6";
    RenderedScript r = rendered(s, "ls6-acc-ddp");
    s.cluster = "aurora";
    const auto f = lint(r, s, profile("aurora"));
    ASSERT_FALSE(f.empty());
    EXPECT_EQ(f[0].code, "LAUNCH_SCHED_CONFLICT");
    EXPECT_EQ(f[0].severity, Severity::error);
}

TEST(Lint, MultiNodeWithoutPropagationWarns) {
    const JobSpec s = make_spec("deltaai", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 2, 4);
    const auto f = lint(rendered(s, "deltaai-ddp"), s, profile("deltaai"));
    EXPECT_EQ(codes(f), std::vector<std::string>{"ENV_PROPAGATION_RISK"});
    EXPECT_EQ(f[0].severity, Severity::warning);
    EXPECT_EQ(error_count(f), 0u);
    const JobSpec one = make_spec("deltaai", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 1, 4);
    EXPECT_TRUE(lint(rendered(one, "deltaai-ddp"), one, profile("deltaai")).empty());
    RenderedScript exported = rendered(s, "deltaai-ddp");
    exported.text = "export PYTHONPATH=\"$PYTHONPATH\"\n" + exported.text;
    EXPECT_TRUE(lint(exported, s, profile("deltaai")).empty());
}

TEST(Lint, StructuralErrors) {
    const JobSpec s = sp_test::reference_spec();
    RenderedScript r = rendered(s, "perlmutter-ddp");
    RenderedScript unresolved = r;
    unresolved.text += " {nodes}";
    EXPECT_EQ(codes(lint(unresolved, s, profile("perlmutter")))[0], "UNRESOLVED_PLACEHOLDER");

    RenderedScript skewed = r;
    skewed.text.replace(skewed.text.find("-n 8"), 4, "-n 7");
    EXPECT_EQ(codes(lint(skewed, s, profile("perlmutter"))), std::vector<std::string>{"TOPOLOGY_MISMATCH"});

    JobSpec big = s;
    big.gpus_per_node = 8;
    EXPECT_EQ(codes(lint(rendered(big, "perlmutter-ddp"), big, profile("perlmutter"))),
              std::vector<std::string>{"GPU_CAPACITY_EXCEEDED"});

    JobSpec port = s;
    port.master_port = 80;
    port.master_port_explicit = true;
    EXPECT_EQ(codes(lint(rendered(port, "perlmutter-ddp"), port, profile("perlmutter"))),
              std::vector<std::string>{"PORT_OUT_OF_RANGE"});
}

TEST(Lint, FindingsFollowCatalogOrder) {
    const auto& cat = finding_catalog();
    const std::vector<std::string> expected{"UNRESOLVED_PLACEHOLDER", "LAUNCH_SCHED_CONFLICT", "TOPOLOGY_MISMATCH",
                                            "GPU_CAPACITY_EXCEEDED", "PORT_OUT_OF_RANGE", "ENV_PROPAGATION_RISK"};
    ASSERT_EQ(cat.size(), expected.size());
    for (std::size_t i = 0; i < cat.size(); ++i) {
        EXPECT_EQ(cat[i].code, expected[i]);
        EXPECT_FALSE(cat[i].remediation.empty());
    }
    JobSpec s = make_spec("deltaai", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 2, 9);
    s.master_port = 99999;
    s.master_port_explicit = true;
    RenderedScript r = rendered(s, "deltaai-ddp");
    r.text += " {x}";
    const auto f = lint(r, s, profile("deltaai"));
    std::size_t last = 0;
    for (const auto& finding : f) {
        std::size_t idx = 0;
        while (idx < cat.size() && cat[idx].code != finding.code) ++idx;
        ASSERT_LT(idx, cat.size()) << finding.code;
        EXPECT_GE(idx, last);
        last = idx;
    }
    EXPECT_GE(f.size(), 3u);
    EXPECT_EQ(lint(r, s, profile("deltaai")), f);
}

TEST(Lint, SoundOnVerifiedTemplates) {
    for (const auto& t : bundle().templates.templates()) {
        if (!t.verified) continue;
        const ClusterProfile& p = profile(t.cluster);
        for (int nodes = 1; nodes <= 4; ++nodes) {
            for (int gpus = 1; gpus <= p.gpus_per_node; ++gpus) {
                const JobSpec s = spec_for(t, nodes, gpus);
                const auto f = lint(render(t, bind(s, t, p), s), s, p);
                EXPECT_EQ(error_count(f), 0u) << t.id << " " << nodes << "x" << gpus << " " << codes(f)[0];
            }
        }
    }
}

TEST(LaunchScan, RecognisesLaunchers) {
    const LaunchScan perl = scan_launch(sp_test::kPerlmutterCommand);
    EXPECT_EQ(perl.launcher, Launcher::torchrun);
    EXPECT_EQ(perl.alloc_nodes, 2);
    EXPECT_EQ(perl.srun_tasks, 8);
    EXPECT_EQ(perl.nodes, 2);
    EXPECT_EQ(perl.per_node, 4);
    EXPECT_EQ(perl.port, 29400);
    EXPECT_TRUE(perl.slurm_constructs);
    EXPECT_FALSE(perl.pbs_constructs);

    const LaunchScan pol = scan_launch(sp_test::kPolarisCommand);
    EXPECT_EQ(pol.launcher, Launcher::mpiexec);
    EXPECT_EQ(pol.world, 8);
    EXPECT_EQ(pol.per_node, 4);
    EXPECT_EQ(pol.entry_script, "run_image_classification.py");

    const LaunchScan acc = scan_launch(
        "accelerate launch --multi_gpu --num_machines 2 --num_processes 8 --main_process_port 29500 train.py --fsdp full_shard");
    EXPECT_EQ(acc.launcher, Launcher::accelerate);
    EXPECT_TRUE(acc.accelerate_launch);
    EXPECT_EQ(acc.nodes, 2);
    EXPECT_EQ(acc.world, 8);
    EXPECT_TRUE(acc.fsdp_flag);
    EXPECT_EQ(acc.train_args, "");  // the policy is recorded as the FSDP flag

    const LaunchScan pbs = scan_launch("sort -u $PBS_NODEFILE > h && deepspeed --hostfile h train.py --deepspeed ds.json");
    EXPECT_EQ(pbs.launcher, Launcher::deepspeed);
    EXPECT_TRUE(pbs.pbs_constructs);
}

TEST(LaunchScan, SplitsCommands) {
    const auto cmds = split_commands("a 'b c' && d \"e f\"; g | h");
    ASSERT_EQ(cmds.size(), 4u);
    EXPECT_EQ(cmds[0], (std::vector<std::string>{"a", "b c"}));
    EXPECT_EQ(cmds[1], (std::vector<std::string>{"d", "e f"}));
}

TEST(Sim, FaultFreeRunPrintsTranscript) {
    const JobSpec s = sp_test::reference_spec();
    const ExecutionResult r = submit(rendered(s, "perlmutter-ddp"), s, profile("perlmutter"), bundle().rules);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_FALSE(r.fault_fired);
    std::string expected;
    for (int i = 0; i < 8; ++i) expected += "rank " + std::to_string(i) + "/8 ok\n";
    expected += "allreduce ok\nallgather ok";
    EXPECT_NE(r.stdout_text.find(expected), std::string::npos) << r.stdout_text;
    EXPECT_EQ(r.stdout_text.substr(r.stdout_text.size() - 25), "allreduce ok\nallgather ok");
    ASSERT_TRUE(r.topology);
    EXPECT_EQ(r.topology->world, 8);
}

TEST(Sim, DeltaAiWithoutExportsFails) {
    const JobSpec s = make_spec("deltaai", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 2, 4);
    const ExecutionResult r = submit(rendered(s, "deltaai-ddp"), s, profile("deltaai"), bundle().rules);
    EXPECT_NE(r.exit_code, 0);
    EXPECT_EQ(r.fault_fired, "ENV_NOT_PROPAGATED");
    EXPECT_NE(r.stderr_text.find("ModuleNotFoundError"), std::string::npos);
}

TEST(Sim, VistaZero3IsUnresolvable) {
    JobSpec s = make_spec("vista", Framework::deepspeed, Strategy::zero3, Launcher::deepspeed, 2, 1);
    s.deepspeed_config = "ds_config.json";
    const ExecutionResult r = submit(rendered(s, "vista-zero3"), s, profile("vista"), bundle().rules);
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.stderr_text.find("Apex"), std::string::npos);
    ASSERT_TRUE(r.fault_fired);
    EXPECT_FALSE(bundle().rules.find(*r.fault_fired)->resolvable());
}

TEST(Sim, InconsistentTopologyFails) {
    const JobSpec s = sp_test::reference_spec();
    RenderedScript r = rendered(s, "perlmutter-ddp");
    r.text.replace(r.text.find("--nnodes=2"), 10, "--nnodes=3");
    const ExecutionResult res = submit(r, s, profile("perlmutter"), FaultRuleSet{});
    EXPECT_EQ(res.exit_code, kTopologyFailureExit);
    EXPECT_NE(res.stderr_text.find("launch error: "), std::string::npos);
    EXPECT_FALSE(res.fault_fired);
}

TEST(Sim, BundledRuleSet) {
    const auto& rules = bundle().rules.rules();
    EXPECT_GE(rules.size(), 10u);
    std::set<std::string> unresolvable;
    for (const auto& r : rules) {
        if (!r.resolvable()) unresolvable.insert(r.cluster + "/" + r.id);
    }
    EXPECT_EQ(unresolvable, (std::set<std::string>{"aurora/PBS_ACCELERATE_CONFLICT", "vista/APEX_GH200_VISTA",
                                                   "deltaai/APEX_GH200_DELTAAI"}));
    for (const char* id : {"ENV_NOT_PROPAGATED", "DRIVER_LIB_MISMATCH", "SYCL_COMPILER_CONFLICT", "GCC_CUDA_MISMATCH",
                           "MISSING_DATASET_ARG", "HF_AUTH_MISSING", "BAD_CONFIG_PATH"}) {
        EXPECT_NE(bundle().rules.find(id), nullptr) << id;
    }
}

TEST(Sim, RuleDocumentErrors) {
    EXPECT_EQ(FaultRuleSet::load("", bundle().profiles).size(), 0u);
    EXPECT_EQ(FaultRuleSet::load("[]", bundle().profiles).size(), 0u);
    const std::string ok =
        R"({"id": "R", "cluster": "vista", "trigger": [{"nodes_gt": 1}], "stderr_template": "boom {cluster}",
            "category_hint": "env", "clearable_by": []})";
    EXPECT_EQ(FaultRuleSet::load("[" + ok + "]", bundle().profiles).size(), 1u);
    std::string unknown = ok;
    unknown.replace(unknown.find("vista"), 5, "frontier");
    try {
        FaultRuleSet::load("[" + ok + "," + unknown + "]", bundle().profiles);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::parse);
        EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
    }
    std::string bad_atom = ok;
    bad_atom.replace(bad_atom.find("nodes_gt"), 8, "moon_is");
    EXPECT_EQ(code_of([&] { FaultRuleSet::load("[" + bad_atom + "]", bundle().profiles); }), ErrorCode::parse);
    EXPECT_EQ(code_of([&] { FaultRuleSet::load("{", bundle().profiles); }), ErrorCode::parse);
}

TEST(Sim, EmptyRulesOnlyCheckTopology) {
    for (const auto& t : bundle().templates.templates()) {
        const JobSpec s = spec_for(t, 2, 1);
        const ExecutionResult r = submit(render(t, bind(s, t, profile(t.cluster)), s), s, profile(t.cluster), FaultRuleSet{});
        EXPECT_EQ(r.exit_code, 0) << t.id << ": " << r.stderr_text;
    }
}

TEST(SimProperty, DeterminismAndTopologySoundness) {
    sp_test::rng(29);
    for (int round = 0; round < 300; ++round) {
        const auto& t = bundle().templates.templates()[sp_test::uniform(0, 34)];
        const ClusterProfile& p = profile(t.cluster);
        const JobSpec s = spec_for(t, sp_test::uniform(1, 6), sp_test::uniform(1, p.gpus_per_node));
        const RenderedScript r = render(t, bind(s, t, p), s);
        const ExecutionResult a = submit(r, s, p, bundle().rules);
        EXPECT_EQ(a, submit(r, s, p, bundle().rules));
        EXPECT_EQ(a.exit_code == 0, !a.fault_fired && a.topology.has_value()) << t.id;
        if (a.exit_code == 0) {
            EXPECT_EQ(a.topology->world, s.world_size());
            std::vector<int> ranks(static_cast<std::size_t>(s.world_size()));
            for (int i = 0; i < s.world_size(); ++i) ranks[static_cast<std::size_t>(i)] = i;
            EXPECT_EQ(a.topology->ranks, ranks);
        }
    }
}
