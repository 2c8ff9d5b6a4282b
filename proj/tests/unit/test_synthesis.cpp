// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include <regex>

#include "scriptport/synthesis.hpp"
#include "support.hpp"

using namespace scriptport;
using sp_test::bundle;
using sp_test::code_of;
using sp_test::make_spec;

namespace {

const Template& tmpl(const char* id) {
    const Template* t = bundle().templates.find(id);
    if (t == nullptr) throw std::runtime_error(std::string("missing template ") + id);
    return *t;
}

const ClusterProfile& profile(const std::string& id) { return bundle().profiles.resolve(id); }

ParamBinding binding(std::initializer_list<std::pair<const char*, const char*>> kv) {
    ParamBinding b;
    for (const auto& [k, v] : kv) b[k] = BoundValue{v, Provenance::user};
    return b;
}

}  // namespace

TEST(Bind, ReferenceJobOnPerlmutter) {
    JobSpec s = sp_test::reference_spec();
    s.train_args = "--output_dir out";
    s.master_port = 29400;
    s.master_port_explicit = true;
    const ParamBinding b = bind(s, tmpl("perlmutter-ddp"), profile("perlmutter"));
    EXPECT_EQ(b.at("nodes").value, "2");
    EXPECT_EQ(b.at("each_node_gpus").value, "4");
    EXPECT_EQ(b.at("world_size").value, "8");
    EXPECT_EQ(b.at("world_size").provenance, Provenance::derived);
    EXPECT_EQ(b.at("master_port").value, "29400");
    EXPECT_EQ(b.at("master_port").provenance, Provenance::user);
    EXPECT_EQ(b.at("your_script").value, "run_image_classification.py --output_dir out");
}

TEST(Bind, PortPrecedence) {
    JobSpec s = make_spec("perlmutter", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 1, 1);
    const ParamBinding dflt = bind(s, tmpl("perlmutter-ddp"), profile("perlmutter"));
    EXPECT_EQ(dflt.at("master_port").value, "29400");
    EXPECT_EQ(dflt.at("master_port").provenance, Provenance::default_value);
    s.cluster = "vista";
    EXPECT_EQ(bind(s, tmpl("vista-ddp"), profile("vista")).at("master_port").value,
              std::to_string(kDefaultMasterPort));
    s.cluster = "perlmutter";
    s.master_port = 31000;
    s.master_port_explicit = true;
    EXPECT_EQ(bind(s, tmpl("perlmutter-ddp"), profile("perlmutter")).at("master_port").value, "31000");
}

TEST(Bind, IdentityTopology) {
    const JobSpec s = make_spec("vista", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 1, 1);
    EXPECT_EQ(bind(s, tmpl("vista-ddp"), profile("vista")).at("world_size").value, "1");
}

TEST(Bind, MissingDeepspeedConfigIsUnbound) {
    const JobSpec s = make_spec("deltaai", Framework::deepspeed, Strategy::zero3, Launcher::deepspeed, 2, 4);
    try {
        bind(s, tmpl("deltaai-deepspeed"), profile("deltaai"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::unbound_parameter);
        EXPECT_NE(std::string(e.what()).find("deepspeed_config"), std::string::npos);
    }
}

TEST(Bind, WrongClusterIsContractViolation) {
    const JobSpec s = make_spec("vista", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 1, 1);
    EXPECT_EQ(code_of([&] { bind(s, tmpl("ls6-ddp"), profile("lonestar6")); }), ErrorCode::contract_violation);
}

TEST(Render, Ls6Substitution) {
    const std::string out = render_text(
        tmpl("ls6-ddp").body,
        binding({{"nodes", "2"}, {"each_node_gpus", "3"}, {"master_port", "29500"}, {"your_script", "train.py"}}));
    EXPECT_EQ(out,
              "srun -N 2 -n 2 bash -c 'MASTER_ADDR=$(scontrol show hostnames $SLURM_JOB_NODELIST | head -n 1); "
              "torchrun --nnodes=2 --nproc_per_node=3 --node_rank=$SLURM_PROCID --master_addr=$MASTER_ADDR "
              "--master_port=29500 train.py'");
}

TEST(Render, AuroraGivesPolarisStyleCommand) {
    const std::string out =
        render_text(tmpl("aurora-ddp").body, binding({{"world_size", "8"},
                                                      {"each_node_gpus", "4"},
                                                      {"master_port", "29500"},
                                                      {"your_script", "run_image_classification.py"}}));
    EXPECT_NE(out.find("mpiexec -n 8 -ppn 4 -hostfile hostfiles.txt"), std::string::npos);
    EXPECT_NE(out.find("-genv MASTER_PORT 29500 python -u run_image_classification.py"), std::string::npos);
}

TEST(Render, NoPlaceholdersIsIdentity) {
    EXPECT_EQ(render_text("echo ${HOME} $(date)", {}), "echo ${HOME} $(date)");
}

TEST(Render, MissingBindingIsUnbound) {
    EXPECT_EQ(code_of([] { render_text("run {nodes}", {}); }), ErrorCode::unbound_parameter);
}

TEST(Render, OnlyPlaceholderSpansChange) {
    sp_test::rng(23);
    for (const auto& t : bundle().templates.templates()) {
        for (int round = 0; round < 10; ++round) {
            ParamBinding b;
            for (const auto& name : placeholders(t.body)) {
                b[name] = BoundValue{"v" + std::to_string(sp_test::uniform(0, 99999)), Provenance::user};
            }
            const std::string out = render_text(t.body, b);
            std::string expected;
            std::size_t pos = 0;
            for (const auto& span : placeholder_spans(t.body)) {
                expected += t.body.substr(pos, span.offset - pos);
                expected += b.at(std::string(span.name)).value;
                pos = span.offset + span.length;
            }
            expected += t.body.substr(pos);
            EXPECT_EQ(out, expected) << t.id;
            EXPECT_TRUE(placeholders(out).empty());
            EXPECT_EQ(render_text(out, b), out);
        }
    }
}

TEST(Render, RenderedScriptCarriesDigest) {
    const JobSpec s = sp_test::reference_spec();
    const Template& t = tmpl("perlmutter-ddp");
    const RenderedScript r = render(t, bind(s, t, profile("perlmutter")), s);
    EXPECT_EQ(r.template_id, "perlmutter-ddp");
    EXPECT_EQ(r.spec_digest, spec_digest(s));
    EXPECT_EQ(r.text,
              "srun -N 2 -n 8 bash -c 'torchrun --nnodes=2 --nproc_per_node=4 --node_rank=$SLURM_PROCID "
              "--master_addr=$MASTER_ADDR --master_port=29400 run_image_classification.py'");
}

TEST(Render, WorldSizeConsistencyInText) {
    const std::regex ws("(?:-n|--num_processes) (\\d+)");
    for (const auto& t : bundle().templates.templates()) {
        const ClusterProfile& p = profile(t.cluster);
        for (int nodes = 1; nodes <= 4; ++nodes) {
            JobSpec s = make_spec(t.cluster, t.framework, t.strategy, t.launcher, nodes, p.gpus_per_node);
            s.deepspeed_config = "ds.json";
            const std::string text = render(t, bind(s, t, p), s).text;
            std::smatch m;
            if (placeholders(t.body).size() > 0 && text.find("-ppn") != std::string::npos) {
                std::regex ppn("-n (\\d+) -ppn (\\d+)");
                ASSERT_TRUE(std::regex_search(text, m, ppn)) << t.id;
                EXPECT_EQ(std::stoi(m[1]), nodes * std::stoi(m[2])) << t.id;
            }
        }
    }
}

TEST(WrapBatch, SlurmHeader) {
    const JobSpec s = sp_test::reference_spec();
    const Template& t = tmpl("perlmutter-ddp");
    const RenderedScript r = render(t, bind(s, t, profile("perlmutter")), s);
    EXPECT_EQ(wrap_batch(r, profile("perlmutter"), 60, "m1234"),
              "#!/bin/bash\n#SBATCH --nodes=2\n#SBATCH --time=01:00:00\n#SBATCH --account=m1234\n" + r.text);
    EXPECT_EQ(wrap_batch(r, profile("perlmutter"), 60, ""),
              "#!/bin/bash\n#SBATCH --nodes=2\n#SBATCH --time=01:00:00\n" + r.text);
}

TEST(WrapBatch, PbsHeader) {
    const JobSpec s = make_spec("aurora", Framework::pytorch, Strategy::ddp, Launcher::mpiexec, 2, 6);
    const Template& t = tmpl("aurora-ddp");
    const RenderedScript r = render(t, bind(s, t, profile("aurora")), s);
    EXPECT_EQ(wrap_batch(r, profile("aurora"), 60, "proj"),
              "#!/bin/bash\n#PBS -l select=2\n#PBS -l walltime=01:00:00\n#PBS -A proj\n" + r.text);
}

TEST(WrapBatch, WalltimePolicy) {
    const JobSpec s = sp_test::reference_spec();
    const Template& t = tmpl("perlmutter-ddp");
    const RenderedScript r = render(t, bind(s, t, profile("perlmutter")), s);
    for (const auto& p : bundle().profiles.profiles()) {
        EXPECT_EQ(code_of([&] { wrap_batch(r, p, 1000000, ""); }), ErrorCode::policy_violation) << p.id;
    }
}

TEST(WrapBatch, WalltimeFormat) {
    EXPECT_EQ(format_walltime(1), "00:01:00");
    EXPECT_EQ(format_walltime(90), "01:30:00");
    EXPECT_EQ(format_walltime(48 * 60 + 5), "48:05:00");
}
