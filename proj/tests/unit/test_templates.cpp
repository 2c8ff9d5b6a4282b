// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "scriptport/template_store.hpp"
#include "support.hpp"

using namespace scriptport;
using nlohmann::json;
using sp_test::bundle;
using sp_test::code_of;

namespace {

const char* kLs6Body =
    "srun -N {nodes} -n {nodes} bash -c 'MASTER_ADDR=$(scontrol show hostnames $SLURM_JOB_NODELIST | head -n 1); "
    "torchrun --nnodes={nodes} --nproc_per_node={each_node_gpus} --node_rank=$SLURM_PROCID "
    "--master_addr=$MASTER_ADDR --master_port={master_port} {your_script}'";

const char* kAuroraBody =
    "sort -u $PBS_NODEFILE > hostfiles.txt && mpiexec -n {world_size} -ppn {each_node_gpus} -hostfile "
    "hostfiles.txt -genv MASTER_ADDR $(head -n 1 hostfiles.txt) -genv MASTER_PORT {master_port} python -u "
    "{your_script}";

Template minimal(const std::string& id, const std::string& cluster, Strategy st, const std::string& body,
                 std::vector<std::string> names) {
    Template t;
    t.id = id;
    t.cluster = cluster;
    t.framework = st == Strategy::zero3 ? Framework::deepspeed : Framework::pytorch;
    t.strategy = st;
    t.launcher = st == Strategy::zero3 ? Launcher::deepspeed : Launcher::torchrun;
    t.body = body;
    for (auto& n : names) t.params.push_back(ParamDecl{n, ParamKind::integer, true, std::nullopt});
    return t;
}

// Reference scanner for the placeholder grammar: `{` + [a-z][a-z0-9_]* + `}`,
// not preceded by `$`.
std::vector<std::string> oracle_placeholders(const std::string& s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '{' || (i > 0 && s[i - 1] == '$')) continue;
        std::size_t j = i + 1;
        if (j >= s.size() || !(s[j] >= 'a' && s[j] <= 'z')) continue;
        while (j < s.size() && ((s[j] >= 'a' && s[j] <= 'z') || (s[j] >= '0' && s[j] <= '9') || s[j] == '_')) ++j;
        if (j < s.size() && s[j] == '}') {
            std::string name = s.substr(i + 1, j - i - 1);
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
        }
    }
    return out;
}

}  // namespace

TEST(Placeholders, AuroraOrderOfFirstOccurrence) {
    const std::vector<std::string> expected{"world_size", "each_node_gpus", "master_port", "your_script"};
    EXPECT_EQ(placeholders(kAuroraBody), expected);
}

TEST(Placeholders, ShellConstructsAreNotPlaceholders) {
    EXPECT_TRUE(placeholders("echo ${SLURM_PROCID}").empty());
    EXPECT_TRUE(placeholders("echo $(hostname) $HOME {Upper} {1x} { spaced } {a-b}").empty());
    EXPECT_TRUE(placeholders("${nodes}").empty());
}

TEST(Placeholders, DeduplicatedInFirstOccurrenceOrder) {
    EXPECT_EQ(placeholders("{a} {a} {b}"), (std::vector<std::string>{"a", "b"}));
}

TEST(Placeholders, SpansCoverEveryOccurrence) {
    const auto spans = placeholder_spans("{a} {a} {b}");
    ASSERT_EQ(spans.size(), 3u);
    EXPECT_EQ(spans[1].offset, 4u);
    EXPECT_EQ(spans[1].length, 3u);
    EXPECT_EQ(spans[2].name, "b");
}

TEST(Placeholders, RandomTextMatchesReferenceScanner) {
    const std::string alphabet = "{}$ab_1Z-( )\n'";
    sp_test::rng(7);
    for (int round = 0; round < 2000; ++round) {
        std::string s;
        const int len = sp_test::uniform(0, 40);
        for (int i = 0; i < len; ++i) s += alphabet[sp_test::uniform(0, static_cast<int>(alphabet.size()) - 1)];
        EXPECT_EQ(placeholders(s), oracle_placeholders(s)) << s;
    }
}

TEST(TemplateStore, BundleHoldsRepositorySize) {
    EXPECT_EQ(bundle().templates.size(), 35u);
    std::set<std::string> keys;
    for (const auto& t : bundle().templates.templates()) {
        const std::string key = t.cluster + "/" + std::string(to_string(t.framework)) + "/" +
                                std::string(to_string(t.strategy)) + "/" + std::string(to_string(t.launcher));
        EXPECT_TRUE(keys.insert(key).second) << key;
    }
}

TEST(TemplateStore, PublishedListingsAreVerbatim) {
    const Template* ls6 = bundle().templates.find("ls6-ddp");
    ASSERT_NE(ls6, nullptr);
    EXPECT_EQ(ls6->body.rfind("srun -N {nodes} -n {nodes} bash -c", 0), 0u);
    EXPECT_EQ(ls6->body, kLs6Body);
    const Template* aurora = bundle().templates.find("aurora-ddp");
    ASSERT_NE(aurora, nullptr);
    EXPECT_EQ(aurora->body, kAuroraBody);
    const Template* dai = bundle().templates.find("deltaai-deepspeed");
    ASSERT_NE(dai, nullptr);
    EXPECT_NE(dai->body.find("{deepspeed_config}"), std::string::npos);
}

TEST(TemplateStore, PlaceholdersEqualRequiredParams) {
    for (const auto& t : bundle().templates.templates()) {
        std::set<std::string> required;
        for (const auto& p : t.params) {
            if (p.required) required.insert(p.name);
        }
        const auto names = placeholders(t.body);
        EXPECT_EQ(std::set<std::string>(names.begin(), names.end()), required) << t.id;
    }
}

TEST(TemplateStore, UndeclaredPlaceholderIsInvalid) {
    Template t = minimal("bad", "vista", Strategy::ddp, "{nodes}", {});
    try {
        validate_template(t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::template_invalid);
        EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("nodes"), std::string::npos);
    }
}

TEST(TemplateStore, RequiredParamMissingFromBodyIsInvalid) {
    Template t = minimal("bad", "vista", Strategy::ddp, "torchrun {your_script}", {"your_script", "nodes"});
    EXPECT_EQ(code_of([&] { bundle().templates.add(t); }), ErrorCode::template_invalid);
}

TEST(TemplateStore, EmptyDocumentYieldsEmptySet) {
    EXPECT_TRUE(TemplateSet::load("").empty());
    EXPECT_TRUE(TemplateSet::load("[]").empty());
}

TEST(TemplateStore, MalformedDocumentIsParseError) {
    EXPECT_EQ(code_of([] { TemplateSet::load("[{"); }), ErrorCode::parse);
    EXPECT_EQ(code_of([] { TemplateSet::load(R"([{"id": "x"}])"); }), ErrorCode::parse);
}

TEST(TemplateStore, AddReturnsExtendedSetAndLeavesOriginal) {
    TemplateSet without;
    for (const auto& t : bundle().templates.templates()) {
        if (t.id != "vista-fsdp") without = without.add(t);
    }
    ASSERT_EQ(without.size(), 34u);
    Template t = *bundle().templates.find("vista-fsdp");
    t.id = "vista-fsdp-new";
    const TemplateSet grown = without.add(t);
    EXPECT_EQ(grown.size(), 35u);
    EXPECT_EQ(without.size(), 34u);
    for (const auto& old : without.templates()) {
        ASSERT_NE(grown.find(old.id), nullptr);
        EXPECT_EQ(*grown.find(old.id), old);
    }
}

TEST(TemplateStore, KeyTupleConflict) {
    Template t = *bundle().templates.find("ls6-ddp");
    t.id = "ls6-ddp-copy";
    EXPECT_EQ(code_of([&] { bundle().templates.add(t); }), ErrorCode::template_conflict);
    Template same_id = *bundle().templates.find("ls6-ddp");
    same_id.launcher = Launcher::srun;
    EXPECT_EQ(code_of([&] { bundle().templates.add(same_id); }), ErrorCode::template_conflict);
}

TEST(TemplateStore, SameClusterDifferentLauncherIsAllowed) {
    Template t = *bundle().templates.find("ls6-ddp");
    t.id = "ls6-ddp-srun";
    t.launcher = Launcher::srun;
    EXPECT_EQ(bundle().templates.add(t).size(), 36u);
}

TEST(TemplateStore, SerializeReloadIsIdentity) {
    const TemplateSet again = TemplateSet::load(bundle().templates.to_document());
    EXPECT_EQ(again.templates(), bundle().templates.templates());
    EXPECT_EQ(again.to_document(), bundle().templates.to_document());
}

TEST(TemplateStore, LoadIsDeterministic) {
    const std::string doc(bundled::templates());
    EXPECT_EQ(TemplateSet::load(doc).templates(), TemplateSet::load(doc).templates());
}

TEST(TemplateStore, RandomTemplatesRoundTrip) {
    sp_test::rng(11);
    const std::vector<std::string> vocab{"nodes", "each_node_gpus", "world_size", "master_port", "your_script"};
    for (int round = 0; round < 200; ++round) {
        std::string body = "echo ${HOME} $(date);";
        std::vector<std::string> used;
        for (const auto& v : vocab) {
            if (sp_test::uniform(0, 1) == 1) {
                body += " --" + v + "={" + v + "}";
                used.push_back(v);
            }
        }
        Template t = minimal("t" + std::to_string(round), "vista", Strategy::ddp, body, used);
        t.notes = "line one\nline \"two\"";
        const TemplateSet s = TemplateSet().add(t);
        const TemplateSet back = TemplateSet::load(s.to_document());
        ASSERT_EQ(back.size(), 1u);
        EXPECT_EQ(back.templates()[0], t);
    }
}
