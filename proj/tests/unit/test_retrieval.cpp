// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <set>
#include <sstream>

#include "scriptport/retrieval.hpp"
#include "support.hpp"

using namespace scriptport;
using sp_test::bundle;
using sp_test::code_of;
using sp_test::make_spec;

namespace {

// Reference scorer written directly from the weighting rules.
double oracle_meta(const JobSpec& s, const Template& t) {
    double v = 0;
    if (t.cluster == s.cluster) v += 0.4;
    if (t.framework == s.framework) v += 0.25;
    if (t.strategy == s.strategy) v += 0.25;
    if (t.launcher == s.launcher) v += 0.1;
    return v;
}

std::set<std::string> oracle_words(const std::string& s) {
    std::set<std::string> out;
    std::string w;
    for (char c : s + " ") {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!w.empty()) {
            out.insert(w);
            w.clear();
        }
    }
    return out;
}

double oracle_jaccard(const std::string& a, const std::string& b) {
    const auto wa = oracle_words(a), wb = oracle_words(b);
    std::set<std::string> uni = wa;
    uni.insert(wb.begin(), wb.end());
    if (uni.empty()) return 0;
    std::size_t inter = 0;
    for (const auto& w : wa) inter += wb.count(w);
    return static_cast<double>(inter) / static_cast<double>(uni.size());
}

Template tmpl(const std::string& id, const std::string& cluster, const std::string& notes = "") {
    Template t;
    t.id = id;
    t.cluster = cluster;
    t.body = "torchrun {your_script}";
    t.params.push_back(ParamDecl{"your_script", ParamKind::text, true, std::nullopt});
    t.notes = notes;
    return t;
}

class FixedEmbedder : public Embedder {
public:
    std::vector<double> embed(std::string_view text) override {
        ++calls;
        return {static_cast<double>(text.size() % 7) + 1.0, static_cast<double>(text.size() % 3)};
    }
    int calls = 0;
};

}  // namespace

TEST(Retrieval, ExactMatchRanksFirstWithFullScore) {
    const JobSpec s = make_spec("perlmutter", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 2, 4);
    const auto c = candidates(s, bundle().templates);
    ASSERT_FALSE(c.empty());
    EXPECT_EQ(c[0].template_id, "perlmutter-ddp");
    EXPECT_DOUBLE_EQ(c[0].score, 1.0);
    EXPECT_TRUE(c[0].exact);
    EXPECT_EQ(c.size(), bundle().templates.size());
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_FALSE(c[i].exact);
}

TEST(Retrieval, MissingCellIsNonExact) {
    JobSpec s = make_spec("aurora", Framework::accelerate, Strategy::ddp, Launcher::accelerate, 2, 6);
    s.description = "accelerate ddp on aurora";
    const auto c = candidates(s, bundle().templates);
    EXPECT_LT(c[0].score, 1.0);
    EXPECT_FALSE(c[0].exact);
}

TEST(Retrieval, ScoresMatchWeightOracle) {
    const JobSpec s = make_spec("perlmutter", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 2, 4);
    for (const auto& c : candidates(s, bundle().templates)) {
        const Template& t = *bundle().templates.find(c.template_id);
        const double meta = oracle_meta(s, t);
        EXPECT_NEAR(c.score, meta >= 0.9999 ? 1.0 : meta, 1e-12) << c.template_id;
    }
}

TEST(Retrieval, TokenOverlapFallbackOracle) {
    JobSpec s = make_spec("aurora", Framework::accelerate, Strategy::ddp, Launcher::accelerate, 2, 6);
    s.description = "Accelerate DDP training across PBS nodes with mpiexec";
    for (const auto& c : candidates(s, bundle().templates)) {
        const Template& t = *bundle().templates.find(c.template_id);
        const double sim = oracle_jaccard(s.description, t.notes + "\n" + t.body);
        EXPECT_NEAR(c.breakdown.similarity, sim, 1e-12) << c.template_id;
        EXPECT_NEAR(c.score, (oracle_meta(s, t) + 0.1 * sim) / 1.1, 1e-12) << c.template_id;
    }
}

TEST(Retrieval, EmbedderUsedOnlyWithoutStrongMatch) {
    FixedEmbedder e;
    const JobSpec exact = make_spec("vista", Framework::pytorch, Strategy::ddp, Launcher::torchrun, 1, 1);
    candidates(exact, bundle().templates, &e);
    EXPECT_EQ(e.calls, 0);
    JobSpec miss = make_spec("aurora", Framework::accelerate, Strategy::ddp, Launcher::accelerate, 1, 1);
    miss.description = "x";
    const auto c = candidates(miss, bundle().templates, &e);
    EXPECT_EQ(e.calls, 1 + static_cast<int>(bundle().templates.size()));
    for (const auto& r : c) EXPECT_GE(r.breakdown.similarity, 0.0);
}

TEST(Retrieval, TokenOverlapAndCosine) {
    EXPECT_DOUBLE_EQ(token_overlap("a b", "b c"), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(token_overlap("", ""), 0.0);
    EXPECT_DOUBLE_EQ(token_overlap("Srun-N", "srun n"), 1.0);
    EXPECT_DOUBLE_EQ(cosine({1, 0}, {1, 0}), 1.0);
    EXPECT_DOUBLE_EQ(cosine({1, 0}, {-1, 0}), 0.0);
    EXPECT_DOUBLE_EQ(cosine({1, 0}, {1}), 0.0);
    EXPECT_DOUBLE_EQ(cosine({}, {}), 0.0);
    EXPECT_NEAR(cosine({1, 1}, {1, 0}), std::sqrt(0.5), 1e-12);
}

TEST(Retrieval, EmptySetHasNoCandidates) {
    const JobSpec s = sp_test::reference_spec();
    EXPECT_EQ(code_of([&] { candidates(s, TemplateSet{}); }), ErrorCode::no_candidates);
}

TEST(Retrieval, SingletonRanksFirst) {
    const TemplateSet one = TemplateSet().add(tmpl("only", "vista"));
    const auto c = candidates(sp_test::reference_spec(), one);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].template_id, "only");
}

TEST(Retrieval, TiesBreakById) {
    Template a = tmpl("a-y", "vista");
    Template b = tmpl("a-x", "vista");
    b.launcher = Launcher::srun;
    const TemplateSet set = TemplateSet().add(a).add(b);
    JobSpec s = make_spec("vista", Framework::pytorch, Strategy::fsdp, Launcher::mpiexec, 1, 1);
    const auto c = candidates(s, set);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_DOUBLE_EQ(c[0].score, c[1].score);
    EXPECT_EQ(c[0].template_id, "a-x");
}

TEST(Select, TakesPrefix) {
    const auto c = candidates(sp_test::reference_spec(), bundle().templates);
    const auto one = select(c, bundle().templates, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0]->id, c[0].template_id);
    const auto five = select(c, bundle().templates, 5);
    ASSERT_EQ(five.size(), 5u);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(five[i]->id, c[i].template_id);
    const TemplateSet two = TemplateSet().add(tmpl("a", "vista")).add([] {
        Template t = tmpl("b", "vista");
        t.launcher = Launcher::srun;
        return t;
    }());
    EXPECT_EQ(select(candidates(sp_test::reference_spec(), two), two, 5).size(), 2u);
    EXPECT_EQ(code_of([&] { select(c, bundle().templates, 0); }), ErrorCode::usage);
}

TEST(RetrievalProperty, OrderDeterminismDominanceAndMonotonicity) {
    sp_test::rng(17);
    const Framework fws[] = {Framework::pytorch, Framework::deepspeed, Framework::accelerate};
    const Strategy sts[] = {Strategy::ddp, Strategy::fsdp, Strategy::zero3};
    const Launcher ls[] = {Launcher::torchrun, Launcher::mpiexec, Launcher::deepspeed, Launcher::accelerate,
                           Launcher::srun};
    const auto ids = bundle().profiles.ids();
    for (int round = 0; round < 200; ++round) {
        JobSpec s = make_spec(ids[sp_test::uniform(0, 8)], fws[sp_test::uniform(0, 2)], sts[sp_test::uniform(0, 2)],
                              ls[sp_test::uniform(0, 4)], 1, 1);
        s.description = "job " + std::to_string(round) + " using srun torchrun mpiexec";
        const auto c = candidates(s, bundle().templates);
        EXPECT_EQ(c, candidates(s, bundle().templates));
        bool seen_non_exact = false;
        for (std::size_t i = 0; i < c.size(); ++i) {
            EXPECT_GE(c[i].score, 0.0);
            EXPECT_LE(c[i].score, 1.0);
            if (!c[i].exact) seen_non_exact = true;
            if (seen_non_exact) EXPECT_FALSE(c[i].exact);
            if (i > 0 && c[i].exact == c[i - 1].exact) {
                EXPECT_TRUE(c[i - 1].score > c[i].score ||
                            (c[i - 1].score == c[i].score && c[i - 1].template_id < c[i].template_id));
            }
        }
        // An unrelated template leaves the relative order of the others alone
        // whenever the exact-match regime does not change.
        Template extra = tmpl("zz-unrelated-" + std::to_string(round), "nowhere");
        extra.framework = Framework::accelerate;
        extra.strategy = Strategy::zero3;
        extra.launcher = Launcher::srun;
        const TemplateSet grown = bundle().templates.add(extra);
        std::vector<std::string> before, after;
        for (const auto& r : c) before.push_back(r.template_id);
        for (const auto& r : candidates(s, grown)) {
            if (r.template_id != extra.id) after.push_back(r.template_id);
        }
        if (oracle_meta(s, extra) < 0.9) EXPECT_EQ(before, after);
    }
}
