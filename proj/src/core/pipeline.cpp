// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/pipeline.hpp"

#include <algorithm>

#include "json_util.hpp"
#include "scriptport/bundled.hpp"
#include "scriptport/error.hpp"
#include "scriptport/static_verify.hpp"
#include "scriptport/synthesis.hpp"

namespace scriptport {

using nlohmann::json;

Resources Resources::bundled() { return load_resources({}); }

Resources load_resources(const ResourceOptions& options) {
    Resources r;
    r.profiles = ProfileSet::load(bundled::profiles());
    for (const auto& doc : options.extra_profiles) r.profiles = r.profiles.merged(ProfileSet::load(doc));
    r.templates = TemplateSet::load(bundled::templates());
    for (const auto& doc : options.extra_templates) {
        const TemplateSet extra = TemplateSet::load(doc);
        for (const auto& t : extra.templates()) r.templates = r.templates.add(t);
    }
    for (const auto& t : r.templates.templates()) {
        if (r.profiles.find(t.cluster) == nullptr) {
            throw Error(ErrorCode::template_invalid,
                        "template \"" + t.id + "\" targets unknown cluster \"" + t.cluster + "\"");
        }
    }
    r.rules = FaultRuleSet::load(options.rules ? *options.rules : bundled::fault_rules(), r.profiles);
    r.fingerprints =
        FingerprintSet::load(options.fingerprints ? *options.fingerprints : bundled::fingerprints());
    r.repairs = RepairTable::load(options.repairs ? *options.repairs : bundled::repairs());
    r.prompts = BridgePrompts::load(bundled::bridge_prompts());
    return r;
}

namespace {

bool is_field(const std::string& key) {
    static const char* kFields[] = {"cluster", "framework", "strategy", "launcher", "nodes",
                                    "gpus_per_node", "total_gpus", "master_port", "entry_script",
                                    "train_args", "deepspeed_config"};
    return std::any_of(std::begin(kFields), std::end(kFields), [&](const char* f) { return key == f; });
}

// Fills missing fields from answers, then (interactively) from the prompt.
PartialJobSpec complete(PartialJobSpec p, const Resources& res, const Request& req, json& report) {
    json answered = json::array();
    for (;;) {
        const auto missing = missing_fields(p);
        if (missing.empty()) break;
        bool progressed = false;
        for (const auto& field : missing) {
            std::optional<std::string> value;
            std::string source;
            for (const auto& [k, v] : req.answers) {
                if (k == field || (field == "gpus_per_node" && k == "total_gpus")) {
                    value = v;
                    source = k;
                }
            }
            if (!value && req.interactive && req.prompt) {
                value = req.prompt(field);
                source = field;
            }
            if (!value || detail::trim(*value).empty()) continue;
            set_field(p, source, *value, res.profiles);
            answered.push_back({{"field", source}, {"value", *value}});
            progressed = true;
            break;  // one field at a time, in stable order
        }
        if (!progressed) break;
    }
    if (auto missing = missing_fields(p); !missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorCode::incomplete_spec, "missing required fields: " + list);
    }
    if (!answered.empty()) report["answered"] = answered;
    return p;
}

std::map<std::string, std::string> repair_answers(const Request& req) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : req.answers) {
        if (!is_field(k)) out[k] = v;
    }
    return out;
}

Outcome synthesize(const Resources& res, JobSpec spec, const ClusterProfile& profile,
                   const Request& req, const Services& services, json report) {
    Outcome out;
    out.spec = spec;
    report["spec"] = to_json(spec);

    const auto ranked = candidates(spec, res.templates, services.embedder);
    json cands = json::array();
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(std::max(req.k, 1)); ++i) {
        cands.push_back(to_json(ranked[i]));
    }
    report["candidates"] = cands;

    SimHarness harness(res.rules);
    LoopConfig config;
    config.fingerprints = &res.fingerprints;
    config.repairs = &res.repairs;
    config.templates = &res.templates;
    config.repairer = services.repairer;
    config.answers = repair_answers(req);
    config.max_iter = req.max_iter;

    json attempts = json::array();
    for (const Template* t : select(ranked, res.templates, std::max(req.k, 1))) {
        json attempt{{"template_id", t->id}};
        if (t->cluster != spec.cluster) {
            attempt["skipped"] = "template targets " + t->cluster;
            attempts.push_back(std::move(attempt));
            continue;
        }
        RenderedScript rendered;
        try {
            rendered = render(*t, bind(spec, *t, profile), spec);
        } catch (const Error& e) {
            attempt["skipped"] = e.what();
            attempts.push_back(std::move(attempt));
            continue;
        }
        const auto findings = lint(rendered, spec, profile);
        json jf = json::array();
        for (const auto& f : findings) jf.push_back(to_json(f));
        attempt["findings"] = jf;
        if (error_count(findings) > 0) {
            attempt["skipped"] = "static verification failed";
            attempts.push_back(std::move(attempt));
            continue;
        }
        const LoopOutcome loop = run_loop(spec, *t, profile, harness, config);
        attempt["loop"] = to_json(loop);
        attempts.push_back(std::move(attempt));
        if (loop.status == LoopStatus::success) {
            out.success = true;
            out.script = req.walltime_minutes
                             ? wrap_batch(loop.final_script, profile, *req.walltime_minutes, req.account)
                             : loop.final_script.text;
            break;
        }
    }
    report["attempts"] = attempts;
    report["status"] = out.success ? "success" : "unresolved";
    out.report = std::move(report);
    return out;
}

}  // namespace

Outcome generate(const Resources& res, std::string_view description, const Request& req,
                 const Services& services) {
    if (description.empty() && req.flags == PartialJobSpec{}) {
        throw Error(ErrorCode::usage, "a job description or job flags are required");
    }
    json report = json::object();
    PartialJobSpec p;
    if (!description.empty()) {
        RuleExtractor rules(res.profiles);
        Extractor& ex = services.extractor ? *services.extractor : rules;
        p = ex.extract(description);
        if (auto* fb = dynamic_cast<FallbackExtractor*>(services.extractor);
            fb != nullptr && !fb->last_fallback_reason().empty()) {
            report["extractor_fallback"] = fb->last_fallback_reason();
        }
    }
    if (p.cluster) p.cluster = res.profiles.resolve(*p.cluster).id;
    p = overlay(p, req.flags);
    if (req.flags.cluster) p.cluster = res.profiles.resolve(*req.flags.cluster).id;
    report["extracted"] = to_json(p);
    p = complete(p, res, req, report);

    const ClusterProfile& profile = res.profiles.resolve(*p.cluster);
    JobSpec spec = finalize(p, profile);
    spec.description = std::string(description);
    return synthesize(res, std::move(spec), profile, req, services, std::move(report));
}

Outcome port(const Resources& res, std::string_view script, std::string_view target,
             const Request& req, const Services& services) {
    const ClusterProfile& profile = res.profiles.resolve(target);
    PartialJobSpec p = parse_script(script);
    if (!p.launcher) throw Error(ErrorCode::usage, "no launch command recognised in the script");
    p = apply_implications(p);
    // Generic launchers are a property of the source cluster; the target's
    // default takes over. Framework launchers carry over.
    if (p.launcher == Launcher::torchrun || p.launcher == Launcher::mpiexec ||
        p.launcher == Launcher::srun) {
        p.launcher.reset();
    }
    p.cluster = profile.id;
    p = overlay(p, req.flags);
    p.cluster = profile.id;

    json report = json::object();
    report["parsed"] = to_json(p);
    p = complete(p, res, req, report);

    JobSpec spec;
    try {
        spec = finalize(p, profile);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::capacity) throw;
        int world = 0;
        if (p.total_gpus) {
            world = *p.total_gpus;
        } else if (p.nodes && p.gpus_per_node) {
            world = *p.nodes * *p.gpus_per_node;
        }
        std::string msg = e.what();
        if (world > 0) {
            msg += "; world size " + std::to_string(world) + " fits " + profile.id + " as:";
            bool first = true;
            for (const auto& t : suggest_topologies(world, profile.gpus_per_node)) {
                msg += std::string(first ? " " : ", ") + "nodes=" + std::to_string(t.nodes) +
                       " gpus_per_node=" + std::to_string(t.gpus_per_node);
                first = false;
            }
        }
        throw Error(ErrorCode::capacity, msg);
    }
    spec.description = std::string(script);
    return synthesize(res, std::move(spec), profile, req, services, std::move(report));
}

}  // namespace scriptport
