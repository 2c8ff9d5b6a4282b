// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Everything goes through the C interface.

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scriptport/scriptport.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnresolved = 2;

struct Failure {
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{"cannot read " + path};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw Failure{"cannot write " + path};
}

// Owns a string returned by the library.
class Owned {
public:
    Owned() = default;
    Owned(const Owned&) = delete;
    Owned& operator=(const Owned&) = delete;
    ~Owned() { sp_string_free(p_); }
    char** out() { return &p_; }
    std::string str() const { return p_ ? p_ : ""; }

private:
    char* p_ = nullptr;
};

void check(sp_status st) {
    if (st != SP_OK) throw Failure{std::string(sp_status_name(st)) + ": " + sp_last_error()};
}

struct Config {
    std::vector<std::string> profiles;
    std::vector<std::string> templates;
    std::string rules;
    std::string fingerprints;
    std::string repairs;
    std::string bridge_config;
};

class Context {
public:
    explicit Context(const Config& c) {
        json opts = json::object();
        if (!c.profiles.empty()) {
            opts["profiles"] = json::array();
            for (const auto& f : c.profiles) opts["profiles"].push_back(read_file(f));
        }
        if (!c.templates.empty()) {
            opts["templates"] = json::array();
            for (const auto& f : c.templates) opts["templates"].push_back(read_file(f));
        }
        if (!c.rules.empty()) opts["rules"] = read_file(c.rules);
        if (!c.fingerprints.empty()) opts["fingerprints"] = read_file(c.fingerprints);
        if (!c.repairs.empty()) opts["repairs"] = read_file(c.repairs);
        if (!c.bridge_config.empty()) opts["bridge"] = read_file(c.bridge_config);
        check(sp_context_new(opts.dump().c_str(), &ctx_));
    }
    Context(const Context&) = delete;
    Context& operator=(const Context&) = delete;
    ~Context() { sp_context_free(ctx_); }
    sp_context* get() const { return ctx_; }

private:
    sp_context* ctx_ = nullptr;
};

void add_config_options(CLI::App* cmd, Config& c) {
    cmd->add_option("--profiles", c.profiles, "Profile document merged into the bundled registry")
        ->check(CLI::ExistingFile);
    cmd->add_option("--templates", c.templates, "Template document merged into the bundled repository")
        ->check(CLI::ExistingFile);
    cmd->add_option("--rules", c.rules, "Fault-rule document replacing the bundled rules")
        ->check(CLI::ExistingFile);
    cmd->add_option("--fingerprints", c.fingerprints, "Fingerprint document replacing the bundled set")
        ->check(CLI::ExistingFile);
    cmd->add_option("--repairs", c.repairs, "Repair table replacing the bundled table")
        ->check(CLI::ExistingFile);
    cmd->add_option("--bridge-config", c.bridge_config, "Model-bridge configuration document")
        ->check(CLI::ExistingFile);
}

struct JobOptions {
    std::string cluster, framework, strategy, launcher, entry, args, deepspeed_config;
    std::optional<int> nodes, gpus_per_node, total_gpus, port;
    std::vector<std::string> answers;
    bool report = false;
    bool non_interactive = false;
    int k = 3;
    int max_iter = 5;
    std::optional<int> walltime;
    std::string account;
};

void add_job_options(CLI::App* cmd, JobOptions& o, bool with_cluster) {
    if (with_cluster) cmd->add_option("--cluster", o.cluster, "Target cluster id or alias");
    cmd->add_option("--framework", o.framework, "pytorch, deepspeed or accelerate");
    cmd->add_option("--strategy", o.strategy, "ddp, fsdp, zero3 or acc-ddp");
    cmd->add_option("--launcher", o.launcher, "torchrun, mpiexec, srun, deepspeed or accelerate");
    cmd->add_option("--nodes", o.nodes, "Number of nodes")->check(CLI::PositiveNumber);
    cmd->add_option("--gpus-per-node", o.gpus_per_node, "GPUs per node")->check(CLI::PositiveNumber);
    cmd->add_option("--total-gpus", o.total_gpus, "Total GPUs (world size)")->check(CLI::PositiveNumber);
    cmd->add_option("--port", o.port, "Rendezvous port")->check(CLI::Range(1024, 65535));
    cmd->add_option("--entry", o.entry, "Training entry script");
    cmd->add_option("--args", o.args, "Arguments passed to the entry script");
    cmd->add_option("--deepspeed-config", o.deepspeed_config, "DeepSpeed config path");
    cmd->add_option("--answers", o.answers, "field=value answers for missing fields and repair inputs");
    cmd->add_flag("--report", o.report, "Print the full JSON report instead of the script");
    cmd->add_flag("--non-interactive", o.non_interactive, "Never prompt; fail on missing fields");
    cmd->add_option("-k,--candidates", o.k, "Number of candidate templates to try")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", o.max_iter, "Repair iterations per candidate")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--walltime", o.walltime, "Wrap the script in a batch header with this walltime (minutes)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--account", o.account, "Allocation account for the batch header");
}

json build_request(const JobOptions& o, bool interactive) {
    json flags = json::object();
    auto set_str = [&](const char* key, const std::string& v) {
        if (!v.empty()) flags[key] = v;
    };
    set_str("cluster", o.cluster);
    set_str("framework", o.framework);
    set_str("launcher", o.launcher);
    set_str("entry_script", o.entry);
    set_str("train_args", o.args);
    set_str("deepspeed_config", o.deepspeed_config);
    if (!o.strategy.empty()) {
        if (o.strategy == "acc-ddp" || o.strategy == "acc_ddp") {
            flags["strategy"] = "ddp";
            flags["framework"] = "accelerate";
            if (o.launcher.empty()) flags["launcher"] = "accelerate";
        } else {
            flags["strategy"] = o.strategy;
        }
    }
    if (o.nodes) flags["nodes"] = *o.nodes;
    if (o.gpus_per_node) flags["gpus_per_node"] = *o.gpus_per_node;
    if (o.total_gpus) flags["total_gpus"] = *o.total_gpus;
    if (o.port) flags["master_port"] = *o.port;

    json answers = json::array();
    for (const auto& a : o.answers) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) throw Failure{"usage: --answers expects field=value, got \"" + a + "\""};
        answers.push_back({a.substr(0, eq), a.substr(eq + 1)});
    }
    json req{{"flags", flags}, {"answers", answers}, {"interactive", interactive},
             {"k", o.k}, {"max_iter", o.max_iter}, {"account", o.account}};
    if (o.walltime) req["walltime_minutes"] = *o.walltime;
    return req;
}

// Asks on stderr, reads one line from stdin.
const char* prompt_stdin(const char* field, void* user_data) {
    auto* buffer = static_cast<std::string*>(user_data);
    std::cerr << field << "? " << std::flush;
    if (!std::getline(std::cin, *buffer)) return nullptr;
    return buffer->c_str();
}

int emit(const std::string& result_text, bool report) {
    const json result = json::parse(result_text);
    const bool success = result.at("success").get<bool>();
    if (report) {
        std::cout << result.dump(2) << "\n";
    } else if (success) {
        std::cout << result.at("script").get<std::string>() << "\n";
    } else {
        const json& rep = result.at("report");
        std::cerr << "error: unresolved: no candidate script passed verification";
        if (rep.contains("attempts")) {
            for (const auto& a : rep["attempts"]) {
                std::cerr << "\n  " << a.value("template_id", std::string("?")) << ": ";
                if (a.contains("loop")) {
                    const json& hist = a["loop"]["history"];
                    if (!hist.empty()) {
                        const json& d = hist.back()["diagnosis"];
                        std::cerr << d.value("fingerprint_id", std::string("unknown")) << " ("
                                  << d.value("category", std::string("unknown")) << ")";
                    } else {
                        std::cerr << a["loop"].value("status", std::string("unresolved"));
                    }
                } else {
                    std::cerr << a.value("skipped", std::string("skipped"));
                }
            }
        }
        std::cerr << "\n";
    }
    return success ? kExitOk : kExitUnresolved;
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate, verify and port multi-node training launch scripts"};
    app.set_version_flag("--version", std::string(sp_version()));
    app.require_subcommand(1);

    Config config;
    JobOptions job;

    auto* gen = app.add_subcommand("generate", "Build a verified launch script from a description");
    std::vector<std::string> description;
    gen->add_option("description", description, "Free-text job description");
    add_job_options(gen, job, true);
    add_config_options(gen, config);

    auto* prt = app.add_subcommand("port", "Rewrite a launch script for another cluster");
    std::string script_path, target;
    prt->add_option("script", script_path, "Launch script file")->required()->check(CLI::ExistingFile);
    prt->add_option("--to", target, "Target cluster id or alias")->required();
    add_job_options(prt, job, false);
    add_config_options(prt, config);

    auto* tpl = app.add_subcommand("templates", "Inspect or extend the template repository");
    tpl->require_subcommand(1);
    auto* tpl_list = tpl->add_subcommand("list", "List templates");
    std::string list_cluster;
    tpl_list->add_option("--cluster", list_cluster, "Only templates for this cluster");
    add_config_options(tpl_list, config);
    auto* tpl_validate = tpl->add_subcommand("validate", "Validate a repository document");
    std::string validate_path;
    tpl_validate->add_option("file", validate_path, "Repository document")->required()->check(CLI::ExistingFile);
    add_config_options(tpl_validate, config);
    auto* tpl_add = tpl->add_subcommand("add", "Validate a template record and add it to a repository");
    std::string record_path, repo_path;
    tpl_add->add_option("record", record_path, "Template record (JSON object)")->required()->check(CLI::ExistingFile);
    tpl_add->add_option("--repository", repo_path, "Repository document to update (created if missing)")
        ->required();
    add_config_options(tpl_add, config);

    auto* cl = app.add_subcommand("clusters", "Inspect or extend the cluster registry");
    cl->require_subcommand(1);
    auto* cl_list = cl->add_subcommand("list", "List cluster profiles");
    add_config_options(cl_list, config);
    auto* cl_add = cl->add_subcommand("add", "Validate a profile record and add it to a registry");
    std::string profile_path, registry_path;
    cl_add->add_option("record", profile_path, "Profile record (JSON object)")->required()->check(CLI::ExistingFile);
    cl_add->add_option("--registry", registry_path, "Registry document to update (created if missing)")
        ->required();
    add_config_options(cl_add, config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        const Context ctx(config);
        const bool interactive = !job.non_interactive && isatty(STDIN_FILENO) != 0;
        std::string prompt_buffer;

        if (*gen) {
            const json req = build_request(job, interactive);
            Owned out;
            check(sp_generate(ctx.get(), join(description).c_str(), req.dump().c_str(), prompt_stdin,
                              &prompt_buffer, out.out()));
            return emit(out.str(), job.report);
        }
        if (*prt) {
            const json req = build_request(job, interactive);
            const std::string script = read_file(script_path);
            Owned out;
            check(sp_port(ctx.get(), script.c_str(), target.c_str(), req.dump().c_str(), prompt_stdin,
                          &prompt_buffer, out.out()));
            return emit(out.str(), job.report);
        }
        if (*tpl_list) {
            Owned out;
            check(sp_templates_list(ctx.get(), list_cluster.empty() ? nullptr : list_cluster.c_str(), out.out()));
            std::printf("%-22s %-11s %-11s %-9s %-11s %s\n", "id", "cluster", "framework", "strategy",
                        "launcher", "verified");
            for (const auto& t : json::parse(out.str())) {
                std::printf("%-22s %-11s %-11s %-9s %-11s %s\n", t["id"].get<std::string>().c_str(),
                            t["cluster"].get<std::string>().c_str(), t["framework"].get<std::string>().c_str(),
                            t["strategy"].get<std::string>().c_str(), t["launcher"].get<std::string>().c_str(),
                            t["verified"].get<bool>() ? "yes" : "no");
            }
            return kExitOk;
        }
        if (*tpl_validate) {
            Owned out;
            check(sp_templates_validate(ctx.get(), read_file(validate_path).c_str(), out.out()));
            std::cout << validate_path << ": " << json::parse(out.str())["templates"].get<int>()
                      << " template(s) valid\n";
            return kExitOk;
        }
        if (*tpl_add) {
            std::optional<std::string> repo;
            if (std::ifstream(repo_path)) repo = read_file(repo_path);
            Owned out;
            check(sp_templates_add(ctx.get(), repo ? repo->c_str() : nullptr, read_file(record_path).c_str(),
                                   out.out()));
            write_file(repo_path, out.str());
            return kExitOk;
        }
        if (*cl_list) {
            Owned out;
            check(sp_clusters_list(ctx.get(), out.out()));
            std::printf("%-11s %-10s %-11s %5s  %-22s %s\n", "id", "scheduler", "launcher", "gpus",
                        "gpu_type", "walltime_min");
            for (const auto& p : json::parse(out.str())) {
                std::printf("%-11s %-10s %-11s %5d  %-22s %d\n", p["id"].get<std::string>().c_str(),
                            p["scheduler"].get<std::string>().c_str(),
                            p["default_launcher"].get<std::string>().c_str(), p["gpus_per_node"].get<int>(),
                            p["gpu_type"].get<std::string>().c_str(), p["max_walltime_minutes"].get<int>());
            }
            return kExitOk;
        }
        if (*cl_add) {
            std::optional<std::string> reg;
            if (std::ifstream(registry_path)) reg = read_file(registry_path);
            Owned out;
            check(sp_clusters_add(ctx.get(), reg ? reg->c_str() : nullptr, read_file(profile_path).c_str(),
                                  out.out()));
            write_file(registry_path, out.str());
            return kExitOk;
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
