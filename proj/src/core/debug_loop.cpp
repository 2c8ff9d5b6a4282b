// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/debug_loop.hpp"

#include <algorithm>
#include <regex>

#include "json_util.hpp"
#include "scriptport/error.hpp"
#include "scriptport/static_verify.hpp"

namespace scriptport {

using detail::json;

std::string_view to_string(Confidence c) { return c == Confidence::high ? "high" : "low"; }

std::string_view to_string(LoopStatus s) {
    return s == LoopStatus::success ? "success" : "unresolved";
}

json to_json(const RepairAction& a) {
    json payload = json::object();
    for (const auto& [k, v] : a.payload) payload[k] = v;
    return json{{"kind", to_string(a.kind)}, {"payload", payload}, {"rationale", a.rationale}};
}

json to_json(const Diagnosis& d) {
    json out{{"category", to_string(d.category)},
             {"explanation", d.explanation},
             {"confidence", to_string(d.confidence)}};
    out["fingerprint_id"] = d.fingerprint_id ? json(*d.fingerprint_id) : json(nullptr);
    if (!d.remote_actions.empty()) {
        json acts = json::array();
        for (const auto& a : d.remote_actions) acts.push_back(to_json(a));
        out["remote_actions"] = acts;
    }
    if (!d.dropped.empty()) out["dropped"] = d.dropped;
    return out;
}

void validate_action(const RepairAction& a, std::string_view ctx) {
    auto need = [&](const char* key) {
        auto it = a.payload.find(key);
        if (it == a.payload.end() || it->second.empty()) {
            detail::field_error(ctx, "payload", std::string(to_string(a.kind)) + " needs \"" + key + "\"");
        }
    };
    switch (a.kind) {
        case RepairKind::set_param:
            need("param");
            if (a.payload.count("value") == 0) {
                need("find");
                if (a.payload.count("replace") == 0) {
                    detail::field_error(ctx, "payload", "set_param needs \"value\" or \"find\" + \"replace\"");
                }
            }
            break;
        case RepairKind::prepend_line: need("line"); break;
        case RepairKind::export_env: {
            need("var");
            static const std::regex kVar("[A-Za-z_][A-Za-z0-9_]*");
            if (!std::regex_match(a.payload.at("var"), kVar)) {
                detail::field_error(ctx, "payload", "invalid variable name \"" + a.payload.at("var") + "\"");
            }
            break;
        }
        case RepairKind::add_module_load: need("module"); break;
        case RepairKind::pin_version:
            need("package");
            need("version");
            break;
        case RepairKind::switch_template: need("template"); break;
        case RepairKind::add_arg: need("args"); break;
    }
}

namespace {

RepairAction action_from_json(const json& rec, const std::string& ctx) {
    if (!rec.is_object()) detail::field_error(ctx, "<record>", "expected object");
    RepairAction a;
    a.kind = detail::req_enum<RepairKind>(rec, ctx, "kind", parse_repair_kind);
    a.rationale = detail::opt_string(rec, ctx, "rationale").value_or("");
    if (auto p = rec.find("payload"); p != rec.end()) {
        if (!p->is_object()) detail::field_error(ctx, "payload", "expected object");
        for (const auto& [k, v] : p->items()) {
            if (!v.is_string()) detail::field_error(ctx, "payload." + k, "expected string");
            a.payload[k] = v.get<std::string>();
        }
    }
    validate_action(a, ctx);
    return a;
}

bool fingerprint_matches(const Fingerprint& f, std::string_view text) {
    if (f.pattern.empty() || f.pattern[0] != '^') return text.find(f.pattern) != std::string_view::npos;
    const std::regex re(f.pattern);
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string line(text.substr(start, end - start));
        if (std::regex_search(line, re)) return true;
        start = end + 1;
    }
    return false;
}

}  // namespace

FingerprintSet FingerprintSet::load(std::string_view document) {
    const json doc = detail::parse_array_document(document, "fingerprint document");
    FingerprintSet set;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string ctx = "fingerprint[" + std::to_string(i) + "]";
        const json& rec = doc[i];
        if (!rec.is_object()) detail::field_error(ctx, "<record>", "expected object");
        Fingerprint f;
        f.id = detail::req_string(rec, ctx, "id");
        if (set.find(f.id) != nullptr) detail::field_error(ctx, "id", "duplicate id \"" + f.id + "\"");
        f.category = detail::req_enum<Category>(rec, ctx, "category", parse_category);
        if (f.category == Category::unknown) {
            detail::field_error(ctx, "category", "must be env, framework or user");
        }
        f.pattern = detail::req_string(rec, ctx, "pattern");
        if (f.pattern.empty()) detail::field_error(ctx, "pattern", "must not be empty");
        if (f.pattern[0] == '^') {
            try {
                std::regex check(f.pattern);
            } catch (const std::regex_error& e) {
                detail::field_error(ctx, "pattern", std::string("invalid regular expression: ") + e.what());
            }
        }
        f.explanation = detail::opt_string(rec, ctx, "explanation").value_or("");
        set.fingerprints_.push_back(std::move(f));
    }
    return set;
}

const Fingerprint* FingerprintSet::match(std::string_view stderr_text) const {
    for (const auto& f : fingerprints_) {
        if (fingerprint_matches(f, stderr_text)) return &f;
    }
    return nullptr;
}

const Fingerprint* FingerprintSet::find(std::string_view id) const {
    for (const auto& f : fingerprints_) {
        if (f.id == id) return &f;
    }
    return nullptr;
}

RepairTable RepairTable::load(std::string_view document) {
    RepairTable table;
    if (detail::trim(document).empty()) return table;
    const json doc = detail::parse_document(document, "repair table");
    if (!doc.is_object()) detail::field_error("repair table", "<document>", "expected object");
    if (auto d = doc.find("defaults"); d != doc.end()) {
        if (!d->is_object()) detail::field_error("repair table", "defaults", "expected object");
        for (const auto& [k, v] : d->items()) {
            if (!v.is_string()) detail::field_error("repair table", "defaults." + k, "expected string");
            table.defaults_[k] = v.get<std::string>();
        }
    }
    if (auto r = doc.find("repairs"); r != doc.end()) {
        if (!r->is_object()) detail::field_error("repair table", "repairs", "expected object");
        for (const auto& [fp, list] : r->items()) {
            const std::string ctx = "repairs." + fp;
            if (!list.is_array()) detail::field_error(ctx, "<list>", "expected array");
            std::vector<RepairAction> actions;
            for (std::size_t i = 0; i < list.size(); ++i) {
                actions.push_back(action_from_json(list[i], ctx + "[" + std::to_string(i) + "]"));
            }
            table.entries_[fp] = std::move(actions);
        }
    }
    return table;
}

const std::vector<RepairAction>* RepairTable::find(std::string_view fingerprint_id) const {
    auto it = entries_.find(std::string(fingerprint_id));
    return it == entries_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Free-text proposals

std::optional<RepairAction> parse_proposal(std::string_view text_in, std::string& reason) {
    static const std::regex kBullet(R"(^\s*(?:[-*]|\d+[.)])\s+)");
    std::string text = std::regex_replace(detail::trim(text_in), kBullet, "");
    text = detail::trim(text);
    while (!text.empty() && (text.back() == '.' || text.back() == ';')) text.pop_back();
    const std::string lc = detail::lowercase(text);

    RepairAction a;
    a.rationale = "remote proposal: " + text;
    std::smatch m;

    static const std::regex kExport(R"(^export\s+([A-Za-z_][A-Za-z0-9_]*)(?:=\S*)?$)");
    static const std::regex kModule(R"(^module\s+load\s+(.+)$)");
    static const std::regex kPip(R"(pip\s+install\s+(?:-U\s+|--upgrade\s+)?([A-Za-z0-9_.\-]+)==([A-Za-z0-9_.+\-]+))");
    static const std::regex kAddArg(R"(^(?:add|append)\s+(?:the\s+)?(?:args?|arguments?)\s*:?\s+(.+)$)", std::regex::icase);
    static const std::regex kSet(R"(^set\s+([a-z][a-z0-9_]*)\s*(?:=|\s+to\s+)\s*(.+)$)", std::regex::icase);
    static const std::regex kSwitch(R"(^(?:use|switch\s+to)\s+template\s+([a-z0-9][a-z0-9_.\-]*)$)", std::regex::icase);
    static const std::regex kPrepend(R"(^prepend\s*:\s*(.+)$)", std::regex::icase);

    if (std::regex_match(text, m, kExport)) {
        a.kind = RepairKind::export_env;
        a.payload["var"] = m[1].str();
    } else if (std::regex_match(text, m, kModule)) {
        a.kind = RepairKind::add_module_load;
        a.payload["module"] = detail::trim(m[1].str());
    } else if (lc.find("nightly") != std::string::npos &&
               (lc.find("torch") != std::string::npos)) {
        a.kind = RepairKind::pin_version;
        a.payload["package"] = "torch";
        a.payload["version"] = "nightly";
    } else if (std::regex_search(text, m, kPip)) {
        a.kind = RepairKind::pin_version;
        a.payload["package"] = m[1].str();
        a.payload["version"] = m[2].str();
    } else if (std::regex_match(text, m, kAddArg)) {
        a.kind = RepairKind::add_arg;
        a.payload["args"] = detail::trim(m[1].str());
    } else if (std::regex_match(text, m, kSet)) {
        a.kind = RepairKind::set_param;
        a.payload["param"] = detail::lowercase(m[1].str());
        a.payload["value"] = detail::trim(m[2].str());
    } else if (std::regex_match(text, m, kSwitch)) {
        a.kind = RepairKind::switch_template;
        a.payload["template"] = detail::lowercase(m[1].str());
    } else if (std::regex_match(text, m, kPrepend)) {
        a.kind = RepairKind::prepend_line;
        a.payload["line"] = detail::trim(m[1].str());
    } else {
        reason = "unrecognised proposal: \"" + text + "\"";
        return std::nullopt;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Diagnosis and proposals

Diagnosis diagnose(const ExecutionResult& res, const ClusterProfile& profile,
                   const FingerprintSet& fingerprints) {
    if (res.exit_code == 0) {
        throw Error(ErrorCode::contract_violation, "diagnose called on a successful execution");
    }
    Diagnosis d;
    if (const Fingerprint* f = fingerprints.match(res.stderr_text)) {
        d.category = f->category;
        d.fingerprint_id = f->id;
        d.explanation = f->explanation.empty() ? f->id : f->explanation;
        d.confidence = Confidence::high;
    } else {
        d.explanation = "no known failure pattern matched on " + profile.id;
    }
    return d;
}

Diagnosis diagnose(const ExecutionResult& res, const RenderedScript& r, const JobSpec& spec,
                   const ClusterProfile& profile, const FingerprintSet& fingerprints,
                   Repairer* repairer) {
    Diagnosis d = diagnose(res, profile, fingerprints);
    if (d.fingerprint_id || repairer == nullptr) return d;

    const json context{
        {"stderr", res.stderr_text},
        {"script", r.text},
        {"spec", to_json(spec)},
        {"profile",
         {{"id", profile.id},
          {"scheduler", to_string(profile.scheduler)},
          {"gpu_type", profile.gpu_type},
          {"gpus_per_node", profile.gpus_per_node},
          {"env_propagation", profile.env_propagation}}},
    };
    RemoteProposal remote;
    try {
        remote = repairer->propose(context);
    } catch (const Error& e) {
        d.dropped.push_back(std::string("remote repair failed: ") + e.what());
        return d;
    }
    for (const auto& p : remote.proposals) {
        std::string reason;
        if (auto a = parse_proposal(p, reason)) {
            d.remote_actions.push_back(std::move(*a));
        } else {
            d.dropped.push_back(reason);
        }
    }
    if (!d.remote_actions.empty()) {
        d.category = remote.category.value_or(Category::user);
        if (d.category == Category::unknown) d.category = Category::user;
        if (!remote.explanation.empty()) d.explanation = remote.explanation;
    }
    return d;
}

std::vector<RepairAction> propose(const Diagnosis& d, const RenderedScript& /*r*/,
                                  const JobSpec& spec, const RepairTable& table,
                                  const std::map<std::string, std::string>& answers) {
    if (!d.fingerprint_id) {
        if (!d.remote_actions.empty()) return d.remote_actions;
        throw Error(ErrorCode::no_repair_available,
                    "failure could not be classified and no remote repair is available");
    }
    const auto* list = table.find(*d.fingerprint_id);
    if (list == nullptr || list->empty()) {
        throw Error(ErrorCode::no_repair_available,
                    "no repair actions are known for " + *d.fingerprint_id);
    }

    ParamBinding values;
    for (const auto& [k, v] : table.defaults()) values[k] = {v, Provenance::default_value};
    for (const auto& [k, v] : answers) values[k] = {v, Provenance::user};
    auto put = [&](const char* k, std::string v) { values[k] = {std::move(v), Provenance::derived}; };
    put("cluster", spec.cluster);
    put("nodes", std::to_string(spec.nodes));
    put("gpus_per_node", std::to_string(spec.gpus_per_node));
    put("world_size", std::to_string(spec.world_size()));
    put("master_port", std::to_string(spec.master_port));
    put("entry_script", spec.entry_script);
    if (spec.deepspeed_config) put("deepspeed_config", *spec.deepspeed_config);

    std::vector<RepairAction> out;
    for (RepairAction a : *list) {
        for (auto& [k, v] : a.payload) v = render_text(v, values);
        out.push_back(std::move(a));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Edits

namespace {

std::string pin_line(const std::string& package, const std::string& version) {
    if (version == "nightly") {
        if (package == "torch") {
            return "pip install --pre --upgrade torch --index-url "
                   "https://download.pytorch.org/whl/nightly";
        }
        return "pip install --pre --upgrade " + package;
    }
    return "pip install " + package + "==" + version;
}

void add_preamble(LoopState& s, const std::string& line) {
    auto& pre = s.edits.preamble;
    if (std::find(pre.begin(), pre.end(), line) != pre.end()) {
        throw Error(ErrorCode::usage, "\"" + line + "\" is already present");
    }
    pre.push_back(line);
}

}  // namespace

RenderedScript compose(const LoopState& s) {
    RenderedScript r = render(s.tmpl, s.binding, s.spec);
    std::string head;
    std::string body = r.text;
    if (!s.edits.exports.empty()) {
        static const std::string kInner = "bash -c '";
        if (auto pos = body.find(kInner); pos != std::string::npos) {
            std::string inject;
            for (const auto& v : s.edits.exports) inject += "export " + v + "='\"$" + v + "\"'; ";
            body.insert(pos + kInner.size(), inject);
        } else {
            for (const auto& v : s.edits.exports) head += "export " + v + "=\"$" + v + "\"\n";
        }
    }
    for (const auto& line : s.edits.preamble) head += line + "\n";
    r.text = head + body;
    return r;
}

LoopState apply_action(const LoopState& in, const RepairAction& a, const ClusterProfile& profile,
                       const TemplateSet* templates) {
    validate_action(a, "repair action");
    LoopState s = in;
    const auto& p = a.payload;
    switch (a.kind) {
        case RepairKind::export_env: {
            const std::string& var = p.at("var");
            if (std::find(s.edits.exports.begin(), s.edits.exports.end(), var) != s.edits.exports.end()) {
                throw Error(ErrorCode::usage, var + " is already exported");
            }
            s.edits.exports.push_back(var);
            break;
        }
        case RepairKind::add_module_load: add_preamble(s, "module load " + p.at("module")); break;
        case RepairKind::prepend_line: add_preamble(s, p.at("line")); break;
        case RepairKind::pin_version: add_preamble(s, pin_line(p.at("package"), p.at("version"))); break;
        case RepairKind::add_arg: {
            const std::string& args = p.at("args");
            auto& script = s.binding.at("your_script");
            if (script.value.find(args) != std::string::npos) {
                throw Error(ErrorCode::usage, "\"" + args + "\" is already passed");
            }
            script.value += " " + args;
            s.spec.train_args += (s.spec.train_args.empty() ? "" : " ") + args;
            break;
        }
        case RepairKind::set_param: {
            const std::string& name = p.at("param");
            auto it = s.binding.find(name);
            if (it == s.binding.end()) throw Error(ErrorCode::usage, "no bound parameter \"" + name + "\"");
            std::string value;
            if (auto v = p.find("value"); v != p.end()) {
                value = v->second;
            } else {
                value = it->second.value;
                const std::string& find = p.at("find");
                auto pos = value.find(find);
                if (pos == std::string::npos) {
                    throw Error(ErrorCode::usage, "\"" + find + "\" does not occur in " + name);
                }
                for (; pos != std::string::npos; pos = value.find(find, pos + p.at("replace").size())) {
                    value.replace(pos, find.size(), p.at("replace"));
                }
            }
            if (value == it->second.value) throw Error(ErrorCode::usage, name + " already has that value");
            it->second = {value, Provenance::user};
            if (name == "deepspeed_config") s.spec.deepspeed_config = value;
            if (name == "master_port") {
                auto port = parse_count_word(value);
                if (!port || *port < kMinPort || *port > kMaxPort) {
                    throw Error(ErrorCode::usage, "invalid master port \"" + value + "\"");
                }
                s.spec.master_port = *port;
                s.spec.master_port_explicit = true;
            }
            break;
        }
        case RepairKind::switch_template: {
            if (templates == nullptr) throw Error(ErrorCode::usage, "no template repository available");
            const Template* t = templates->find(p.at("template"));
            if (t == nullptr) throw Error(ErrorCode::usage, "unknown template \"" + p.at("template") + "\"");
            if (t->id == s.tmpl.id) throw Error(ErrorCode::usage, "template already in use");
            ParamBinding b = bind(s.spec, *t, profile);
            for (auto& [name, v] : b) {
                if (auto old = in.binding.find(name); old != in.binding.end()) v = old->second;
            }
            s.tmpl = *t;
            s.binding = std::move(b);
            break;
        }
    }
    return s;
}

json to_json(const LoopOutcome& o) {
    json history = json::array();
    for (const auto& step : o.history) {
        json rec{{"diagnosis", to_json(step.diagnosis)},
                 {"action", step.action ? to_json(*step.action) : json(nullptr)},
                 {"result", to_json(step.result)}};
        if (!step.notes.empty()) rec["notes"] = step.notes;
        history.push_back(std::move(rec));
    }
    return json{{"status", to_string(o.status)},
                {"iterations_used", o.iterations_used},
                {"final_script", o.final_script.text},
                {"template_id", o.final_script.template_id},
                {"final_result", to_json(o.final_result)},
                {"history", std::move(history)}};
}

LoopOutcome run_loop(const JobSpec& spec, const Template& t, const ClusterProfile& profile,
                     Harness& harness, const LoopConfig& config) {
    if (config.max_iter < 1) throw Error(ErrorCode::usage, "max_iter must be >= 1");
    static const FingerprintSet kNoFingerprints;
    static const RepairTable kNoRepairs;
    const FingerprintSet& fps = config.fingerprints ? *config.fingerprints : kNoFingerprints;
    const RepairTable& table = config.repairs ? *config.repairs : kNoRepairs;

    LoopState state{spec, t, bind(spec, t, profile), {}};
    std::set<std::string> tried;
    LoopOutcome out;
    for (;;) {
        const RenderedScript r = compose(state);
        ExecutionResult res = harness.run(r, state.spec, profile);
        out.final_script = r;
        out.final_result = res;
        if (res.exit_code == 0) {
            out.status = LoopStatus::success;
            return out;
        }

        LoopStep step{diagnose(res, r, state.spec, profile, fps, config.repairer), std::nullopt, res, {}};
        if (out.iterations_used >= config.max_iter) {
            step.notes.push_back("iteration limit of " + std::to_string(config.max_iter) + " reached");
            out.history.push_back(std::move(step));
            out.status = LoopStatus::unresolved;
            return out;
        }

        std::vector<RepairAction> actions;
        try {
            actions = propose(step.diagnosis, r, state.spec, table, config.answers);
        } catch (const Error& e) {
            step.notes.push_back(e.what());
            out.history.push_back(std::move(step));
            out.status = LoopStatus::unresolved;
            return out;
        }

        const std::string key_prefix = step.diagnosis.fingerprint_id.value_or("<remote>") + "|";
        const std::size_t base_errors = error_count(lint(r, state.spec, profile));
        for (const auto& a : actions) {
            const std::string key = key_prefix + to_json(a).dump();
            if (!tried.insert(key).second) continue;
            try {
                LoopState next = apply_action(state, a, profile, config.templates);
                const RenderedScript nr = compose(next);
                const std::size_t errors = error_count(lint(nr, next.spec, profile));
                if (errors > base_errors) {
                    step.notes.push_back("skipped " + std::string(to_string(a.kind)) +
                                         ": static-verify errors would rise from " +
                                         std::to_string(base_errors) + " to " + std::to_string(errors));
                    continue;
                }
                state = std::move(next);
                step.action = a;
                break;
            } catch (const Error& e) {
                step.notes.push_back("skipped " + std::string(to_string(a.kind)) + ": " + e.what());
            }
        }
        const bool applied = step.action.has_value();
        if (!applied) step.notes.push_back("no untried repair actions remain");
        out.history.push_back(std::move(step));
        if (!applied) {
            out.status = LoopStatus::unresolved;
            return out;
        }
        ++out.iterations_used;
    }
}

}  // namespace scriptport
