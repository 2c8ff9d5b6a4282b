// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/template_store.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "scriptport/error.hpp"

namespace scriptport {

using detail::json;

namespace {

bool name_start(char c) { return c >= 'a' && c <= 'z'; }
bool name_char(char c) { return name_start(c) || (c >= '0' && c <= '9') || c == '_'; }

}  // namespace

std::vector<PlaceholderSpan> placeholder_spans(std::string_view text) {
    std::vector<PlaceholderSpan> spans;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        if (i > 0 && text[i - 1] == '$') continue;
        std::size_t j = i + 1;
        if (j >= text.size() || !name_start(text[j])) continue;
        while (j < text.size() && name_char(text[j])) ++j;
        if (j >= text.size() || text[j] != '}') continue;
        spans.push_back({i, j - i + 1, text.substr(i + 1, j - i - 1)});
        i = j;
    }
    return spans;
}

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> names;
    for (const auto& s : placeholder_spans(text)) {
        if (std::find(names.begin(), names.end(), s.name) == names.end()) {
            names.emplace_back(s.name);
        }
    }
    return names;
}

std::string_view to_string(ParamKind k) {
    switch (k) {
        case ParamKind::integer: return "integer";
        case ParamKind::port: return "port";
        case ParamKind::path: return "path";
        case ParamKind::text: return "text";
    }
    return "?";
}

std::optional<ParamKind> parse_param_kind(std::string_view s) {
    if (s == "integer") return ParamKind::integer;
    if (s == "port") return ParamKind::port;
    if (s == "path") return ParamKind::path;
    if (s == "text") return ParamKind::text;
    return std::nullopt;
}

const ParamDecl* Template::param(std::string_view name) const {
    for (const auto& p : params) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

json to_json(const Template& t) {
    json params = json::array();
    for (const auto& p : t.params) {
        json rec{{"name", p.name}, {"kind", to_string(p.kind)}, {"required", p.required}};
        if (p.default_value) rec["default"] = *p.default_value;
        params.push_back(std::move(rec));
    }
    return json{
        {"id", t.id},
        {"cluster", t.cluster},
        {"framework", to_string(t.framework)},
        {"strategy", to_string(t.strategy)},
        {"launcher", to_string(t.launcher)},
        {"body", t.body},
        {"params", std::move(params)},
        {"verified", t.verified},
        {"notes", t.notes},
    };
}

Template template_from_json(const json& rec, std::string_view ctx_in) {
    std::string ctx(ctx_in);
    if (!rec.is_object()) detail::field_error(ctx, "<record>", "expected object");
    Template t;
    t.id = detail::req_string(rec, ctx, "id");
    ctx += " (" + t.id + ")";
    t.cluster = detail::req_string(rec, ctx, "cluster");
    t.framework = detail::req_enum<Framework>(rec, ctx, "framework", parse_framework);
    t.strategy = detail::req_enum<Strategy>(rec, ctx, "strategy", parse_strategy);
    t.launcher = detail::req_enum<Launcher>(rec, ctx, "launcher", parse_launcher);
    t.body = detail::req_string(rec, ctx, "body");
    t.verified = detail::opt_bool(rec, ctx, "verified").value_or(false);
    t.notes = detail::opt_string(rec, ctx, "notes").value_or("");

    auto it = rec.find("params");
    if (it != rec.end()) {
        if (!it->is_array()) detail::field_error(ctx, "params", "expected array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& p = (*it)[i];
            const std::string pctx = ctx + ".params[" + std::to_string(i) + "]";
            if (!p.is_object()) detail::field_error(pctx, "<record>", "expected object");
            ParamDecl d;
            d.name = detail::req_string(p, pctx, "name");
            d.kind = detail::req_enum<ParamKind>(p, pctx, "kind", parse_param_kind);
            d.required = detail::opt_bool(p, pctx, "required").value_or(true);
            if (auto dv = p.find("default"); dv != p.end() && !dv->is_null()) {
                if (dv->is_string()) {
                    d.default_value = dv->get<std::string>();
                } else if (dv->is_number_integer()) {
                    d.default_value = std::to_string(dv->get<long long>());
                } else {
                    detail::field_error(pctx, "default", "expected string or integer");
                }
            }
            t.params.push_back(std::move(d));
        }
    }
    return t;
}

void validate_template(const Template& t) {
    auto invalid = [&](const std::string& what) {
        throw Error(ErrorCode::template_invalid, "template \"" + t.id + "\": " + what);
    };
    if (t.id.empty()) invalid("empty id");
    if (t.cluster.empty()) invalid("empty cluster");

    std::set<std::string> declared;
    for (const auto& p : t.params) {
        if (p.name.empty() || placeholders("{" + p.name + "}").empty()) {
            invalid("parameter name \"" + p.name + "\" does not match [a-z][a-z0-9_]*");
        }
        if (!declared.insert(p.name).second) invalid("parameter \"" + p.name + "\" declared twice");
    }

    const auto used = placeholders(t.body);
    for (const auto& name : used) {
        const ParamDecl* d = t.param(name);
        if (d == nullptr) invalid("undeclared placeholder {" + name + "}");
        if (!d->required) invalid("placeholder {" + name + "} is declared optional");
    }
    for (const auto& p : t.params) {
        if (p.required && std::find(used.begin(), used.end(), p.name) == used.end()) {
            invalid("required parameter \"" + p.name + "\" does not appear in body");
        }
    }
}

void TemplateSet::insert(Template t) {
    validate_template(t);
    for (const auto& other : templates_) {
        if (other.id == t.id) {
            throw Error(ErrorCode::template_conflict, "duplicate template id \"" + t.id + "\"");
        }
        if (other.cluster == t.cluster && other.framework == t.framework &&
            other.strategy == t.strategy && other.launcher == t.launcher) {
            throw Error(ErrorCode::template_conflict,
                        "template \"" + t.id + "\" has the same (cluster, framework, strategy, "
                        "launcher) key as \"" + other.id + "\"");
        }
    }
    templates_.push_back(std::move(t));
}

TemplateSet TemplateSet::load(std::string_view document) {
    const json doc = detail::parse_array_document(document, "repository document");
    TemplateSet set;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        set.insert(template_from_json(doc[i], "template[" + std::to_string(i) + "]"));
    }
    return set;
}

TemplateSet TemplateSet::add(Template t) const {
    TemplateSet out = *this;
    out.insert(std::move(t));
    return out;
}

const Template* TemplateSet::find(std::string_view id) const {
    for (const auto& t : templates_) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

std::string TemplateSet::to_document() const {
    json doc = json::array();
    for (const auto& t : templates_) doc.push_back(to_json(t));
    return doc.dump(2) + "\n";
}

}  // namespace scriptport
