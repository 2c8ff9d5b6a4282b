// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Verified launch-script templates keyed by (cluster, framework, strategy,
// launcher).
//
// Placeholder grammar: `{name}` where name matches [a-z][a-z0-9_]*. A brace
// immediately preceded by `$` is shell syntax (`${VAR}`) and never a
// placeholder; so are `$VAR`, `$(...)` and any brace pair whose content does
// not match the name grammar. There is no nesting and no escaping.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scriptport/types.hpp"

namespace scriptport {

struct PlaceholderSpan {
    std::size_t offset;  // position of '{'
    std::size_t length;  // including both braces
    std::string_view name;
};

/// Every placeholder occurrence in text order.
std::vector<PlaceholderSpan> placeholder_spans(std::string_view text);

/// Distinct placeholder names in first-occurrence order.
std::vector<std::string> placeholders(std::string_view text);

enum class ParamKind { integer, port, path, text };

std::string_view to_string(ParamKind k);
std::optional<ParamKind> parse_param_kind(std::string_view s);

struct ParamDecl {
    std::string name;
    ParamKind kind = ParamKind::text;
    bool required = true;
    std::optional<std::string> default_value;

    bool operator==(const ParamDecl&) const = default;
};

struct Template {
    std::string id;
    std::string cluster;
    Framework framework = Framework::pytorch;
    Strategy strategy = Strategy::ddp;
    Launcher launcher = Launcher::torchrun;
    std::string body;
    std::vector<ParamDecl> params;
    bool verified = false;
    std::string notes;

    const ParamDecl* param(std::string_view name) const;
    bool operator==(const Template&) const = default;
};

nlohmann::json to_json(const Template& t);
Template template_from_json(const nlohmann::json& rec, std::string_view ctx);

/// Throws template-invalid when the body and the declared parameters disagree.
void validate_template(const Template& t);

class TemplateSet {
public:
    TemplateSet() = default;

    static TemplateSet load(std::string_view document);

    /// Returns a new set; this one is left untouched.
    TemplateSet add(Template t) const;

    const Template* find(std::string_view id) const;
    const std::vector<Template>& templates() const { return templates_; }
    std::size_t size() const { return templates_.size(); }
    bool empty() const { return templates_.empty(); }

    std::string to_document() const;

private:
    void insert(Template t);

    std::vector<Template> templates_;
};

}  // namespace scriptport
