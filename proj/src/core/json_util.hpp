// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Strict field readers for the bundled JSON documents. Every failure is a
// parse error that names the record and field.

#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scriptport/error.hpp"

namespace scriptport::detail {

using nlohmann::json;

/// Parses a whole document; syntax errors report the 1-based line number.
json parse_document(std::string_view text, std::string_view what);

/// Parses a document that must be a top-level array (empty text counts as []).
json parse_array_document(std::string_view text, std::string_view what);

[[noreturn]] void field_error(std::string_view ctx, std::string_view field,
                              std::string_view problem);

std::string req_string(const json& obj, std::string_view ctx, const char* field);
std::optional<std::string> opt_string(const json& obj, std::string_view ctx, const char* field);
long long req_int(const json& obj, std::string_view ctx, const char* field);
std::optional<long long> opt_int(const json& obj, std::string_view ctx, const char* field);
bool req_bool(const json& obj, std::string_view ctx, const char* field);
std::optional<bool> opt_bool(const json& obj, std::string_view ctx, const char* field);
std::vector<std::string> opt_string_list(const json& obj, std::string_view ctx, const char* field);

template <typename E, typename Parse>
E req_enum(const json& obj, std::string_view ctx, const char* field, Parse parse) {
    const std::string raw = req_string(obj, ctx, field);
    if (auto v = parse(raw)) return *v;
    field_error(ctx, field, "unrecognized value \"" + raw + "\"");
}

std::string lowercase(std::string_view s);
std::string trim(std::string_view s);

}  // namespace scriptport::detail
