// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "json_util.hpp"

#include <algorithm>
#include <cctype>

namespace scriptport::detail {

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

bool blank(std::string_view text) {
    return std::all_of(text.begin(), text.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

json parse_document(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, std::string(what) + ": syntax error at line " +
                                          std::to_string(line_of(text, e.byte)) + ": " +
                                          e.what());
    }
}

json parse_array_document(std::string_view text, std::string_view what) {
    if (blank(text)) return json::array();
    json doc = parse_document(text, what);
    if (!doc.is_array()) {
        throw Error(ErrorCode::parse, std::string(what) + ": top-level value must be an array");
    }
    return doc;
}

void field_error(std::string_view ctx, std::string_view field, std::string_view problem) {
    throw Error(ErrorCode::parse,
                std::string(ctx) + ": field \"" + std::string(field) + "\": " + std::string(problem));
}

std::string req_string(const json& obj, std::string_view ctx, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end()) field_error(ctx, field, "missing");
    if (!it->is_string()) field_error(ctx, field, "expected string");
    return it->get<std::string>();
}

std::optional<std::string> opt_string(const json& obj, std::string_view ctx, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) field_error(ctx, field, "expected string");
    return it->get<std::string>();
}

long long req_int(const json& obj, std::string_view ctx, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end()) field_error(ctx, field, "missing");
    if (!it->is_number_integer()) field_error(ctx, field, "expected integer");
    return it->get<long long>();
}

std::optional<long long> opt_int(const json& obj, std::string_view ctx, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) field_error(ctx, field, "expected integer");
    return it->get<long long>();
}

bool req_bool(const json& obj, std::string_view ctx, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end()) field_error(ctx, field, "missing");
    if (!it->is_boolean()) field_error(ctx, field, "expected boolean");
    return it->get<bool>();
}

std::optional<bool> opt_bool(const json& obj, std::string_view ctx, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_boolean()) field_error(ctx, field, "expected boolean");
    return it->get<bool>();
}

std::vector<std::string> opt_string_list(const json& obj, std::string_view ctx, const char* field) {
    std::vector<std::string> out;
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) return out;
    if (!it->is_array()) field_error(ctx, field, "expected array of strings");
    for (const auto& v : *it) {
        if (!v.is_string()) field_error(ctx, field, "expected array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace scriptport::detail
