// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// JSON documents compiled into the library.

#pragma once

#include <string_view>

namespace scriptport::bundled {

std::string_view profiles();
std::string_view templates();
std::string_view fault_rules();
std::string_view fingerprints();
std::string_view repairs();
std::string_view bridge_prompts();
std::string_view phrasing_corpus();

/// Optional extra cluster (a four-GPU PBS machine) with its templates; not
/// part of the default registry.
std::string_view polaris_profiles();
std::string_view polaris_templates();

}  // namespace scriptport::bundled
