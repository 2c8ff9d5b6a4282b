// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Template ranking: weighted metadata match with a text-similarity fallback.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scriptport/intent.hpp"
#include "scriptport/template_store.hpp"

namespace scriptport {

inline constexpr double kClusterWeight = 0.4;
inline constexpr double kFrameworkWeight = 0.25;
inline constexpr double kStrategyWeight = 0.25;
inline constexpr double kLauncherWeight = 0.1;
inline constexpr double kSimilarityWeight = 0.1;
inline constexpr double kExactThreshold = 0.9;

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(std::string_view text) = 0;
};

struct ScoreBreakdown {
    double cluster = 0;
    double framework = 0;
    double strategy = 0;
    double launcher = 0;
    double similarity = 0;  // raw similarity in [0,1]; 0 when unused
    bool operator==(const ScoreBreakdown&) const = default;
};

struct RankedCandidate {
    std::string template_id;
    double score = 0;
    ScoreBreakdown breakdown;
    bool exact = false;  // full (cluster, framework, strategy, launcher) match
    bool operator==(const RankedCandidate&) const = default;
};

nlohmann::json to_json(const RankedCandidate& c);

/// Jaccard index over lowercase alphanumeric word sets.
double token_overlap(std::string_view a, std::string_view b);

/// Cosine similarity clamped to [0,1]; 0 for empty or mismatched vectors.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// Ranks every template in `set`. Throws no-candidates on an empty set.
std::vector<RankedCandidate> candidates(const JobSpec& spec, const TemplateSet& set,
                                        Embedder* embedder = nullptr);

/// The first min(k, size) candidates' templates, in rank order.
std::vector<const Template*> select(const std::vector<RankedCandidate>& cands,
                                    const TemplateSet& set, int k);

}  // namespace scriptport
