// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "scriptport/error.hpp"

namespace scriptport {

nlohmann::json to_json(const RankedCandidate& c) {
    return nlohmann::json{
        {"template_id", c.template_id},
        {"score", c.score},
        {"exact", c.exact},
        {"breakdown",
         {{"cluster", c.breakdown.cluster},
          {"framework", c.breakdown.framework},
          {"strategy", c.breakdown.strategy},
          {"launcher", c.breakdown.launcher},
          {"similarity", c.breakdown.similarity}}},
    };
}

namespace {

std::set<std::string> words(std::string_view text) {
    std::set<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.insert(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.insert(std::move(cur));
    return out;
}

}  // namespace

double token_overlap(std::string_view a, std::string_view b) {
    const auto wa = words(a);
    const auto wb = words(b);
    if (wa.empty() && wb.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& w : wa) common += wb.count(w);
    return static_cast<double>(common) / static_cast<double>(wa.size() + wb.size() - common);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || a.size() != b.size()) return 0.0;
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

std::vector<RankedCandidate> candidates(const JobSpec& spec, const TemplateSet& set,
                                        Embedder* embedder) {
    if (set.empty()) throw Error(ErrorCode::no_candidates, "template repository is empty");

    std::vector<RankedCandidate> out;
    out.reserve(set.size());
    double best = 0;
    for (const auto& t : set.templates()) {
        RankedCandidate c;
        c.template_id = t.id;
        c.breakdown.cluster = t.cluster == spec.cluster ? kClusterWeight : 0.0;
        c.breakdown.framework = t.framework == spec.framework ? kFrameworkWeight : 0.0;
        c.breakdown.strategy = t.strategy == spec.strategy ? kStrategyWeight : 0.0;
        c.breakdown.launcher = t.launcher == spec.launcher ? kLauncherWeight : 0.0;
        c.score = c.breakdown.cluster + c.breakdown.framework + c.breakdown.strategy +
                  c.breakdown.launcher;
        c.exact = c.breakdown.cluster > 0 && c.breakdown.framework > 0 &&
                  c.breakdown.strategy > 0 && c.breakdown.launcher > 0;
        if (c.exact) c.score = 1.0;
        best = std::max(best, c.score);
        out.push_back(std::move(c));
    }

    if (best < kExactThreshold) {
        std::vector<double> query;
        if (embedder != nullptr) query = embedder->embed(spec.description);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const Template& t = set.templates()[i];
            const std::string doc = t.notes + "\n" + t.body;
            const double sim = embedder != nullptr ? cosine(query, embedder->embed(doc))
                                                   : token_overlap(spec.description, doc);
            out[i].breakdown.similarity = sim;
            out[i].score = (out[i].score + kSimilarityWeight * sim) / (1.0 + kSimilarityWeight);
        }
    }

    std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.exact != b.exact) return a.exact;
        if (a.score != b.score) return a.score > b.score;
        return a.template_id < b.template_id;
    });
    return out;
}

std::vector<const Template*> select(const std::vector<RankedCandidate>& cands,
                                    const TemplateSet& set, int k) {
    if (k < 1) throw Error(ErrorCode::usage, "k must be >= 1");
    std::vector<const Template*> out;
    for (const auto& c : cands) {
        if (static_cast<int>(out.size()) >= k) break;
        if (const Template* t = set.find(c.template_id)) out.push_back(t);
    }
    return out;
}

}  // namespace scriptport
