// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0
//
// Failure classification, typed repairs and the bounded verify/repair loop.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "scriptport/cluster_registry.hpp"
#include "scriptport/intent.hpp"
#include "scriptport/simcluster.hpp"
#include "scriptport/synthesis.hpp"
#include "scriptport/template_store.hpp"

namespace scriptport {

enum class Confidence { high, low };

std::string_view to_string(Confidence c);

struct RepairAction {
    RepairKind kind = RepairKind::prepend_line;
    std::map<std::string, std::string> payload;
    std::string rationale;
    bool operator==(const RepairAction&) const = default;
};

nlohmann::json to_json(const RepairAction& a);

/// Checks that `a.payload` carries the keys its kind needs.
void validate_action(const RepairAction& a, std::string_view ctx);

struct Diagnosis {
    Category category = Category::unknown;
    std::optional<std::string> fingerprint_id;
    std::string explanation;
    Confidence confidence = Confidence::low;
    std::vector<RepairAction> remote_actions;  // parsed proposals from a remote repairer
    std::vector<std::string> dropped;          // why remote proposals were rejected
    bool operator==(const Diagnosis&) const = default;
};

nlohmann::json to_json(const Diagnosis& d);

/// Pattern grammar: a leading '^' makes the pattern an ECMAScript regular
/// expression anchored at the start of each stderr line; anything else is a
/// literal substring searched in the whole stderr text.
struct Fingerprint {
    std::string id;
    Category category = Category::unknown;
    std::string pattern;
    std::string explanation;
    bool operator==(const Fingerprint&) const = default;
};

class FingerprintSet {
public:
    FingerprintSet() = default;
    static FingerprintSet load(std::string_view document);

    /// First fingerprint in document order whose pattern matches.
    const Fingerprint* match(std::string_view stderr_text) const;
    const std::vector<Fingerprint>& fingerprints() const { return fingerprints_; }
    const Fingerprint* find(std::string_view id) const;

private:
    std::vector<Fingerprint> fingerprints_;
};

/// Fingerprint id -> ordered actions. Payload values may contain
/// {placeholders} filled from the spec, user answers and the table defaults.
class RepairTable {
public:
    RepairTable() = default;
    static RepairTable load(std::string_view document);

    const std::vector<RepairAction>* find(std::string_view fingerprint_id) const;
    const std::map<std::string, std::string>& defaults() const { return defaults_; }
    const std::map<std::string, std::vector<RepairAction>>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> defaults_;
    std::map<std::string, std::vector<RepairAction>> entries_;
};

/// Result of asking a remote service for repair ideas.
struct RemoteProposal {
    std::vector<std::string> proposals;
    std::optional<Category> category;
    std::string explanation;
};

class Repairer {
public:
    virtual ~Repairer() = default;
    /// `context` holds stderr, script, spec and a profile summary.
    virtual RemoteProposal propose(const nlohmann::json& context) = 0;
};

/// Parses one free-text proposal. Returns nullopt and sets `reason` when the
/// text does not describe a supported edit.
std::optional<RepairAction> parse_proposal(std::string_view text, std::string& reason);

Diagnosis diagnose(const ExecutionResult& res, const ClusterProfile& profile,
                   const FingerprintSet& fingerprints);

/// Like diagnose, but unknown failures are forwarded to `repairer` (which may
/// be null). Bridge errors leave the diagnosis unknown.
Diagnosis diagnose(const ExecutionResult& res, const RenderedScript& r, const JobSpec& spec,
                   const ClusterProfile& profile, const FingerprintSet& fingerprints,
                   Repairer* repairer);

/// Concrete actions for a diagnosis. `answers` supplies values such as
/// task_name or dataset_path; the table defaults fill the rest.
std::vector<RepairAction> propose(const Diagnosis& d, const RenderedScript& r, const JobSpec& spec,
                                  const RepairTable& table,
                                  const std::map<std::string, std::string>& answers = {});

/// Edits applied on top of the rendered template text.
struct TextEdits {
    std::vector<std::string> preamble;  // lines placed before the launch command
    std::vector<std::string> exports;   // variables forwarded into the launch command
    bool operator==(const TextEdits&) const = default;
};

struct LoopState {
    JobSpec spec;
    Template tmpl;
    ParamBinding binding;
    TextEdits edits;
};

RenderedScript compose(const LoopState& s);

/// Returns the state after `a`. Throws usage when the action cannot apply
/// (unknown parameter, unknown template, ...).
LoopState apply_action(const LoopState& s, const RepairAction& a, const ClusterProfile& profile,
                       const TemplateSet* templates);

enum class LoopStatus { success, unresolved };

std::string_view to_string(LoopStatus s);

struct LoopStep {
    Diagnosis diagnosis;
    std::optional<RepairAction> action;  // absent when nothing could be applied
    ExecutionResult result;              // the failure that was diagnosed
    std::vector<std::string> notes;      // skipped actions and why
};

struct LoopOutcome {
    LoopStatus status = LoopStatus::unresolved;
    RenderedScript final_script;
    ExecutionResult final_result;
    int iterations_used = 0;  // repairs applied
    std::vector<LoopStep> history;
};

nlohmann::json to_json(const LoopOutcome& o);

inline constexpr int kDefaultMaxIterations = 5;

struct LoopConfig {
    const FingerprintSet* fingerprints = nullptr;
    const RepairTable* repairs = nullptr;
    const TemplateSet* templates = nullptr;  // enables switch_template
    Repairer* repairer = nullptr;
    std::map<std::string, std::string> answers;
    int max_iter = kDefaultMaxIterations;
};

/// Submits, and on failure diagnoses, applies one untried repair and
/// resubmits, for at most `max_iter` repairs. A repair that raises the
/// static-verify error count is skipped.
LoopOutcome run_loop(const JobSpec& spec, const Template& t, const ClusterProfile& profile,
                     Harness& harness, const LoopConfig& config);

}  // namespace scriptport
