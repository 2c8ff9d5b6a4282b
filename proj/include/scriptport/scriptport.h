/* Copyright (c) 2026, scriptport developers
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the scriptport library.
 *
 * Structured inputs and results are UTF-8 JSON strings. Every string returned
 * through a `char**` out-parameter is owned by the caller and released with
 * sp_string_free(). A context may be used by one thread at a time; separate
 * contexts are independent.
 */

#ifndef SCRIPTPORT_H
#define SCRIPTPORT_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SP_API __declspec(dllexport)
#else
#define SP_API __attribute__((visibility("default")))
#endif

typedef enum sp_status {
    SP_OK = 0,
    SP_ERR_PARSE = 1,
    SP_ERR_REGISTRY_CONFLICT = 2,
    SP_ERR_UNKNOWN_CLUSTER = 3,
    SP_ERR_TEMPLATE_INVALID = 4,
    SP_ERR_TEMPLATE_CONFLICT = 5,
    SP_ERR_INCOMPLETE_SPEC = 6,
    SP_ERR_INCONSISTENT_TOPOLOGY = 7,
    SP_ERR_CAPACITY = 8,
    SP_ERR_POLICY_VIOLATION = 9,
    SP_ERR_UNBOUND_PARAMETER = 10,
    SP_ERR_NO_CANDIDATES = 11,
    SP_ERR_NO_REPAIR_AVAILABLE = 12,
    SP_ERR_CONTRACT_VIOLATION = 13,
    SP_ERR_BRIDGE_UNAVAILABLE = 14,
    SP_ERR_BRIDGE_PROTOCOL = 15,
    SP_ERR_IO = 16,
    SP_ERR_USAGE = 17,
    SP_ERR_INVALID_ARGUMENT = 18, /* null handle or pointer */
    SP_ERR_INTERNAL = 19
} sp_status;

typedef struct sp_context sp_context;

/* Answer for one missing field. Return NULL (or "") to leave it missing.
 * The returned string is copied before the next call. */
typedef const char* (*sp_prompt_fn)(const char* field, void* user_data);

SP_API const char* sp_version(void);

/* Stable lowercase name of a status ("capacity", "usage", ...). */
SP_API const char* sp_status_name(sp_status status);

/* Message of the last failure on the calling thread; "" when none. The
 * pointer stays valid until the next API call on that thread. */
SP_API const char* sp_last_error(void);

SP_API void sp_string_free(char* s);

/* options_json may be NULL. Recognised keys:
 *   "profiles":     [document, ...]  merged into the bundled registry
 *   "templates":    [document, ...]  merged into the bundled repository
 *   "rules":        document         replaces the bundled fault rules
 *   "fingerprints": document         replaces the bundled fingerprints
 *   "repairs":      document         replaces the bundled repair table
 *   "bridge":       document         bridge config; absent means offline
 * Documents are JSON text (strings), exactly as they would appear on disk. */
SP_API sp_status sp_context_new(const char* options_json, sp_context** out);
SP_API void sp_context_free(sp_context* ctx);

/* request_json may be NULL. Keys:
 *   "flags":   partial job spec that overrides extracted values
 *   "answers": [[field, value], ...] or {field: value}
 *   "interactive": bool (uses `prompt` for missing fields)
 *   "k", "max_iter", "walltime_minutes": integers; "account": string
 * Result: {"success", "script", "spec", "report"}. An unresolved job is
 * SP_OK with success = false. */
SP_API sp_status sp_generate(sp_context* ctx, const char* description, const char* request_json,
                             sp_prompt_fn prompt, void* user_data, char** result_json);

/* Regenerates `script` for `target`; request and result as sp_generate. */
SP_API sp_status sp_port(sp_context* ctx, const char* script, const char* target,
                         const char* request_json, sp_prompt_fn prompt, void* user_data,
                         char** result_json);

/* Rule-based (or bridge-backed, when configured) extraction; a partial spec. */
SP_API sp_status sp_extract(sp_context* ctx, const char* text, char** result_json);

/* What a launch script says about the job; a partial spec. */
SP_API sp_status sp_parse_script(sp_context* ctx, const char* script, char** result_json);

/* Array of profile records. */
SP_API sp_status sp_clusters_list(sp_context* ctx, char** result_json);

/* Adds one profile record to `registry_document` (NULL: empty registry) and
 * returns the updated document. Conflicts with the context's registry or
 * the document are rejected. */
SP_API sp_status sp_clusters_add(sp_context* ctx, const char* registry_document,
                                 const char* profile_json, char** result_document);

/* Array of template records; cluster may be NULL for all. */
SP_API sp_status sp_templates_list(sp_context* ctx, const char* cluster, char** result_json);

/* Validates a repository document against the context's registry. Returns
 * the number of templates as {"templates": n}. */
SP_API sp_status sp_templates_validate(sp_context* ctx, const char* document,
                                       char** result_json);

/* Adds one template record to `repository_document` (NULL: empty) after
 * validation and returns the updated document. */
SP_API sp_status sp_templates_add(sp_context* ctx, const char* repository_document,
                                  const char* template_json, char** result_document);

#ifdef __cplusplus
}
#endif

#endif /* SCRIPTPORT_H */
