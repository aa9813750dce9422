/* Copyright 2026 The Previz Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the previz engine.
 *
 * Every function returns a previz_status; 0 is success. On failure the
 * calling thread's previz_last_error() holds a message. Strings returned
 * through `char**` are NUL-terminated, owned by the caller and released with
 * previz_free(). Options and results are JSON documents; their keys are
 * listed in docs/api.md. Handles are not thread-safe: use one handle per
 * thread, except previz_backend which may be shared.
 */

#ifndef PREVIZ_PREVIZ_H
#define PREVIZ_PREVIZ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PREVIZ_API __declspec(dllexport)
#else
#define PREVIZ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define PREVIZ_ABI_VERSION 1

typedef int previz_status;

enum {
  PREVIZ_OK = 0,
  PREVIZ_INVALID_ARGUMENT = 1,
  PREVIZ_DUPLICATE_ID = 2,
  PREVIZ_UNKNOWN_ID = 3,
  PREVIZ_INVALID_GEOMETRY = 4,
  PREVIZ_COLOR_OUT_OF_RANGE = 5,
  PREVIZ_DUPLICATE_TIME = 6,
  PREVIZ_TYPE_MISMATCH = 7,
  PREVIZ_EMPTY_TRACK = 8,
  PREVIZ_EMPTY_RECORDING = 9,
  PREVIZ_CAMERA_GAP = 10,
  PREVIZ_CAMERA_OVERLAP = 11,
  PREVIZ_CLIP_OVERLAP = 12,
  PREVIZ_CLIP_TOO_LONG = 13,
  PREVIZ_DEGENERATE_CAMERA = 14,
  PREVIZ_UNKNOWN_CHARACTER_ID = 15,
  PREVIZ_NO_RIG = 16,
  PREVIZ_SCHEMA_ERROR = 17,
  PREVIZ_EMPTY_SEQUENCE = 18,
  PREVIZ_EMPTY_RANGE = 19,
  PREVIZ_NO_PERSONS = 20,
  PREVIZ_NON_POSITIVE_SCALE = 21,
  PREVIZ_NO_OVERLAP = 22,
  PREVIZ_MISSING_DESCRIPTION = 23,
  PREVIZ_UNMATCHED_MASK = 24,
  PREVIZ_INVALID_REQUEST = 25,
  PREVIZ_BACKEND_UNREACHABLE = 26,
  PREVIZ_FRAME_COUNT_EXCEEDED = 27,
  PREVIZ_UNKNOWN_JOB = 28,
  PREVIZ_NOT_DONE = 29,
  PREVIZ_SCHEMA_VERSION_MISMATCH = 30,
  PREVIZ_CORRUPT_FILE = 31,
  PREVIZ_UNKNOWN_ASSET = 32,
  PREVIZ_STALE_VERSION = 33,
  PREVIZ_IO_ERROR = 34,
  PREVIZ_JOB_FAILED = 35,
  PREVIZ_INTERNAL = 36
};

typedef struct previz_store previz_store;
typedef struct previz_project previz_project;
typedef struct previz_backend previz_backend;
typedef struct previz_service previz_service;
typedef struct previz_gen_server previz_gen_server;

PREVIZ_API int previz_abi_version(void);
/* "InvalidArgument", "StaleVersion", ...; "Unknown" outside the range. */
PREVIZ_API const char* previz_status_name(previz_status status);
/* Message of the last failure on this thread; empty after a success. */
PREVIZ_API const char* previz_last_error(void);
PREVIZ_API void previz_free(void* p);

/* Asset store. `dir` may be NULL for a memory-only store. */
PREVIZ_API previz_status previz_store_open(const char* dir, previz_store** out);
PREVIZ_API void previz_store_close(previz_store* store);
/* Writes "sha256:<hex>" to *uri. */
PREVIZ_API previz_status previz_store_put(previz_store* store, const void* bytes, size_t size, const char* kind,
                                          char** uri);
PREVIZ_API previz_status previz_store_get(const previz_store* store, const char* uri, void** bytes, size_t* size);

/* Projects. Assets of loaded projects are copied into `store` (may be NULL); saving copies
 * every referenced asset into the "<name>.assets" directory beside `path`. */
PREVIZ_API previz_status previz_project_demo(previz_store* store, previz_project** out);
PREVIZ_API previz_status previz_project_load(const char* path, previz_store* store, previz_project** out);
PREVIZ_API previz_status previz_project_save(const previz_project* project, const previz_store* store,
                                             const char* path);
PREVIZ_API previz_status previz_project_from_json(const char* json, previz_project** out);
PREVIZ_API previz_status previz_project_to_json(const previz_project* project, char** json);
/* `store` may be NULL to skip asset checks. */
PREVIZ_API previz_status previz_project_validate(const previz_project* project, const previz_store* store);
PREVIZ_API void previz_project_free(previz_project* project);

/* Generation backend: "stub" or an http:// previz-gen/1 URL; NULL reads
 * PREVIZ_GEN_BACKEND. Results are written into `store`, which must outlive
 * the backend. */
PREVIZ_API previz_status previz_backend_open(previz_store* store, const char* spec, int workers,
                                             previz_backend** out);
PREVIZ_API void previz_backend_close(previz_backend* backend);
PREVIZ_API previz_status previz_job_poll(previz_backend* backend, const char* job_id, char** record_json);
PREVIZ_API previz_status previz_job_wait(previz_backend* backend, const char* job_id, int timeout_ms,
                                         char** record_json);
PREVIZ_API previz_status previz_job_cancel(previz_backend* backend, const char* job_id, int* cancelled);
/* Attaches finished results to their clips; *changed is set to 0 or 1. */
PREVIZ_API previz_status previz_project_sync(previz_project* project, previz_backend* backend, int* changed);

/* Clip operations. */
PREVIZ_API previz_status previz_plan(const previz_project* project, const char* options_json, char** result_json);
PREVIZ_API previz_status previz_capture(const previz_project* project, previz_store* store, const char* clip_id,
                                        const char* options_json, char** result_json);
PREVIZ_API previz_status previz_render(const previz_project* project, previz_store* store, const char* clip_id,
                                       const char* options_json, char** result_json);
PREVIZ_API previz_status previz_restyle(previz_project* project, previz_store* store, previz_backend* backend,
                                        const char* clip_id, const char* options_json, char** result_json);
PREVIZ_API previz_status previz_generate(previz_project* project, previz_store* store, previz_backend* backend,
                                         const char* clip_id, const char* options_json, char** result_json);
/* Runs a remix script: {"skeleton_id", "steps": [{"op": ...}, ...]}. */
PREVIZ_API previz_status previz_remix(previz_project* project, previz_store* store, const char* script_json,
                                      char** result_json);

/* Stateless helpers. */
PREVIZ_API previz_status previz_resemblance(const char* level, int total_steps, char** result_json);
PREVIZ_API previz_status previz_compose_prompt(const char* fields_json, char** result_json);
PREVIZ_API previz_status previz_demo_fields(char** fields_json);

/* /api/v1 service. `options_json` keys: asset_dir, backend, workers,
 * latency_ms, project_dir. start() serves on a background thread. */
PREVIZ_API previz_status previz_service_start(const char* options_json, const char* host, int port,
                                              previz_service** out, int* bound_port);
PREVIZ_API void previz_service_stop(previz_service* service);
/* Blocks until the process is terminated. */
PREVIZ_API previz_status previz_service_run(const char* options_json, const char* host, int port);

/* previz-gen/1 server around the stub backend. */
PREVIZ_API previz_status previz_gen_server_start(int workers, int latency_ms, const char* host, int port,
                                                 previz_gen_server** out, int* bound_port);
PREVIZ_API void previz_gen_server_stop(previz_gen_server* server);
PREVIZ_API previz_status previz_gen_server_run(int workers, int latency_ms, const char* host, int port);

#ifdef __cplusplus
}
#endif

#endif /* PREVIZ_PREVIZ_H */
