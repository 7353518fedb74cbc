#ifndef FLOWMAP_H
#define FLOWMAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every call.
 */
typedef enum {
  FLOWMAP_STATUS_OK = 0,
  FLOWMAP_STATUS_NULL_POINTER = -1,
  FLOWMAP_STATUS_INVALID_UTF8 = -2,
  /*
   A model, corpus, list or JSON input failed to parse.
   */
  FLOWMAP_STATUS_PARSE = -3,
  /*
   The input parsed but was rejected (illegal pair, bad decision, ...).
   */
  FLOWMAP_STATUS_VALIDATION = -4,
  FLOWMAP_STATUS_NOT_FOUND = -5,
  FLOWMAP_STATUS_IO = -6,
  /*
   The operation needs state the session does not have yet.
   */
  FLOWMAP_STATUS_PRECONDITION = -7,
  FLOWMAP_STATUS_INTERNAL = -255,
} FlowmapStatus;

/*
 Opaque session handle.
 */
typedef struct FlowmapSession FlowmapSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Owned by the
 library; valid until the next call on this thread.
 */
const char *flowmap_last_error(void);

/*
 Library version, static.
 */
const char *flowmap_version(void);

/*
 Releases a string returned by the library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed already.
 */
void flowmap_string_free(char *s);

/*
 Builds a session from a JSON request:
 `{"corpus": dir, "models": [files], "crypto"?, "sources"?, "sinks"?}`.
 Runs the first mapping iteration.

 # Safety
 `request_json` must be a NUL-terminated string; `out` must be writable.
 */
FlowmapStatus flowmap_session_new(const char *request_json, FlowmapSession **out);

/*
 Releases a session. NULL is ignored.

 # Safety
 `session` must come from [`flowmap_session_new`] and not have been freed.
 */
void flowmap_session_free(FlowmapSession *session);

/*
 Current suggestions as a JSON array.

 # Safety
 `session` must be a live handle; `out` must be writable.
 */
FlowmapStatus flowmap_session_suggestions(FlowmapSession *session, char **out);

/*
 Accepts, rejects or tolerates an entry (`decision` is accept, reject or tolerate).

 # Safety
 `session` must be a live handle; strings must be NUL-terminated.
 */
FlowmapStatus flowmap_session_decide(FlowmapSession *session,
                                     const char *entry,
                                     const char *decision);

/*
 Maps `dfd` (`model/element`) to a program element id; writes the entry id.

 # Safety
 `session` must be a live handle; strings must be NUL-terminated; `out` writable.
 */
FlowmapStatus flowmap_session_map(FlowmapSession *session,
                                  const char *dfd,
                                  const char *pm,
                                  char **out);

/*
 Runs one mapping iteration; writes the new suggestions as JSON.

 # Safety
 `session` must be a live handle; `out` must be writable.
 */
FlowmapStatus flowmap_session_iterate(FlowmapSession *session, char **out);

/*
 Runs a check (contracts, crypto, design or taint; `mode` is plain,
 partly or fully and may be NULL for the others); writes the report.

 # Safety
 `session` must be a live handle; `kind` NUL-terminated; `mode` NULL or
 NUL-terminated; `out` writable.
 */
FlowmapStatus flowmap_session_check(FlowmapSession *session,
                                    const char *kind,
                                    const char *mode,
                                    char **out);

/*
 Scores the active mapping against a ground truth JSON document.

 # Safety
 `session` must be a live handle; `ground_truth_json` NUL-terminated; `out` writable.
 */
FlowmapStatus flowmap_session_evaluate(FlowmapSession *session,
                                       const char *ground_truth_json,
                                       char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOWMAP_H */
