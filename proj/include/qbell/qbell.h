#ifndef QBELL_H
#define QBELL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; the CLI exits with the status when it is 0..3 and with 1 otherwise. */
typedef enum qbell_status {
    QBELL_OK = 0,
    QBELL_ERR_INTERNAL = 1,
    QBELL_ERR_PROMISE = 2,   /* promise parameters invalid: gamma/alpha <= 0, eps outside the proven range */
    QBELL_ERR_CAP = 3,       /* feasibility cap exceeded */
    QBELL_ERR_INVALID = 4,   /* malformed argument or inconsistent input */
    QBELL_ERR_IO = 5,
    QBELL_ERR_PARSE = 6
} qbell_status;

typedef struct qbell_state qbell_state;

const char* qbell_version(void);

/* Message for the last failing call on this thread; empty when none. */
const char* qbell_last_error(void);

/* Strings returned through char** out-parameters belong to the caller. */
void qbell_string_free(char* s);

qbell_status qbell_state_from_json(const char* json, qbell_state** out);
qbell_status qbell_state_haar(int d, int n, uint64_t seed, qbell_state** out);
qbell_status qbell_state_random_stabiliser(int d, int n, uint64_t seed, qbell_state** out);
qbell_status qbell_state_to_json(const qbell_state* s, char** out);
qbell_status qbell_state_dims(const qbell_state* s, int* d, int* n);
qbell_status qbell_state_stabiliser_fidelity(const qbell_state* s, double* out);
void qbell_state_free(qbell_state* s);

/* Runs an experiment described by a JSON config (same keys as the report's
   "config" echo plus optional "threads") and returns the report text. */
qbell_status qbell_run(const char* config_json, char** report_out);

#ifdef __cplusplus
}
#endif

#endif
