/* Exercises the C interface from plain C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qbell/qbell.h"

static int failures = 0;

#define EXPECT(cond)                                                        \
    do {                                                                    \
        if (!(cond)) {                                                      \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,  \
                    qbell_last_error());                                    \
            ++failures;                                                     \
        }                                                                   \
    } while (0)

static qbell_status run(const char* cfg) {
    char* report = NULL;
    qbell_status st = qbell_run(cfg, &report);
    qbell_string_free(report);
    return st;
}

int main(void) {
    EXPECT(strcmp(qbell_version(), "0.1.0") == 0);

    qbell_state* s = NULL;
    EXPECT(qbell_state_random_stabiliser(3, 2, 7, &s) == QBELL_OK);
    double f = 0.0;
    EXPECT(qbell_state_stabiliser_fidelity(s, &f) == QBELL_OK);
    EXPECT(fabs(f - 1.0) < 1e-9);

    char* text = NULL;
    EXPECT(qbell_state_to_json(s, &text) == QBELL_OK);
    qbell_state* t = NULL;
    EXPECT(qbell_state_from_json(text, &t) == QBELL_OK);
    int d = 0, n = 0;
    EXPECT(qbell_state_dims(t, &d, &n) == QBELL_OK);
    EXPECT(d == 3 && n == 2);
    qbell_string_free(text);
    qbell_state_free(t);
    qbell_state_free(s);

    EXPECT(qbell_state_haar(2, 2, 1, &s) == QBELL_OK);
    EXPECT(qbell_state_stabiliser_fidelity(s, &f) == QBELL_OK);
    EXPECT(f > 0.0 && f < 1.0);
    qbell_state_free(s);

    EXPECT(qbell_state_from_json("{\"d\": 2", &s) == QBELL_ERR_PARSE);
    EXPECT(strlen(qbell_last_error()) > 0);
    EXPECT(qbell_state_haar(1, 1, 1, &s) == QBELL_ERR_INVALID);

    EXPECT(run("{\"command\": \"learn\", \"d\": 3, \"n\": 1, \"trials\": 3}") == QBELL_OK);
    EXPECT(run("{\"command\": \"tolerant\", \"d\": 2, \"eps1\": 0.5, \"eps2\": 0.1}") == QBELL_ERR_PROMISE);
    EXPECT(run("{\"command\": \"oracle\", \"sub\": \"pdist\", \"d\": 6, \"n\": 6}") == QBELL_ERR_CAP);
    EXPECT(run("{\"command\": \"learn\", \"d\": \"three\"}") == QBELL_ERR_PARSE);
    EXPECT(run("{\"command\": \"teleport\"}") == QBELL_ERR_INVALID);

    if (failures == 0) puts("capi smoke: ok");
    return failures == 0 ? 0 : 1;
}
