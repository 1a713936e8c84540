#include "qbell/qbell.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "qbell/errors.hpp"
#include "qbell/qstate.hpp"
#include "qbell/runner.hpp"
#include "qbell/stabiliser.hpp"

struct qbell_state {
    qbell::DenseState psi;
};

namespace {

thread_local std::string g_last_error;

qbell_status status_of(qbell::ErrorCode code) {
    using qbell::ErrorCode;
    switch (code) {
        case ErrorCode::ParamOutOfRange:
        case ErrorCode::GammaNonPositive:
        case ErrorCode::AlphaNonPositive:
            return QBELL_ERR_PROMISE;
        case ErrorCode::CapExceeded:
        case ErrorCode::Overflow:
            return QBELL_ERR_CAP;
        case ErrorCode::Io:
            return QBELL_ERR_IO;
        case ErrorCode::Parse:
            return QBELL_ERR_PARSE;
        case ErrorCode::WitnessNotFound:
        case ErrorCode::Internal:
            return QBELL_ERR_INTERNAL;
        default:
            return QBELL_ERR_INVALID;
    }
}

template <class F>
qbell_status guarded(F&& body) {
    g_last_error.clear();
    try {
        body();
        return QBELL_OK;
    } catch (const qbell::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = std::string("Parse: ") + e.what();
        return QBELL_ERR_PARSE;
    } catch (const std::bad_alloc&) {
        g_last_error = "CapExceeded: out of memory";
        return QBELL_ERR_CAP;
    } catch (const std::exception& e) {
        g_last_error = std::string("Internal: ") + e.what();
        return QBELL_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

qbell_status null_arg(const char* what) {
    g_last_error = std::string("InvalidArgument: ") + what + " is null";
    return QBELL_ERR_INVALID;
}

}  // namespace

extern "C" {

const char* qbell_version(void) { return qbell::kVersion; }

const char* qbell_last_error(void) { return g_last_error.c_str(); }

void qbell_string_free(char* s) { std::free(s); }

qbell_status qbell_state_from_json(const char* json, qbell_state** out) {
    if (!json || !out) return null_arg("argument");
    return guarded([&] { *out = new qbell_state{qbell::state_from_json(nlohmann::json::parse(json))}; });
}

qbell_status qbell_state_haar(int d, int n, uint64_t seed, qbell_state** out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        qbell::Rng rng(seed);
        *out = new qbell_state{qbell::haar_random(qbell::PhaseContext(d, n), rng)};
    });
}

qbell_status qbell_state_random_stabiliser(int d, int n, uint64_t seed, qbell_state** out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        qbell::Rng rng(seed);
        *out = new qbell_state{qbell::stabiliser_state(qbell::random_stabiliser_group(qbell::PhaseContext(d, n), rng))};
    });
}

qbell_status qbell_state_to_json(const qbell_state* s, char** out) {
    if (!s || !out) return null_arg("argument");
    return guarded([&] { *out = dup_string(qbell::state_to_json(s->psi).dump()); });
}

qbell_status qbell_state_dims(const qbell_state* s, int* d, int* n) {
    if (!s || !d || !n) return null_arg("argument");
    *d = s->psi.d();
    *n = s->psi.num_qudits();
    return QBELL_OK;
}

qbell_status qbell_state_stabiliser_fidelity(const qbell_state* s, double* out) {
    if (!s || !out) return null_arg("argument");
    return guarded([&] { *out = qbell::stabiliser_fidelity(s->psi).value; });
}

void qbell_state_free(qbell_state* s) { delete s; }

qbell_status qbell_run(const char* config_json, char** report_out) {
    if (!config_json || !report_out) return null_arg("argument");
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::exception& e) {
            qbell::fail(qbell::ErrorCode::Parse, e.what());
        }
        const qbell::ExperimentConfig cfg = qbell::ExperimentConfig::from_json(j);
        *report_out = dup_string(qbell::report_text(qbell::run_experiment(cfg)));
    });
}

}  // extern "C"
