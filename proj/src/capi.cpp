#include "levylab/levylab.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "config.hpp"
#include "experiments.hpp"
#include "levylab/error.hpp"
#include "levylab/fracdrift.hpp"
#include "levylab/potentials.hpp"
#include "levylab/stable.hpp"

struct levylab_config {
    levylab::ExperimentConfig cfg;
};

struct levylab_result {
    std::string output_dir;
    std::string summary;
};

namespace {

thread_local std::string last_error;

template <class F>
levylab_status guarded(F&& f) noexcept {
    try {
        last_error.clear();
        f();
        return LEVYLAB_OK;
    } catch (const levylab::Error& e) {
        last_error = e.what();
        return static_cast<levylab_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return LEVYLAB_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return LEVYLAB_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return LEVYLAB_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) levylab::fail(levylab::Errc::argument, std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* levylab_version(void) { return levylab::kVersion; }

const char* levylab_last_error(void) { return last_error.c_str(); }

const char* levylab_status_name(levylab_status status) {
    if (status == LEVYLAB_OK) return "ok";
    if (status == LEVYLAB_INTERNAL) return "internal";
    if (status >= LEVYLAB_PARAMETER_DOMAIN && status <= LEVYLAB_IO)
        return levylab::errc_name(static_cast<levylab::Errc>(static_cast<int>(status)));
    return "unknown";
}

int levylab_exit_code(levylab_status status) {
    switch (status) {
        case LEVYLAB_OK: return 0;
        case LEVYLAB_CONFIG:
        case LEVYLAB_ARGUMENT:
        case LEVYLAB_PARAMETER_DOMAIN:
        case LEVYLAB_UNSUPPORTED_PARAMETRIZATION:
        case LEVYLAB_SHAPE: return 2;
        default: return 1;
    }
}

const char* levylab_schema_json(void) {
    static const std::string s = levylab::schema_json();
    return s.c_str();
}

levylab_status levylab_config_create(const char* subcommand, levylab_config** out) {
    return guarded([&] {
        need(subcommand, "subcommand");
        need(out, "out");
        *out = nullptr;
        *out = new levylab_config{levylab::ExperimentConfig(subcommand)};
    });
}

void levylab_config_destroy(levylab_config* config) { delete config; }

levylab_status levylab_config_load_file(levylab_config* config, const char* path) {
    return guarded([&] {
        need(config, "config");
        need(path, "path");
        config->cfg.load_file(path);
    });
}

levylab_status levylab_config_set(levylab_config* config, const char* key, const char* value) {
    return guarded([&] {
        need(config, "config");
        need(key, "key");
        need(value, "value");
        config->cfg.set(key, value);
    });
}

levylab_status levylab_config_resolved_ini(const levylab_config* config, char** out) {
    return guarded([&] {
        need(config, "config");
        need(out, "out");
        const std::string s = config->cfg.resolved_ini();
        char* buf = new char[s.size() + 1];
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *out = buf;
    });
}

void levylab_string_free(char* s) { delete[] s; }

levylab_status levylab_run(const levylab_config* config, levylab_result** out) {
    return guarded([&] {
        need(config, "config");
        need(out, "out");
        *out = nullptr;
        auto outcome = levylab::run_experiment(config->cfg);
        *out = new levylab_result{std::move(outcome.output_dir), std::move(outcome.summary_json)};
    });
}

const char* levylab_result_summary_json(const levylab_result* result) {
    return result ? result->summary.c_str() : "";
}

const char* levylab_result_output_dir(const levylab_result* result) {
    return result ? result->output_dir.c_str() : "";
}

void levylab_result_destroy(levylab_result* result) { delete result; }

levylab_status levylab_stable_sample(double alpha, double sigma, double theta, double mu, uint64_t seed,
                                     uint64_t stream_id, size_t n, double* out) {
    return guarded([&] {
        if (n > 0) need(out, "out");
        const levylab::StableParams p{alpha, sigma, theta, mu};
        const auto v = levylab::sample(p, levylab::RngStream{seed, stream_id}, n);
        std::copy(v.begin(), v.end(), out);
    });
}

levylab_status levylab_stable_pdf(double alpha, double sigma, double theta, double mu, double x, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = levylab::pdf(levylab::StableParams{alpha, sigma, theta, mu}, x);
    });
}

levylab_status levylab_quartic_drift(double w, double epsilon, double alpha, double theta, double h, int K, int p,
                                     int q, int use_h0, double* out) {
    return guarded([&] {
        need(out, "out");
        const levylab::DriftApproxParams a{h, K, p, q, use_h0 != 0};
        *out = levylab::drift_b(w, levylab::quartic(), epsilon, alpha, theta, a);
    });
}

levylab_status levylab_h0(double alpha, double epsilon, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = levylab::h0(alpha, epsilon);
    });
}

}  // extern "C"
