#include "magegraph/magegraph.h"

#include <exception>
#include <new>
#include <string>

#include "config.hpp"
#include "error.hpp"
#include "geo.hpp"
#include "pipeline.hpp"

struct mg_run {
    mage::RunConfig config;
    std::string last_error;
};

namespace {

mg_status status_for(const mage::Error& e) {
    return e.kind() == mage::ErrorKind::Numeric ? MG_ERROR_NUMERIC : MG_ERROR_USAGE;
}

template <typename Fn>
mg_status guarded(mg_run* run, Fn&& fn) {
    if (!run) return MG_ERROR_USAGE;
    try {
        fn();
        run->last_error.clear();
        return MG_OK;
    } catch (const mage::Error& e) {
        run->last_error = e.what();
        return status_for(e);
    } catch (const std::exception& e) {
        run->last_error = e.what();
        return MG_ERROR_USAGE;
    }
}

}  // namespace

extern "C" {

const char* mg_version(void) { return "1.0.0"; }

mg_run* mg_run_new(void) { return new (std::nothrow) mg_run(); }

void mg_run_free(mg_run* run) { delete run; }

mg_status mg_run_load_config(mg_run* run, const char* path) {
    return guarded(run, [&] {
        if (!path) mage::throw_config("config path is null");
        run->config = mage::load_run_config(path);
    });
}

mg_status mg_run_set(mg_run* run, const char* dotted_key, const char* value) {
    return guarded(run, [&] {
        if (!dotted_key || !value) mage::throw_config("override key/value is null");
        mage::apply_override(run->config, dotted_key, value);
    });
}

mg_status mg_run_exec(mg_run* run, const char* command) {
    return guarded(run, [&] {
        if (!command) mage::throw_config("command is null");
        mage::pipeline::run_command(run->config, command);
    });
}

const char* mg_run_last_error(const mg_run* run) { return run ? run->last_error.c_str() : "null run handle"; }

mg_status mg_haversine_km(double lat1, double lon1, double lat2, double lon2, double* out_km) {
    if (!out_km) return MG_ERROR_USAGE;
    try {
        *out_km = mage::geo_distance({lat1, lon1}, {lat2, lon2});
        return MG_OK;
    } catch (const mage::Error& e) {
        return status_for(e);
    } catch (const std::exception&) {
        return MG_ERROR_USAGE;
    }
}

}  // extern "C"
