// SPDX-License-Identifier: Apache-2.0
#include "wildfire/wildfire.h"

#include "wildfire/artifact.hpp"
#include "wildfire/error.hpp"
#include "wildfire/eval.hpp"
#include "wildfire/geometry.hpp"
#include "wildfire/pipeline.hpp"

#include <exception>
#include <new>
#include <string>

struct wfd_model {
    wildfire::ModelArtifact artifact;
    std::string kind;
};

namespace {

thread_local std::string g_message;
thread_local std::string g_kind;
thread_local std::string g_category;

void clear_error() {
    g_message.clear();
    g_kind.clear();
    g_category.clear();
}

wfd_status set_error(wfd_status status, std::string category, std::string kind, std::string message) {
    g_category = std::move(category);
    g_kind = std::move(kind);
    g_message = std::move(message);
    return status;
}

template <class F>
wfd_status guarded(F&& body) {
    clear_error();
    try {
        body();
        return WFD_OK;
    } catch (const wildfire::Error& e) {
        const auto category = std::string(wildfire::category_name(e.category()));
        switch (e.category()) {
            case wildfire::ErrorCategory::Config: return set_error(WFD_CONFIG_ERROR, category, e.kind(), e.what());
            case wildfire::ErrorCategory::Data: return set_error(WFD_DATA_ERROR, category, e.kind(), e.what());
            case wildfire::ErrorCategory::Io: return set_error(WFD_IO_ERROR, category, e.kind(), e.what());
            case wildfire::ErrorCategory::Internal: return set_error(WFD_INTERNAL_ERROR, category, e.kind(), e.what());
        }
        return set_error(WFD_INTERNAL_ERROR, "internal", e.kind(), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(WFD_INTERNAL_ERROR, "internal", "OutOfMemory", "allocation failed");
    } catch (const std::exception& e) {
        return set_error(WFD_INTERNAL_ERROR, "internal", "Unexpected", e.what());
    } catch (...) {
        return set_error(WFD_INTERNAL_ERROR, "internal", "Unexpected", "unknown exception");
    }
}

wfd_status invalid(const char* what) { return set_error(WFD_INVALID_ARGUMENT, "config", "InvalidArgument", what); }

}  // namespace

extern "C" {

const char* wfd_version(void) { return wildfire::kVersion; }

const char* wfd_status_name(wfd_status status) {
    switch (status) {
        case WFD_OK: return "ok";
        case WFD_CONFIG_ERROR: return "config";
        case WFD_DATA_ERROR: return "data";
        case WFD_IO_ERROR: return "io";
        case WFD_INTERNAL_ERROR: return "internal";
        case WFD_INVALID_ARGUMENT: return "invalid_argument";
    }
    return "unknown";
}

int wfd_exit_code(wfd_status status) {
    switch (status) {
        case WFD_OK: return 0;
        case WFD_CONFIG_ERROR:
        case WFD_IO_ERROR:
        case WFD_INVALID_ARGUMENT: return 1;
        case WFD_DATA_ERROR: return 2;
        case WFD_INTERNAL_ERROR: return 3;
    }
    return 3;
}

const char* wfd_last_error_message(void) { return g_message.c_str(); }
const char* wfd_last_error_kind(void) { return g_kind.c_str(); }
const char* wfd_last_error_category(void) { return g_category.c_str(); }

void wfd_run_options_init(wfd_run_options* options) {
    if (!options) return;
    *options = wfd_run_options{};
    options->threads = 1;
    options->split_year = 2018;
}

wfd_status wfd_run(const char* subcommand, const wfd_run_options* options) {
    clear_error();
    if (!subcommand || !options) return invalid("subcommand and options are required");
    return guarded([&] {
        wildfire::RunOptions run;
        if (options->config_path) run.config_path = options->config_path;
        if (options->out_dir) run.out_dir = options->out_dir;
        if (options->model) run.model = options->model;
        if (options->input) run.input = options->input;
        if (options->output) run.output = options->output;
        run.threads = options->threads;
        if (options->has_seed) run.seed = options->seed;
        if (options->has_split_year) run.split_year = options->split_year;
        wildfire::run_command(subcommand, run);
    });
}

wfd_status wfd_model_load(const char* path, wfd_model** out) {
    clear_error();
    if (!path || !out) return invalid("path and out are required");
    *out = nullptr;
    return guarded([&] {
        auto model = new wfd_model{wildfire::load_artifact(path), {}};
        model->kind = std::string(wildfire::eval::model_kind_name(model->artifact.kind));
        *out = model;
    });
}

void wfd_model_free(wfd_model* model) { delete model; }

const char* wfd_model_kind(const wfd_model* model) { return model ? model->kind.c_str() : ""; }

wfd_status wfd_model_predict_days(const wfd_model* model, const char* csv_text, double* out, size_t capacity,
                                  size_t* count) {
    clear_error();
    if (!model || !csv_text || !count || (capacity > 0 && !out)) return invalid("model, csv_text and count are required");
    return guarded([&] {
        const auto records = wildfire::read_cleaned_csv(csv_text, false);
        const auto dataset = wildfire::build_matrix(records, model->artifact.spec);
        const auto logs = wildfire::predict_log(model->artifact, dataset.features);
        *count = logs.size();
        for (size_t i = 0; i < logs.size() && i < capacity; ++i) out[i] = wildfire::eval::inverse_transform(logs[i]);
    });
}

wfd_status wfd_polygon_centroid(const char* text, double* latitude, double* longitude) {
    clear_error();
    if (!text || !latitude || !longitude) return invalid("text, latitude and longitude are required");
    return guarded([&] {
        const auto c = wildfire::polygon_centroid(wildfire::parse_polygon_text(text));
        *latitude = c.latitude;
        *longitude = c.longitude;
    });
}

wfd_status wfd_compute_metrics(const double* true_days, const double* pred_days, size_t n, double* mae, double* rmse,
                               double* r2, int* r2_defined) {
    clear_error();
    if ((n > 0 && (!true_days || !pred_days)) || !mae || !rmse || !r2 || !r2_defined) {
        return invalid("inputs and outputs are required");
    }
    return guarded([&] {
        const auto m = wildfire::eval::compute_metrics({true_days, n}, {pred_days, n});
        *mae = m.mae_days;
        *rmse = m.rmse_days;
        *r2 = m.r2_days;
        *r2_defined = m.r2_defined ? 1 : 0;
    });
}

double wfd_inverse_transform(double pred_log) { return wildfire::eval::inverse_transform(pred_log); }

}  // extern "C"
