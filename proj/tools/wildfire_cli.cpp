// SPDX-License-Identifier: Apache-2.0
// Command-line front end over the C API.
#include "wildfire/wildfire.h"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Wildfire containment-duration pipeline"};
    app.set_version_flag("--version", std::string(wfd_version()));
    app.fallthrough();
    app.require_subcommand(1);

    std::string config, model, out, input, output;
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<int> split_year;
    app.add_option("--config", config, "Run configuration (JSON)");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Master seed, overrides the config");
    app.add_option("--split-year", split_year, "First test year, overrides the config")->check(CLI::Range(1900, 2100));
    app.add_option("--model", model, "rf, gbt or lstm");
    app.add_option("--out", out, "Output directory, overrides the config");
    app.add_option("--input", input, "Rows to predict (cleaned CSV layout)");
    app.add_option("--output", output, "Destination for predict/synth output");

    app.add_subcommand("ingest", "Join, clean and describe the perimeter export");
    app.add_subcommand("tune", "Cross-validated grid search (rf, gbt) or random search (lstm)");
    app.add_subcommand("train", "Fit one model and save its artifact");
    app.add_subcommand("evaluate", "Score every saved model on the test years");
    app.add_subcommand("report", "Write metric tables and figures");
    app.add_subcommand("predict", "Day-unit predictions from a saved model");
    app.add_subcommand("synth", "Write a 500-row synthetic cleaned dataset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    wfd_run_options options;
    wfd_run_options_init(&options);
    if (!config.empty()) options.config_path = config.c_str();
    if (!out.empty()) options.out_dir = out.c_str();
    if (!model.empty()) options.model = model.c_str();
    if (!input.empty()) options.input = input.c_str();
    if (!output.empty()) options.output = output.c_str();
    options.threads = threads;
    if (seed) {
        options.seed = *seed;
        options.has_seed = 1;
    }
    if (split_year) {
        options.split_year = *split_year;
        options.has_split_year = 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const wfd_status status = wfd_run(command.c_str(), &options);
    if (status != WFD_OK) {
        std::fprintf(stderr, "error: category=%s kind=%s message=%s\n", wfd_last_error_category(),
                     wfd_last_error_kind(), wfd_last_error_message());
    }
    return wfd_exit_code(status);
}
