// stackcast: config-driven OHLCV forecasting pipeline.
//
// Subcommands map onto pipeline stages; every flag overrides the matching
// config field after the file loads. Exit codes: 0 success, 1 configuration
// problem, 2 data contract violation, 3 stage failure.

#include "stackcast/config.hpp"
#include "stackcast/errors.hpp"
#include "stackcast/log.hpp"
#include "stackcast/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

using namespace stackcast;

namespace {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ConfigError:
        return 1;
    case ErrorKind::StageError:
    case ErrorKind::IoError:
        return 3;
    default:
        return 2; // everything else is the data breaking a contract
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"OHLCV forecasting pipeline: indicator features, shadow-probe feature "
                 "selection, elastic net / random forest / linear SVR learners, and a "
                 "stacked ensemble"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> jobs;
    std::optional<int> horizon;
    bool drop_tentative = false;
    bool time_series_cv = false;
    bool quiet = false;

    app.add_option("--config", config_path, "experiment config file (TOML-style)")
        ->required();
    app.add_option("--seed", seed, "override [run] seed");
    app.add_option("--out", out_dir, "override [output] dir");
    app.add_option("--jobs", jobs, "override [run] jobs (worker cap for every stage)");
    app.add_option("--horizon", horizon, "override [features] horizon (days ahead)");
    app.add_flag("--drop-tentative", drop_tentative,
                 "exclude Tentative features from the selection list");
    app.add_flag("--time-series-cv", time_series_cv,
                 "tune with forward-chaining splits instead of random folds");
    app.add_flag("--quiet", quiet, "suppress progress output (errors still print)");

    CLI::App* features = app.add_subcommand("features", "build and split the feature matrix");
    CLI::App* select = app.add_subcommand("select", "run feature selection on the training split");
    CLI::App* train = app.add_subcommand("train", "tune one learner and fit the winner");
    std::string model;
    train->add_option("--model", model, "glmnet, rf, svr, or stack")
        ->required()
        ->check(CLI::IsMember({"glmnet", "rf", "svr", "stack"}));
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "score every trained model on both splits");
    CLI::App* run_all = app.add_subcommand("run-all", "run the whole pipeline in order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // bad flags are configuration mistakes
    }

    set_log_quiet(quiet);

    try {
        PipelineConfig cfg = load_pipeline_config(config_path);
        if (seed) cfg.rng_seed = *seed;
        if (out_dir) cfg.out_dir = *out_dir;
        if (jobs) {
            if (*jobs < 0) throw Error(ErrorKind::ConfigError, "--jobs must be non-negative");
            cfg.jobs = *jobs;
        }
        if (horizon) {
            if (*horizon < 0) throw Error(ErrorKind::ConfigError, "--horizon must be non-negative");
            cfg.horizon = *horizon;
        }
        if (drop_tentative) cfg.drop_tentative = true;
        if (time_series_cv) cfg.time_series_cv = true;

        if (features->parsed()) cmd_features(cfg);
        else if (select->parsed()) cmd_select(cfg);
        else if (train->parsed()) cmd_train(cfg, model);
        else if (evaluate->parsed()) cmd_evaluate(cfg);
        else if (run_all->parsed()) cmd_run_all(cfg);
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
