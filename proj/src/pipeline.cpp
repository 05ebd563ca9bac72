#include "stackcast/pipeline.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/evaluation.hpp"
#include "stackcast/feature_select.hpp"
#include "stackcast/log.hpp"
#include "stackcast/market_data.hpp"
#include "stackcast/model_io.hpp"
#include "stackcast/preprocess.hpp"
#include "stackcast/stacking.hpp"
#include "stackcast/text.hpp"
#include "stackcast/tuning.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <variant>

namespace stackcast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kStageVersion = 1;

class StageTimer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string out_path(const PipelineConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// fingerprint helpers; the separator keeps adjacent fields from running
// together and colliding
void feed(Fnv1a& h, std::string_view text) {
    h.update(text);
    h.update(std::string_view("\x1f", 1));
}

void feed_file(Fnv1a& h, const std::string& path) { feed(h, read_file(path)); }

void feed_spec(Fnv1a& h, const LearnerSpec& s) {
    switch (s.kind) {
    case LearnerKind::Glmnet:
        feed(h, "glmnet");
        feed(h, format_double(s.glmnet.alpha));
        feed(h, format_double(s.glmnet.lambda));
        feed(h, std::to_string(s.glmnet.max_iter));
        feed(h, format_double(s.glmnet.tol));
        break;
    case LearnerKind::Forest:
        feed(h, "rf");
        feed(h, std::to_string(s.forest.ntree));
        feed(h, std::to_string(s.forest.mtry));
        feed(h, format_double(s.forest.bag_fraction));
        feed(h, std::to_string(s.forest.bootstrap));
        feed(h, std::to_string(s.forest.min_node_size));
        break;
    case LearnerKind::Svr:
        feed(h, "svr");
        feed(h, format_double(s.svr.cost));
        feed(h, format_double(s.svr.epsilon));
        feed(h, format_double(s.svr.tol));
        feed(h, std::to_string(s.svr.max_passes));
        break;
    }
}

fs::path stage_key_path(const PipelineConfig& cfg, const std::string& stage) {
    return fs::path(cfg.out_dir) / ".stage" / (stage + ".key");
}

bool outputs_current(const PipelineConfig& cfg, const std::string& stage, const std::string& key,
                     const std::vector<std::string>& outputs) {
    std::ifstream in(stage_key_path(cfg, stage));
    std::string stored;
    if (!in || !std::getline(in, stored) || stored != key) return false;
    for (const auto& name : outputs) {
        if (!fs::exists(fs::path(cfg.out_dir) / name)) return false;
    }
    return true;
}

void record_outputs(const PipelineConfig& cfg, const std::string& stage, const std::string& key) {
    fs::create_directories(fs::path(cfg.out_dir) / ".stage");
    std::ofstream out(stage_key_path(cfg, stage));
    out << key << "\n";
}

void require_stage_file(const PipelineConfig& cfg, const std::string& name,
                        const std::string& producer) {
    if (!fs::exists(fs::path(cfg.out_dir) / name)) {
        throw Error(ErrorKind::StageError, name + " not found in " + cfg.out_dir + "; run the " +
                                               producer + " command first");
    }
}

// Error::what() is "Kind: message"; strip the prefix before re-wrapping so
// stage context does not stack kind labels
std::string bare_message(const Error& e) {
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    const std::string text = e.what();
    return text.rfind(prefix, 0) == 0 ? text.substr(prefix.size()) : text;
}

std::string features_key(const PipelineConfig& cfg) {
    Fnv1a h;
    feed(h, "features-v1");
    feed_file(h, cfg.data_path);
    feed(h, cfg.schema.date);
    feed(h, cfg.schema.open);
    feed(h, cfg.schema.high);
    feed(h, cfg.schema.low);
    feed(h, cfg.schema.close);
    feed(h, cfg.schema.volume_from);
    feed(h, cfg.schema.volume_to);
    feed(h, cfg.boundary_date.iso());
    for (const auto& spec : cfg.indicators) feed(h, spec.column_name());
    feed(h, std::to_string(cfg.horizon));
    feed(h, std::to_string(cfg.normalize));
    feed(h, std::to_string(cfg.scale_target));
    for (const auto& name : cfg.exclude_columns) feed(h, name);
    return h.hex();
}

std::string select_key(const PipelineConfig& cfg) {
    Fnv1a h;
    feed(h, "select-v1");
    feed_file(h, out_path(cfg, "features_train.csv"));
    feed(h, std::to_string(cfg.boruta.max_runs));
    feed(h, format_double(cfg.boruta.p_value));
    feed(h, std::to_string(cfg.boruta.forest_params.ntree));
    feed(h, std::to_string(cfg.boruta.forest_params.mtry));
    feed(h, format_double(cfg.boruta.forest_params.bag_fraction));
    feed(h, std::to_string(cfg.boruta.forest_params.bootstrap));
    feed(h, std::to_string(cfg.boruta.forest_params.min_node_size));
    feed(h, std::to_string(cfg.boruta.permutation_importance));
    feed(h, std::to_string(cfg.rng_seed));
    feed(h, std::to_string(cfg.drop_tentative));
    return h.hex();
}

std::vector<std::string> read_selected_list(const PipelineConfig& cfg) {
    std::ifstream in(fs::path(cfg.out_dir) / "selected_features.txt");
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        const std::string token = trim(line);
        if (!token.empty()) names.push_back(token);
    }
    return names;
}

void save_predictions_csv(const std::vector<Date>& dates, const std::vector<double>& actual,
                          const std::vector<double>& predicted, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << "date,actual,predicted\n";
    for (std::size_t i = 0; i < dates.size(); ++i) {
        out << dates[i].iso() << ',' << format_double(actual[i]) << ','
            << format_double(predicted[i]) << "\n";
    }
    if (!out) throw Error(ErrorKind::IoError, "failed writing " + path);
}

constexpr std::array<const char*, 4> kModelNames = {"glmnet", "rf", "svr", "stack"};

} // namespace

StageRecord cmd_features(const PipelineConfig& cfg) {
    StageRecord rec{"features", kStageVersion, "", 0.0, false};
    const StageTimer timer;
    fs::create_directories(cfg.out_dir);
    rec.input_hash = features_key(cfg);
    const std::vector<std::string> outputs = {"features_train.csv", "features_test.csv",
                                              "scaler.json"};
    if (outputs_current(cfg, rec.name, rec.input_hash, outputs)) {
        log_info(rec.name, "outputs up to date, skipping");
        rec.skipped = true;
        rec.seconds = timer.seconds();
        return rec;
    }

    const OhlcvSeries series = load_csv(cfg.data_path, cfg.schema);
    FeatureMatrix all = build_feature_matrix(series, cfg.indicators, cfg.horizon, cfg.jobs);
    const std::size_t warmup = series.rows.size() - all.rows() - static_cast<std::size_t>(cfg.horizon);
    if (!cfg.exclude_columns.empty()) all = drop_columns(all, cfg.exclude_columns);

    std::size_t split_row = 0;
    while (split_row < all.rows() &&
           all.dates[split_row].serial() <= cfg.boundary_date.serial()) {
        ++split_row;
    }
    if (split_row == 0 || split_row == all.rows()) {
        throw Error(ErrorKind::BoundaryOutOfRange,
                    "boundary " + cfg.boundary_date.iso() +
                        " leaves an empty train or test slice after warm-up");
    }
    const auto [train, test] = all.split_at(split_row);

    ScalerState scaler;
    if (cfg.normalize) {
        scaler = fit_scaler(train, cfg.scale_target);
    } else {
        // identity ranges: transform and inverse are both no-ops
        scaler.column_names = train.column_names;
        scaler.col_min.assign(train.cols(), 0.0);
        scaler.col_max.assign(train.cols(), 1.0);
        scaler.scale_target = false;
    }
    save_feature_csv(transform(scaler, train), out_path(cfg, "features_train.csv"));
    save_feature_csv(transform(scaler, test), out_path(cfg, "features_test.csv"));
    save_scaler_json(scaler, out_path(cfg, "scaler.json"));

    log_info(rec.name, std::to_string(all.rows()) + " rows after dropping " +
                           std::to_string(warmup) + " warm-up and " +
                           std::to_string(cfg.horizon) + " horizon rows; train " +
                           std::to_string(train.rows()) + ", test " +
                           std::to_string(test.rows()));
    record_outputs(cfg, rec.name, rec.input_hash);
    rec.seconds = timer.seconds();
    return rec;
}

StageRecord cmd_select(const PipelineConfig& cfg) {
    StageRecord rec{"select", kStageVersion, "", 0.0, false};
    const StageTimer timer;
    require_stage_file(cfg, "features_train.csv", "features");
    rec.input_hash = select_key(cfg);
    const std::vector<std::string> outputs = {"boruta_report.csv", "boruta_boxplot.csv",
                                              "selected_features.txt"};
    if (outputs_current(cfg, rec.name, rec.input_hash, outputs)) {
        log_info(rec.name, "outputs up to date, skipping");
        rec.skipped = true;
        rec.seconds = timer.seconds();
        return rec;
    }

    const FeatureMatrix train = load_feature_csv(out_path(cfg, "features_train.csv"));
    BorutaConfig boruta = cfg.boruta;
    boruta.rng_seed = cfg.rng_seed;
    const BorutaResult result = run_boruta(train, boruta, cfg.jobs);

    save_boruta_report_csv(result.verdicts, out_path(cfg, "boruta_report.csv"));
    save_boruta_boxplot_csv(result, out_path(cfg, "boruta_boxplot.csv"));

    const std::vector<std::string> keep = selected_features(result.verdicts, cfg.drop_tentative);
    const std::string list_path = out_path(cfg, "selected_features.txt");
    std::ofstream list(list_path);
    if (!list) throw Error(ErrorKind::IoError, "cannot write " + list_path);
    for (const auto& name : keep) list << name << "\n";

    int confirmed = 0;
    int tentative = 0;
    int rejected = 0;
    for (const auto& v : result.verdicts) {
        if (v.decision == BorutaDecision::Confirmed) ++confirmed;
        else if (v.decision == BorutaDecision::Tentative) ++tentative;
        else ++rejected;
    }
    log_info(rec.name, std::to_string(confirmed) + " confirmed, " + std::to_string(tentative) +
                           " tentative, " + std::to_string(rejected) + " rejected after " +
                           std::to_string(result.runs) + " runs; keeping " +
                           std::to_string(keep.size()) + " features");
    if (keep.empty()) {
        log_warn(rec.name, "no features kept; training will fail until selection loosens");
    }
    record_outputs(cfg, rec.name, rec.input_hash);
    rec.seconds = timer.seconds();
    return rec;
}

StageRecord cmd_train(const PipelineConfig& cfg, const std::string& model) {
    bool known = model == "stack";
    for (const char* name : kModelNames) known = known || model == name;
    if (!known) {
        throw Error(ErrorKind::ConfigError,
                    "unknown model '" + model + "' (expected glmnet, rf, svr, or stack)");
    }

    StageRecord rec{"train-" + model, kStageVersion, "", 0.0, false};
    const StageTimer timer;
    require_stage_file(cfg, "features_train.csv", "features");
    if (model == "stack") {
        require_stage_file(cfg, "model_rf.json", "train --model rf");
        require_stage_file(cfg, "model_glmnet.json", "train --model glmnet");
    }

    const bool have_selection = fs::exists(fs::path(cfg.out_dir) / "selected_features.txt");

    Fnv1a h;
    feed(h, "train-v1");
    feed(h, model);
    feed_file(h, out_path(cfg, "features_train.csv"));
    if (have_selection) feed_file(h, out_path(cfg, "selected_features.txt"));
    else feed(h, "all-columns");
    feed(h, std::to_string(cfg.rng_seed));
    feed(h, std::to_string(cfg.time_series_cv));
    if (model == "stack") {
        feed_file(h, out_path(cfg, "model_rf.json"));
        feed_file(h, out_path(cfg, "model_glmnet.json"));
        feed(h, std::to_string(cfg.stack_folds));
        feed(h, std::to_string(cfg.stack_repeats));
        feed(h, format_double(cfg.stack_meta_cost));
        feed(h, format_double(cfg.stack_meta_epsilon));
    } else {
        const std::vector<LearnerSpec>& grid = model == "glmnet" ? cfg.glmnet_grid
                                               : model == "rf"   ? cfg.rf_grid
                                                                 : cfg.svr_grid;
        for (const auto& spec : grid) feed_spec(h, spec);
    }
    rec.input_hash = h.hex();

    std::vector<std::string> outputs = {"model_" + model + ".json"};
    if (model != "stack") outputs.push_back("cv_results_" + model + ".csv");
    if (outputs_current(cfg, rec.name, rec.input_hash, outputs)) {
        log_info(rec.name, "outputs up to date, skipping");
        rec.skipped = true;
        rec.seconds = timer.seconds();
        return rec;
    }

    FeatureMatrix train = load_feature_csv(out_path(cfg, "features_train.csv"));
    if (have_selection) {
        const std::vector<std::string> names = read_selected_list(cfg);
        if (names.empty()) {
            throw Error(ErrorKind::StageError,
                        "selected_features.txt lists no features; loosen selection or remove "
                        "the file to train on all columns");
        }
        train = select_columns(train, names);
        log_info(rec.name, "training on " + std::to_string(names.size()) + " selected features");
    } else {
        log_info(rec.name, "no selection list found; training on all " +
                               std::to_string(train.cols()) + " columns");
    }

    if (model == "stack") {
        const LoadedModel rf = load_model_json(out_path(cfg, "model_rf.json"));
        const LoadedModel glm = load_model_json(out_path(cfg, "model_glmnet.json"));
        if (!std::holds_alternative<ForestModel>(rf.model)) {
            throw Error(ErrorKind::StageError, "model_rf.json does not hold a forest model");
        }
        if (!std::holds_alternative<ElasticNetModel>(glm.model)) {
            throw Error(ErrorKind::StageError,
                        "model_glmnet.json does not hold an elastic net model");
        }
        StackConfig stack;
        stack.base_specs.clear();
        LearnerSpec rf_spec;
        rf_spec.kind = LearnerKind::Forest;
        rf_spec.forest = std::get<ForestModel>(rf.model).params;
        LearnerSpec glm_spec;
        glm_spec.kind = LearnerKind::Glmnet;
        glm_spec.glmnet = std::get<ElasticNetModel>(glm.model).params;
        stack.base_specs = {rf_spec, glm_spec};
        stack.meta_spec.kind = LearnerKind::Svr;
        stack.meta_spec.svr.cost = cfg.stack_meta_cost;
        stack.meta_spec.svr.epsilon = cfg.stack_meta_epsilon;
        stack.folds = cfg.stack_folds;
        stack.repeats = cfg.stack_repeats;
        stack.rng_seed = cfg.rng_seed;

        const StackedModel fitted = fit_stack(train, stack, cfg.jobs);
        save_model_json(Model(fitted), out_path(cfg, "model_stack.json"), "scaler.json");
        log_info(rec.name, "stacked " + std::to_string(stack.base_specs.size()) +
                               " bases over " + std::to_string(stack.folds) + "x" +
                               std::to_string(stack.repeats) + " out-of-fold predictions");
    } else {
        const LearnerKind kind = parse_learner_kind(model);
        const std::vector<LearnerSpec>& grid = kind == LearnerKind::Glmnet ? cfg.glmnet_grid
                                               : kind == LearnerKind::Forest ? cfg.rf_grid
                                                                             : cfg.svr_grid;
        if (grid.empty()) {
            throw Error(ErrorKind::ConfigError, "empty hyperparameter grid for " + model);
        }
        CvSpec spec = cv_preset(kind);
        spec.rng_seed = cfg.rng_seed;
        const std::vector<FoldSplit> splits = cfg.time_series_cv
                                                  ? forward_chain_splits(train.rows(), spec.folds)
                                                  : kfold_splits(train.rows(), spec);
        const GridResult result = grid_search(train, grid, splits, cfg.jobs);
        save_cv_results_csv(result, out_path(cfg, "cv_results_" + model + ".csv"));

        LearnerSpec winner = result.candidates[result.winner];
        winner.forest.rng_seed = cfg.rng_seed;
        const LearnerModel fitted = fit_learner(train, winner, cfg.jobs);
        save_model_json(to_model(fitted), out_path(cfg, "model_" + model + ".json"),
                        "scaler.json");
        log_info(rec.name, "winner " + spec_summary(winner) + " with mean cv rmse " +
                               format_double(result.mean_rmse[result.winner]) + " over " +
                               std::to_string(splits.size()) + " splits");
    }

    record_outputs(cfg, rec.name, rec.input_hash);
    rec.seconds = timer.seconds();
    return rec;
}

StageRecord cmd_evaluate(const PipelineConfig& cfg) {
    StageRecord rec{"evaluate", kStageVersion, "", 0.0, false};
    const StageTimer timer;
    require_stage_file(cfg, "features_train.csv", "features");
    require_stage_file(cfg, "features_test.csv", "features");
    require_stage_file(cfg, "scaler.json", "features");

    std::vector<std::string> present;
    for (const char* name : kModelNames) {
        if (fs::exists(fs::path(cfg.out_dir) / ("model_" + std::string(name) + ".json"))) {
            present.push_back(name);
        }
    }
    if (present.empty()) {
        throw Error(ErrorKind::StageError,
                    "no model files in " + cfg.out_dir + "; run the train command first");
    }

    Fnv1a h;
    feed(h, "evaluate-v1");
    feed_file(h, out_path(cfg, "features_train.csv"));
    feed_file(h, out_path(cfg, "features_test.csv"));
    feed_file(h, out_path(cfg, "scaler.json"));
    for (const auto& name : present) {
        feed(h, name);
        feed_file(h, out_path(cfg, "model_" + name + ".json"));
    }
    rec.input_hash = h.hex();

    std::vector<std::string> outputs = {"metrics.json", "comparison.md"};
    for (const auto& name : present) {
        outputs.push_back("error_series_" + name + ".csv");
        outputs.push_back("predictions_" + name + ".csv");
    }
    if (outputs_current(cfg, rec.name, rec.input_hash, outputs)) {
        log_info(rec.name, "outputs up to date, skipping");
        rec.skipped = true;
        rec.seconds = timer.seconds();
        return rec;
    }

    const FeatureMatrix train = load_feature_csv(out_path(cfg, "features_train.csv"));
    const FeatureMatrix test = load_feature_csv(out_path(cfg, "features_test.csv"));
    const ScalerState scaler = load_scaler_json(out_path(cfg, "scaler.json"));
    const std::vector<double> actual_train = inverse_transform_target(scaler, train.target);
    const std::vector<double> actual_test = inverse_transform_target(scaler, test.target);

    std::vector<MetricsReport> reports;
    for (const auto& name : present) {
        const LoadedModel loaded = load_model_json(out_path(cfg, "model_" + name + ".json"));
        const std::vector<std::string>& columns = model_column_names(loaded.model);
        const FeatureMatrix train_cols = select_columns(train, columns);
        const FeatureMatrix test_cols = select_columns(test, columns);
        const std::vector<double> pred_train =
            inverse_transform_target(scaler, predict(loaded.model, train_cols));
        const std::vector<double> pred_test =
            inverse_transform_target(scaler, predict(loaded.model, test_cols));

        reports.push_back(compute_metrics(actual_train, pred_train, name, "train"));
        reports.push_back(compute_metrics(actual_test, pred_test, name, "test"));
        save_error_series_csv(error_series(actual_test, pred_test, test.dates),
                              out_path(cfg, "error_series_" + name + ".csv"));
        save_predictions_csv(test.dates, actual_test, pred_test,
                             out_path(cfg, "predictions_" + name + ".csv"));
        log_info(rec.name, name + " test rmse " + format_double(reports.back().rmse) +
                               ", mape " + format_double(reports.back().mape) + "%");
    }

    save_metrics_json(reports, out_path(cfg, "metrics.json"));
    save_comparison_md(reports, out_path(cfg, "comparison.md"));
    record_outputs(cfg, rec.name, rec.input_hash);
    rec.seconds = timer.seconds();
    return rec;
}

std::vector<StageRecord> cmd_run_all(const PipelineConfig& cfg) {
    std::vector<StageRecord> records;
    const auto run = [&records](const std::string& label, auto&& stage) {
        try {
            records.push_back(stage());
        } catch (const Error& e) {
            throw Error(e.kind(), label + " stage: " + bare_message(e), e.line());
        }
    };

    run("features", [&] { return cmd_features(cfg); });
    run("select", [&] { return cmd_select(cfg); });
    run("train glmnet", [&] { return cmd_train(cfg, "glmnet"); });
    run("train rf", [&] { return cmd_train(cfg, "rf"); });
    run("train svr", [&] { return cmd_train(cfg, "svr"); });
    run("train stack", [&] { return cmd_train(cfg, "stack"); });
    run("evaluate", [&] { return cmd_evaluate(cfg); });

    json manifest;
    manifest["format"] = "stackcast-manifest";
    manifest["version"] = 1;
    manifest["rng_seed"] = cfg.rng_seed;
    manifest["jobs"] = cfg.jobs;
    json stages = json::array();
    for (const auto& r : records) {
        json stage;
        stage["name"] = r.name;
        stage["version"] = r.version;
        stage["input_hash"] = r.input_hash;
        stage["seconds"] = r.seconds;
        stage["skipped"] = r.skipped;
        stages.push_back(stage);
    }
    manifest["stages"] = stages;

    const std::string path = out_path(cfg, "manifest.json");
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << manifest.dump(2) << "\n";
    log_info("run-all", "pipeline complete; manifest written to " + path);
    return records;
}

} // namespace stackcast
