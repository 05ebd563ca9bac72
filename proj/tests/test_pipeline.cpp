#include "stackcast/pipeline.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/evaluation.hpp"
#include "stackcast/market_data.hpp"
#include "stackcast/model_io.hpp"
#include "stackcast/preprocess.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace stackcast;
namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// A config small enough to push a whole pipeline through in seconds on one
// core: short indicators, a 12-run selection pass, stump grids.
PipelineConfig tiny_config(const std::string& out_dir, const std::string& data_path) {
    PipelineConfig cfg;
    cfg.data_path = data_path;
    cfg.boundary_date = Date{2015, 4, 15};
    for (const char* token : {"sma5", "ema5", "roc5", "mom5"}) {
        cfg.indicators.push_back(parse_indicator_token(token));
    }
    cfg.horizon = 1;

    cfg.boruta.max_runs = 12;
    cfg.boruta.forest_params.ntree = 15;
    cfg.boruta.forest_params.min_node_size = 5;

    cfg.glmnet_grid.clear();
    for (const double lambda : {0.0001, 0.01}) {
        LearnerSpec s;
        s.kind = LearnerKind::Glmnet;
        s.glmnet.alpha = 0.5;
        s.glmnet.lambda = lambda;
        cfg.glmnet_grid.push_back(s);
    }
    cfg.rf_grid.clear();
    {
        LearnerSpec s;
        s.kind = LearnerKind::Forest;
        s.forest.ntree = 10;
        s.forest.min_node_size = 5;
        cfg.rf_grid.push_back(s);
    }
    cfg.svr_grid.clear();
    {
        LearnerSpec s;
        s.kind = LearnerKind::Svr;
        s.svr.cost = 1.0;
        s.svr.epsilon = 0.1;
        cfg.svr_grid.push_back(s);
    }
    cfg.stack_folds = 4;
    cfg.stack_repeats = 1;
    cfg.out_dir = out_dir;
    cfg.rng_seed = 11;
    return cfg;
}

PipelineConfig fresh_pipeline(const std::string& tag) {
    const std::string root = "/tmp/stackcast_pipe_" + tag;
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string data_path = root + "/prices.csv";
    save_csv(synthetic::random_ohlcv(77, 150), data_path);
    return tiny_config(root + "/out", data_path);
}

} // namespace

TEST_CASE("features stage splits, scales, and caches") {
    PipelineConfig cfg = fresh_pipeline("features");

    const StageRecord rec = cmd_features(cfg);
    CHECK(rec.name == "features");
    CHECK_FALSE(rec.skipped);
    CHECK_FALSE(rec.input_hash.empty());

    const FeatureMatrix train = load_feature_csv(cfg.out_dir + "/features_train.csv");
    const FeatureMatrix test = load_feature_csv(cfg.out_dir + "/features_test.csv");
    const ScalerState scaler = load_scaler_json(cfg.out_dir + "/scaler.json");

    // 6 raw ohlcv columns + 4 indicators
    CHECK(train.cols() == 10);
    CHECK(test.cols() == 10);
    // 150 days - 5 warm-up - 1 horizon = 144 usable rows
    CHECK(train.rows() + test.rows() == 144);
    CHECK(train.dates.back().serial() <= cfg.boundary_date.serial());
    CHECK(test.dates.front().serial() > cfg.boundary_date.serial());

    // min-max scaling pins every training column to [0, 1] exactly
    for (std::size_t j = 0; j < train.cols(); ++j) {
        const auto [lo, hi] = std::minmax_element(train.columns[j].begin(), train.columns[j].end());
        CHECK(*lo == doctest::Approx(0.0));
        CHECK(*hi == doctest::Approx(1.0));
    }
    CHECK(scaler.scale_target);
    CHECK(*std::min_element(train.target.begin(), train.target.end()) == doctest::Approx(0.0));

    // unchanged inputs skip the stage and keep the fingerprint
    const StageRecord again = cmd_features(cfg);
    CHECK(again.skipped);
    CHECK(again.input_hash == rec.input_hash);

    // any input change reruns under a new fingerprint
    cfg.horizon = 2;
    const StageRecord changed = cmd_features(cfg);
    CHECK_FALSE(changed.skipped);
    CHECK(changed.input_hash != rec.input_hash);
}

TEST_CASE("normalize off writes an identity scaler") {
    PipelineConfig cfg = fresh_pipeline("rawscale");
    cfg.normalize = false;
    cmd_features(cfg);

    const ScalerState scaler = load_scaler_json(cfg.out_dir + "/scaler.json");
    CHECK_FALSE(scaler.scale_target);
    for (std::size_t j = 0; j < scaler.col_min.size(); ++j) {
        CHECK(scaler.col_min[j] == 0.0);
        CHECK(scaler.col_max[j] == 1.0);
    }

    // raw prices pass through untouched, so values sit near the 100 start
    const FeatureMatrix train = load_feature_csv(cfg.out_dir + "/features_train.csv");
    const long close = train.column_index("close");
    REQUIRE(close >= 0);
    CHECK(*std::max_element(train.columns[close].begin(), train.columns[close].end()) > 50.0);
    CHECK(*std::max_element(train.target.begin(), train.target.end()) > 50.0);
}

TEST_CASE("select stage reports verdicts and a feature list") {
    PipelineConfig cfg = fresh_pipeline("select");
    cmd_features(cfg);
    const StageRecord rec = cmd_select(cfg);
    CHECK_FALSE(rec.skipped);

    const std::string report = read_text(cfg.out_dir + "/boruta_report.csv");
    CHECK(report.rfind("feature,decision,mean_importance,hit_count", 0) == 0);
    CHECK(read_text(cfg.out_dir + "/boruta_boxplot.csv").rfind("name,run,importance", 0) == 0);

    const FeatureMatrix train = load_feature_csv(cfg.out_dir + "/features_train.csv");
    std::ifstream list(cfg.out_dir + "/selected_features.txt");
    std::string name;
    std::size_t kept = 0;
    while (std::getline(list, name)) {
        if (name.empty()) continue;
        ++kept;
        CHECK(train.column_index(name) >= 0);
    }
    // close almost equals next-day close, so selection can never come back empty
    CHECK(kept > 0);

    CHECK(cmd_select(cfg).skipped);
}

TEST_CASE("stages demand their upstream files") {
    PipelineConfig cfg = fresh_pipeline("missing");

    const auto stage_error = [](auto&& call, const std::string& needle) {
        try {
            call();
            FAIL_CHECK("expected StageError mentioning " << needle);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::StageError);
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    stage_error([&] { cmd_select(cfg); }, "features");
    stage_error([&] { cmd_train(cfg, "rf"); }, "features");
    stage_error([&] { cmd_evaluate(cfg); }, "features");

    cmd_features(cfg);
    stage_error([&] { cmd_train(cfg, "stack"); }, "train --model rf");
    stage_error([&] { cmd_evaluate(cfg); }, "train");

    CHECK_THROWS_AS((void)cmd_train(cfg, "boosted"), Error); // unknown model name
}

TEST_CASE("train stages write models and cv tables, then evaluate reports") {
    PipelineConfig cfg = fresh_pipeline("train");
    cmd_features(cfg);
    cmd_select(cfg);

    for (const std::string name : {"glmnet", "rf", "svr"}) {
        const StageRecord rec = cmd_train(cfg, name);
        CHECK(rec.name == "train-" + name);
        const LoadedModel loaded = load_model_json(cfg.out_dir + "/model_" + name + ".json");
        CHECK(model_kind_name(loaded.model) == name);
        CHECK(loaded.scaler_ref == "scaler.json");

        const std::string cv = read_text(cfg.out_dir + "/cv_results_" + name + ".csv");
        CHECK(cv.find("rmse") != std::string::npos);
        CHECK(cv.find("winner") != std::string::npos);
    }

    const StageRecord stack_rec = cmd_train(cfg, "stack");
    CHECK_FALSE(stack_rec.skipped);
    const LoadedModel stack = load_model_json(cfg.out_dir + "/model_stack.json");
    const auto& stacked = std::get<StackedModel>(stack.model);
    CHECK(stacked.config.folds == 4);
    CHECK(stacked.config.repeats == 1);
    REQUIRE(stacked.base_models.size() == 2);
    CHECK(std::holds_alternative<ForestModel>(stacked.base_models[0]));
    CHECK(std::holds_alternative<ElasticNetModel>(stacked.base_models[1]));
    // bases inherit the tuned winners' hyperparameters
    CHECK(std::get<ForestModel>(stacked.base_models[0]).params.ntree == 10);

    CHECK(cmd_train(cfg, "rf").skipped);
    CHECK(cmd_train(cfg, "stack").skipped);

    const StageRecord eval_rec = cmd_evaluate(cfg);
    CHECK_FALSE(eval_rec.skipped);

    const std::vector<MetricsReport> reports = load_metrics_json(cfg.out_dir + "/metrics.json");
    REQUIRE(reports.size() == 8); // 4 models x train/test
    for (const auto& r : reports) {
        CHECK(r.rmse >= r.mae);
        CHECK(r.mape >= 0.0);
        CHECK(std::isfinite(r.r_squared));
    }

    const FeatureMatrix test = load_feature_csv(cfg.out_dir + "/features_test.csv");
    const ScalerState scaler = load_scaler_json(cfg.out_dir + "/scaler.json");
    const std::vector<double> actual = inverse_transform_target(scaler, test.target);

    for (const std::string name : {"glmnet", "rf", "svr", "stack"}) {
        const std::string preds = read_text(cfg.out_dir + "/predictions_" + name + ".csv");
        CHECK(preds.rfind("date,actual,predicted", 0) == 0);
        CHECK(std::count(preds.begin(), preds.end(), '\n') == long(test.rows()) + 1);

        std::stringstream lines(preds);
        std::string line;
        std::getline(lines, line); // header
        std::getline(lines, line);
        // actual column is on the denormalized price scale
        const std::size_t first = line.find(',');
        const std::size_t second = line.find(',', first + 1);
        CHECK(std::stod(line.substr(first + 1, second - first - 1)) ==
              doctest::Approx(actual.front()));

        const std::string series = read_text(cfg.out_dir + "/error_series_" + name + ".csv");
        CHECK(std::count(series.begin(), series.end(), '\n') == long(test.rows()) + 1);
    }

    const std::string table = read_text(cfg.out_dir + "/comparison.md");
    for (const char* name : {"glmnet", "rf", "svr", "stack"}) {
        CHECK(table.find(name) != std::string::npos);
    }

    CHECK(cmd_evaluate(cfg).skipped);
}

TEST_CASE("run-all chains stages, writes a manifest, and no-ops on rerun") {
    PipelineConfig cfg = fresh_pipeline("runall");

    const std::vector<StageRecord> first = cmd_run_all(cfg);
    REQUIRE(first.size() == 7);
    const std::vector<std::string> order = {"features",  "select",      "train-glmnet",
                                            "train-rf",  "train-svr",   "train-stack",
                                            "evaluate"};
    for (std::size_t i = 0; i < order.size(); ++i) {
        CHECK(first[i].name == order[i]);
        CHECK_FALSE(first[i].skipped);
    }

    const nlohmann::json manifest =
        nlohmann::json::parse(read_text(cfg.out_dir + "/manifest.json"));
    CHECK(manifest.at("format") == "stackcast-manifest");
    CHECK(manifest.at("rng_seed") == 11);
    REQUIRE(manifest.at("stages").size() == 7);
    CHECK(manifest.at("stages")[0].at("name") == "features");
    CHECK(manifest.at("stages")[0].at("input_hash") == first[0].input_hash);

    const std::vector<StageRecord> second = cmd_run_all(cfg);
    for (std::size_t i = 0; i < second.size(); ++i) {
        CHECK(second[i].skipped);
        CHECK(second[i].input_hash == first[i].input_hash);
    }
}

TEST_CASE("same seed reproduces artifacts byte for byte across directories") {
    PipelineConfig a = fresh_pipeline("detA");
    cmd_run_all(a);

    // same data and seed into a different directory
    PipelineConfig b = a;
    b.out_dir = fs::path(a.out_dir).parent_path().string() + "/out_b";
    fs::remove_all(b.out_dir);
    cmd_run_all(b);

    for (const char* name :
         {"features_train.csv", "features_test.csv", "scaler.json", "boruta_report.csv",
          "selected_features.txt", "cv_results_rf.csv", "model_glmnet.json", "model_rf.json",
          "model_svr.json", "model_stack.json", "metrics.json", "comparison.md",
          "predictions_stack.csv"}) {
        CAPTURE(name);
        CHECK(read_text(a.out_dir + "/" + name) == read_text(b.out_dir + "/" + name));
    }

    // a different seed must change the stochastic artifacts
    PipelineConfig c = a;
    c.out_dir = fs::path(a.out_dir).parent_path().string() + "/out_c";
    c.rng_seed = 12;
    cmd_run_all(c);
    CHECK(read_text(a.out_dir + "/model_rf.json") != read_text(c.out_dir + "/model_rf.json"));
}

TEST_CASE("run-all names the failing stage and keeps the error kind") {
    PipelineConfig cfg = fresh_pipeline("failctx");
    cfg.boundary_date = Date{2020, 1, 1}; // past the end of the fixture
    try {
        cmd_run_all(cfg);
        FAIL_CHECK("expected the features stage to fail");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BoundaryOutOfRange);
        CHECK(std::string(e.what()).find("features stage:") != std::string::npos);
    }
}
