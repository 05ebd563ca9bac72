#include "stackcast/tuning.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/rng.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using namespace stackcast;

namespace {

FeatureMatrix matrix_from(const std::vector<std::vector<double>>& columns,
                          const std::vector<double>& y) {
    FeatureMatrix m;
    m.columns = columns;
    m.target = y;
    for (std::size_t j = 0; j < columns.size(); ++j) m.column_names.push_back("x" + std::to_string(j));
    m.dates.assign(y.size(), Date{2020, 1, 1});
    return m;
}

// every row in exactly one validation fold per repeat, sizes within one
void check_partition(const std::vector<FoldSplit>& splits, std::size_t n, int folds, int repeats) {
    REQUIRE(splits.size() == static_cast<std::size_t>(folds) * static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        std::vector<int> seen(n, 0);
        std::size_t smallest = n, largest = 0;
        for (const auto& split : splits) {
            if (split.repeat != r) continue;
            for (std::size_t i : split.validation_rows) ++seen[i];
            smallest = std::min(smallest, split.validation_rows.size());
            largest = std::max(largest, split.validation_rows.size());
            REQUIRE(split.train_rows.size() + split.validation_rows.size() == n);
            CHECK(std::is_sorted(split.train_rows.begin(), split.train_rows.end()));
            CHECK(std::is_sorted(split.validation_rows.begin(), split.validation_rows.end()));
        }
        CHECK(largest - smallest <= 1);
        for (std::size_t i = 0; i < n; ++i) CHECK(seen[i] == 1);
    }
}

} // namespace

TEST_CASE("cv presets match the published protocols") {
    CHECK(cv_preset(LearnerKind::Glmnet).folds == 10);
    CHECK(cv_preset(LearnerKind::Glmnet).repeats == 6);
    CHECK(cv_preset(LearnerKind::Forest).folds == 12);
    CHECK(cv_preset(LearnerKind::Forest).repeats == 8);
    CHECK(cv_preset(LearnerKind::Svr).folds == 10);
    CHECK(cv_preset(LearnerKind::Svr).repeats == 1);
    CHECK(cv_preset_stack_meta().folds == 10);
    CHECK(cv_preset_stack_meta().repeats == 5);
}

TEST_CASE("kfold: ten rows over ten folds gives singleton folds") {
    CvSpec spec;
    const auto splits = kfold_splits(10, spec);
    check_partition(splits, 10, 10, 1);
    for (const auto& split : splits) CHECK(split.validation_rows.size() == 1);
}

TEST_CASE("kfold: eleven rows over ten folds gives one pair and nine singletons") {
    CvSpec spec;
    const auto splits = kfold_splits(11, spec);
    int pairs = 0, singles = 0;
    for (const auto& split : splits) {
        if (split.validation_rows.size() == 2) ++pairs;
        if (split.validation_rows.size() == 1) ++singles;
    }
    CHECK(pairs == 1);
    CHECK(singles == 9);
}

TEST_CASE("kfold: repeated splits partition every repeat") {
    CvSpec spec;
    spec.repeats = 6;
    spec.rng_seed = 42;
    const auto splits = kfold_splits(100, spec);
    check_partition(splits, 100, 10, 6);

    // repeats are genuinely different partitions
    std::set<std::vector<std::size_t>> first_folds;
    for (const auto& split : splits) {
        if (split.fold == 0) first_folds.insert(split.validation_rows);
    }
    CHECK(first_folds.size() > 1);
}

TEST_CASE("kfold: fixed seed reproduces, changed seed reshuffles") {
    CvSpec spec;
    spec.rng_seed = 7;
    const auto a = kfold_splits(50, spec);
    const auto b = kfold_splits(50, spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].validation_rows == b[i].validation_rows);
        CHECK(a[i].train_rows == b[i].train_rows);
    }
    spec.rng_seed = 8;
    const auto c = kfold_splits(50, spec);
    bool any_differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].validation_rows != c[i].validation_rows) any_differ = true;
    }
    CHECK(any_differ);
}

TEST_CASE("kfold: shuffle off keeps folds contiguous") {
    CvSpec spec;
    spec.folds = 4;
    spec.shuffle = false;
    const auto splits = kfold_splits(10, spec);
    CHECK(splits[0].validation_rows == std::vector<std::size_t>{0, 1, 2});
    CHECK(splits[1].validation_rows == std::vector<std::size_t>{3, 4, 5});
    CHECK(splits[2].validation_rows == std::vector<std::size_t>{6, 7});
    CHECK(splits[3].validation_rows == std::vector<std::size_t>{8, 9});
}

TEST_CASE("kfold: rejects undersized inputs and bad specs") {
    CvSpec spec;
    try {
        kfold_splits(9, spec);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewRows);
    }
    spec.folds = 1;
    CHECK_THROWS_AS(kfold_splits(10, spec), Error);
    spec.folds = 10;
    spec.repeats = 0;
    CHECK_THROWS_AS(kfold_splits(10, spec), Error);
}

TEST_CASE("forward chaining never trains on the future") {
    const auto splits = forward_chain_splits(33, 4);
    REQUIRE(splits.size() == 4);
    std::size_t covered = 0;
    for (const auto& split : splits) {
        REQUIRE(!split.train_rows.empty());
        REQUIRE(!split.validation_rows.empty());
        const std::size_t last_train = split.train_rows.back();
        for (std::size_t v : split.validation_rows) CHECK(v > last_train);
        covered += split.validation_rows.size();
    }
    CHECK(splits[0].train_rows.size() == 9); // 33 - 4 * 6
    CHECK(covered == 24);
    CHECK(splits.back().validation_rows.back() == 32);
    CHECK_THROWS_AS(forward_chain_splits(4, 4), Error);
}

TEST_CASE("grid search: a lone candidate wins") {
    Rng rng(1);
    auto columns = synthetic::random_columns(rng, 40, 2);
    const auto y = synthetic::linear_response(rng, columns, {1.0, -1.0}, 0.0, 0.1);
    const auto m = matrix_from(columns, y);
    LearnerSpec spec;
    spec.kind = LearnerKind::Glmnet;
    CvSpec cv;
    cv.folds = 4;
    const auto result = grid_search(m, {spec}, kfold_splits(40, cv));
    CHECK(result.winner == 0);
    CHECK(result.cells.size() == 4);
    CHECK(result.mean_rmse.size() == 1);
    CHECK(std::isfinite(result.mean_rmse[0]));
}

TEST_CASE("grid search: a dominant candidate wins every time") {
    Rng rng(2);
    auto columns = synthetic::random_columns(rng, 60, 3);
    const auto y = synthetic::linear_response(rng, columns, {2.0, -1.0, 0.5}, 1.0, 0.05);
    const auto m = matrix_from(columns, y);

    LearnerSpec good;
    good.kind = LearnerKind::Glmnet;
    good.glmnet.lambda = 0.0;
    LearnerSpec crippled;
    crippled.kind = LearnerKind::Glmnet;
    crippled.glmnet.lambda = 1e6; // shrinks everything to the intercept
    CvSpec cv;
    cv.folds = 5;
    const auto splits = kfold_splits(60, cv);
    const auto result = grid_search(m, {crippled, good}, splits);
    CHECK(result.winner == 1);
    // dominance holds cell by cell, not just on average
    for (std::size_t s = 0; s < splits.size(); ++s) {
        CHECK(result.cells[splits.size() + s].metrics.rmse < result.cells[s].metrics.rmse);
    }
}

TEST_CASE("grid search: ties go to the first candidate") {
    Rng rng(3);
    auto columns = synthetic::random_columns(rng, 30, 2);
    const auto y = synthetic::linear_response(rng, columns, {1.0, 1.0}, 0.0, 0.1);
    const auto m = matrix_from(columns, y);
    LearnerSpec spec;
    spec.kind = LearnerKind::Glmnet;
    CvSpec cv;
    cv.folds = 3;
    const auto result = grid_search(m, {spec, spec, spec}, kfold_splits(30, cv));
    CHECK(result.winner == 0);
    CHECK(result.mean_rmse[0] == result.mean_rmse[1]);
    CHECK(result.mean_rmse[1] == result.mean_rmse[2]);
}

TEST_CASE("grid search: rescaling the problem does not change the winner") {
    Rng rng(4);
    auto columns = synthetic::random_columns(rng, 50, 3);
    const auto y = synthetic::linear_response(rng, columns, {2.0, 0.0, -1.0}, 0.5, 0.3);
    LearnerSpec a;
    a.kind = LearnerKind::Glmnet;
    a.glmnet.lambda = 0.0;
    LearnerSpec b = a;
    b.glmnet.lambda = 100.0;
    CvSpec cv;
    cv.folds = 5;
    const auto splits = kfold_splits(50, cv);

    const auto base = grid_search(matrix_from(columns, y), {a, b}, splits);
    auto y_scaled = y;
    for (auto& v : y_scaled) v *= 37.0;
    // lambda=0 stays OLS under scaling, lambda=100 stays saturated
    const auto scaled = grid_search(matrix_from(columns, y_scaled), {a, b}, splits);
    CHECK(base.winner == scaled.winner);
    // equality only up to the coordinate-descent tolerance
    CHECK(scaled.mean_rmse[0] == doctest::Approx(37.0 * base.mean_rmse[0]).epsilon(1e-5));
}

TEST_CASE("grid search: sparse-truth elastic net grid picks a mixing that wins on test") {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(9000 + seed);
        auto columns = synthetic::random_columns(rng, 180, 8);
        const auto y = synthetic::linear_response(rng, columns, {2.0, -3.0, 0, 0, 0, 0, 0, 0},
                                                  1.0, 0.8);
        const auto full = matrix_from(columns, y);
        const auto [train, test] = full.split_at(120);

        std::vector<LearnerSpec> grid;
        for (double alpha : {0.0, 0.5, 1.0}) {
            LearnerSpec spec;
            spec.kind = LearnerKind::Glmnet;
            spec.glmnet.alpha = alpha;
            spec.glmnet.lambda = 0.1 * elastic_net_lambda_max(train, alpha);
            grid.push_back(spec);
        }
        CvSpec cv;
        cv.folds = 5;
        cv.rng_seed = seed;
        const auto result = grid_search(train, grid, kfold_splits(train.rows(), cv));

        std::vector<double> test_rmse;
        for (const auto& spec : grid) {
            const auto model = fit_learner(train, spec);
            const auto preds = predict(model, test);
            double se = 0.0;
            for (std::size_t i = 0; i < test.rows(); ++i) {
                se += (test.target[i] - preds[i]) * (test.target[i] - preds[i]);
            }
            test_rmse.push_back(std::sqrt(se / static_cast<double>(test.rows())));
        }
        bool beats_losing_extremes = true;
        for (std::size_t c : {std::size_t{0}, std::size_t{2}}) {
            if (c != result.winner && test_rmse[result.winner] > test_rmse[c]) {
                beats_losing_extremes = false;
            }
        }
        if (beats_losing_extremes) ++wins;
    }
    CHECK(wins == 10);
}

TEST_CASE("grid search: jobs count changes nothing") {
    Rng rng(5);
    auto columns = synthetic::random_columns(rng, 48, 3);
    const auto y = synthetic::linear_response(rng, columns, {1.0, 2.0, 3.0}, 0.0, 0.2);
    const auto m = matrix_from(columns, y);
    LearnerSpec rf;
    rf.kind = LearnerKind::Forest;
    rf.forest.ntree = 10;
    LearnerSpec net;
    net.kind = LearnerKind::Glmnet;
    CvSpec cv;
    cv.folds = 4;
    const auto splits = kfold_splits(48, cv);
    const auto serial = grid_search(m, {rf, net}, splits, 1);
    const auto threaded = grid_search(m, {rf, net}, splits, 4);
    CHECK(serial.winner == threaded.winner);
    REQUIRE(serial.cells.size() == threaded.cells.size());
    for (std::size_t i = 0; i < serial.cells.size(); ++i) {
        CHECK(serial.cells[i].metrics.rmse == threaded.cells[i].metrics.rmse);
    }
}

TEST_CASE("grid search: failures carry candidate and fold context") {
    Rng rng(6);
    auto columns = synthetic::random_columns(rng, 20, 2);
    const auto y = synthetic::linear_response(rng, columns, {1.0, 1.0}, 0.0, 0.1);
    const auto m = matrix_from(columns, y);
    LearnerSpec bad;
    bad.kind = LearnerKind::Forest;
    bad.forest.ntree = 0;
    CvSpec cv;
    cv.folds = 4;
    try {
        grid_search(m, {bad}, kfold_splits(20, cv));
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
        CHECK(std::string(e.what()).find("candidate 0") != std::string::npos);
        CHECK(std::string(e.what()).find("fold") != std::string::npos);
    }
    CHECK_THROWS_AS(grid_search(m, {}, kfold_splits(20, cv)), Error);
}

TEST_CASE("cv results csv lists every cell and flags the winner") {
    Rng rng(7);
    auto columns = synthetic::random_columns(rng, 24, 2);
    const auto y = synthetic::linear_response(rng, columns, {1.0, -2.0}, 0.0, 0.1);
    const auto m = matrix_from(columns, y);
    LearnerSpec a;
    a.kind = LearnerKind::Glmnet;
    LearnerSpec b;
    b.kind = LearnerKind::Svr;
    CvSpec cv;
    cv.folds = 3;
    cv.repeats = 2;
    const auto result = grid_search(m, {a, b}, kfold_splits(24, cv));

    const std::string path = "cv_results_test.csv";
    save_cv_results_csv(result, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "candidate,kind,params,repeat,fold,rmse,mae,mape_pct,r_squared");
    int cell_lines = 0, summary_lines = 0, winner_flags = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line == "summary,candidate,kind,params,mean_rmse,stddev_rmse,winner") continue;
        if (line.rfind("summary,", 0) == 0) {
            ++summary_lines;
            if (line.back() == '1') ++winner_flags;
        } else {
            ++cell_lines;
        }
    }
    CHECK(cell_lines == 12);
    CHECK(summary_lines == 2);
    CHECK(winner_flags == 1);
    std::remove(path.c_str());
}
