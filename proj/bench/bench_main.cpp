// Times the four parallel kernels against their serial reference paths and
// checks that both produce bit-identical output. Run with --jobs N to pick
// the worker count for the parallel side (0 = all hardware threads).

#include "stackcast/feature_matrix.hpp"
#include "stackcast/forest.hpp"
#include "stackcast/learner.hpp"
#include "stackcast/log.hpp"
#include "stackcast/parallel.hpp"
#include "stackcast/rng.hpp"
#include "stackcast/stacking.hpp"
#include "stackcast/tuning.hpp"
#include "support/synthetic.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

using namespace stackcast;

namespace {

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(stop - start).count());
    }
    return best;
}

bool same(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    // bit comparison, not tolerance: the two paths must not diverge at all
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Row {
    std::string name;
    double serial_s = 0.0;
    double parallel_s = 0.0;
    bool identical = false;
};

FeatureMatrix synthetic_matrix(std::uint64_t seed, std::size_t n, std::size_t p,
                               const std::vector<double>& coef, double noise) {
    Rng rng(seed);
    FeatureMatrix m;
    m.columns = synthetic::random_columns(rng, n, p);
    m.target = synthetic::linear_response(rng, m.columns, coef, 0.25, noise);
    for (std::size_t j = 0; j < p; ++j) m.column_names.push_back("x" + std::to_string(j));
    m.dates.assign(n, Date{2020, 1, 1});
    return m;
}

} // namespace

int main(int argc, char** argv) {
    int jobs = 0;
    int reps = 3;
    std::size_t days = 4000;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string key = argv[i];
        if (key == "--jobs") jobs = std::atoi(argv[i + 1]);
        else if (key == "--reps") reps = std::atoi(argv[i + 1]);
        else if (key == "--days") days = static_cast<std::size_t>(std::atoll(argv[i + 1]));
        else {
            std::fprintf(stderr, "usage: bench [--jobs N] [--reps N] [--days N]\n");
            return 2;
        }
    }

    set_log_quiet(true);
    const int workers = resolve_jobs(jobs);
    std::printf("parallel side: %d worker(s), best of %d rep(s)\n\n", workers, reps);

    std::vector<Row> rows;

    {
        const OhlcvSeries series = synthetic::random_ohlcv(21, days);
        std::vector<IndicatorSpec> specs;
        for (const char* token :
             {"sma14", "ema14", "wma14", "atr14", "ad", "cci20", "roc14", "mom10", "macd_line",
              "macd_signal", "macd_hist", "bb20_mid", "bb20_up", "bb20_down", "stoch14",
              "mean_mw20", "median_mw20", "volatility20"}) {
            specs.push_back(parse_indicator_token(token));
        }
        FeatureMatrix serial, parallel;
        Row row{"indicator columns (" + std::to_string(days) + " days, 18 indicators)"};
        row.serial_s =
            time_best_of(reps, [&] { serial = build_feature_matrix(series, specs, 1, 1); });
        row.parallel_s =
            time_best_of(reps, [&] { parallel = build_feature_matrix(series, specs, 1, jobs); });
        row.identical = same(serial.target, parallel.target);
        for (std::size_t j = 0; row.identical && j < serial.columns.size(); ++j) {
            row.identical = same(serial.columns[j], parallel.columns[j]);
        }
        rows.push_back(row);
    }

    const FeatureMatrix train = synthetic_matrix(22, 1200, 8,
                                                 {3.0, -2.0, 1.5, 1.0, -1.0, 0.0, 0.0, 0.0}, 0.4);

    {
        ForestParams p;
        p.ntree = 300;
        p.rng_seed = 5;
        ForestModel serial, parallel;
        Row row{"forest fit (1200x8, 300 trees)"};
        row.serial_s = time_best_of(reps, [&] { serial = fit_forest(train, p, 1); });
        row.parallel_s = time_best_of(reps, [&] { parallel = fit_forest(train, p, jobs); });
        row.identical = same(predict(serial, train), predict(parallel, train)) &&
                        same(serial.importance, parallel.importance);
        rows.push_back(row);
    }

    {
        std::vector<LearnerSpec> grid;
        for (double alpha : {0.1, 0.55, 1.0}) {
            for (double lambda : {0.001, 0.01, 0.1}) {
                LearnerSpec spec;
                spec.kind = LearnerKind::Glmnet;
                spec.glmnet.alpha = alpha;
                spec.glmnet.lambda = lambda;
                grid.push_back(spec);
            }
        }
        CvSpec cv;
        cv.folds = 10;
        cv.repeats = 6;
        cv.rng_seed = 3;
        const auto splits = kfold_splits(train.rows(), cv);
        GridResult serial, parallel;
        Row row{"grid search (9 candidates x 60 folds)"};
        row.serial_s = time_best_of(reps, [&] { serial = grid_search(train, grid, splits, 1); });
        row.parallel_s =
            time_best_of(reps, [&] { parallel = grid_search(train, grid, splits, jobs); });
        row.identical =
            serial.winner == parallel.winner && same(serial.mean_rmse, parallel.mean_rmse);
        rows.push_back(row);
    }

    {
        StackConfig cfg = default_stack_config();
        cfg.rng_seed = 17;
        cfg.base_specs[0].forest.ntree = 100; // keep the default invocation quick
        StackedModel serial, parallel;
        Row row{"stack fit (2 bases, 10 folds x 5 repeats)"};
        row.serial_s = time_best_of(reps, [&] { serial = fit_stack(train, cfg, 1); });
        row.parallel_s = time_best_of(reps, [&] { parallel = fit_stack(train, cfg, jobs); });
        row.identical = same(predict(serial, train), predict(parallel, train));
        for (std::size_t b = 0; row.identical && b < serial.oof_meta_features.size(); ++b) {
            row.identical = same(serial.oof_meta_features[b], parallel.oof_meta_features[b]);
        }
        rows.push_back(row);
    }

    int mismatches = 0;
    std::printf("%-46s %10s %10s %8s  %s\n", "kernel", "serial", "parallel", "speedup",
                "identical");
    for (const Row& row : rows) {
        if (!row.identical) ++mismatches;
        std::printf("%-46s %9.3fs %9.3fs %7.2fx  %s\n", row.name.c_str(), row.serial_s,
                    row.parallel_s, row.serial_s / row.parallel_s,
                    row.identical ? "yes" : "NO");
    }
    if (mismatches) {
        std::printf("\n%d kernel(s) diverged between the serial and parallel paths\n", mismatches);
    }
    return mismatches;
}
