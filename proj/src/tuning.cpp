#include "stackcast/tuning.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/parallel.hpp"
#include "stackcast/rng.hpp"
#include "stackcast/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace stackcast {

namespace {

constexpr std::uint64_t kCvStream = 0xc7f01d; // per-repeat shuffle streams

void check_spec(const CvSpec& spec)
{
    if (spec.folds < 2) throw Error(ErrorKind::ConfigError, "cross-validation needs at least 2 folds");
    if (spec.repeats < 1) throw Error(ErrorKind::ConfigError, "cross-validation repeats must be at least 1");
}

// RMSE/MAE always; MAPE and R^2 turn into NaN when undefined for the fold
// (zero actuals, constant actuals) instead of aborting the whole search.
MetricsReport lenient_metrics(const std::vector<double>& actual, const std::vector<double>& forecast)
{
    MetricsReport r;
    const std::size_t n = actual.size();
    double se = 0.0, ae = 0.0, pe = 0.0, mean = 0.0;
    bool any_zero = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = actual[i] - forecast[i];
        se += d * d;
        ae += std::abs(d);
        if (actual[i] == 0.0) any_zero = true;
        else pe += std::abs(d / actual[i]);
        mean += actual[i];
    }
    mean /= static_cast<double>(n);
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) sst += (actual[i] - mean) * (actual[i] - mean);
    r.rmse = std::sqrt(se / static_cast<double>(n));
    r.mae = ae / static_cast<double>(n);
    r.mape = any_zero ? std::numeric_limits<double>::quiet_NaN()
                      : 100.0 * pe / static_cast<double>(n);
    r.r_squared = sst == 0.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0 - se / sst;
    return r;
}

} // namespace

CvSpec cv_preset(LearnerKind kind)
{
    CvSpec spec;
    switch (kind) {
    case LearnerKind::Glmnet: spec.folds = 10; spec.repeats = 6; break;
    case LearnerKind::Forest: spec.folds = 12; spec.repeats = 8; break;
    case LearnerKind::Svr: spec.folds = 10; spec.repeats = 1; break;
    }
    return spec;
}

CvSpec cv_preset_stack_meta()
{
    CvSpec spec;
    spec.folds = 10;
    spec.repeats = 5;
    return spec;
}

std::vector<FoldSplit> kfold_splits(std::size_t n, const CvSpec& spec)
{
    check_spec(spec);
    const auto k = static_cast<std::size_t>(spec.folds);
    if (n < k) throw Error(ErrorKind::TooFewRows, "fewer rows than folds");

    std::vector<FoldSplit> splits;
    splits.reserve(k * static_cast<std::size_t>(spec.repeats));
    for (int r = 0; r < spec.repeats; ++r) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (spec.shuffle) {
            Rng rng(Rng::derive(spec.rng_seed, kCvStream, static_cast<std::uint64_t>(r)));
            rng.shuffle(order);
        }
        const std::size_t base = n / k;
        const std::size_t extra = n % k;
        std::size_t cursor = 0;
        for (std::size_t f = 0; f < k; ++f) {
            const std::size_t size = base + (f < extra ? 1 : 0);
            FoldSplit split;
            split.repeat = r;
            split.fold = static_cast<int>(f);
            split.validation_rows.assign(order.begin() + static_cast<long>(cursor),
                                         order.begin() + static_cast<long>(cursor + size));
            split.train_rows.reserve(n - size);
            split.train_rows.insert(split.train_rows.end(), order.begin(),
                                    order.begin() + static_cast<long>(cursor));
            split.train_rows.insert(split.train_rows.end(),
                                    order.begin() + static_cast<long>(cursor + size), order.end());
            std::sort(split.validation_rows.begin(), split.validation_rows.end());
            std::sort(split.train_rows.begin(), split.train_rows.end());
            splits.push_back(std::move(split));
            cursor += size;
        }
    }
    return splits;
}

std::vector<FoldSplit> forward_chain_splits(std::size_t n, int folds)
{
    if (folds < 2) throw Error(ErrorKind::ConfigError, "forward chaining needs at least 2 folds");
    const auto k = static_cast<std::size_t>(folds);
    const std::size_t block = n / (k + 1);
    if (block == 0) throw Error(ErrorKind::TooFewRows, "too few rows for forward chaining");
    const std::size_t first_train = n - k * block;

    std::vector<FoldSplit> splits;
    splits.reserve(k);
    for (std::size_t f = 0; f < k; ++f) {
        FoldSplit split;
        split.fold = static_cast<int>(f);
        const std::size_t start = first_train + f * block;
        split.train_rows.resize(start);
        std::iota(split.train_rows.begin(), split.train_rows.end(), std::size_t{0});
        split.validation_rows.resize(block);
        std::iota(split.validation_rows.begin(), split.validation_rows.end(), start);
        splits.push_back(std::move(split));
    }
    return splits;
}

GridResult grid_search(const FeatureMatrix& m, const std::vector<LearnerSpec>& grid,
                       const std::vector<FoldSplit>& splits, int jobs)
{
    if (grid.empty()) throw Error(ErrorKind::ConfigError, "empty hyperparameter grid");
    if (splits.empty()) throw Error(ErrorKind::ConfigError, "no cross-validation splits");

    GridResult result;
    result.candidates = grid;
    result.cells.resize(grid.size() * splits.size());

    parallel_for_index(result.cells.size(), jobs, [&](std::size_t t) {
        const std::size_t c = t / splits.size();
        const FoldSplit& split = splits[t % splits.size()];
        CvCell& cell = result.cells[t];
        cell.candidate = c;
        cell.repeat = split.repeat;
        cell.fold = split.fold;
        try {
            const auto train = take_rows(m, split.train_rows);
            const auto val = take_rows(m, split.validation_rows);
            const auto model = fit_learner(train, grid[c], 1);
            cell.metrics = lenient_metrics(val.target, predict(model, val));
        } catch (const Error& e) {
            std::ostringstream oss;
            oss << "candidate " << c << " repeat " << split.repeat << " fold " << split.fold
                << ": " << e.what();
            throw Error(e.kind(), oss.str(), e.line());
        }
        cell.metrics.model_name = learner_kind_name(grid[c].kind);
        cell.metrics.slice = "validation";
    });

    result.mean_rmse.assign(grid.size(), 0.0);
    result.stddev_rmse.assign(grid.size(), 0.0);
    const auto cells_per = static_cast<double>(splits.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        double sum = 0.0;
        for (std::size_t s = 0; s < splits.size(); ++s) {
            sum += result.cells[c * splits.size() + s].metrics.rmse;
        }
        const double mean = sum / cells_per;
        double ssd = 0.0;
        for (std::size_t s = 0; s < splits.size(); ++s) {
            const double d = result.cells[c * splits.size() + s].metrics.rmse - mean;
            ssd += d * d;
        }
        result.mean_rmse[c] = mean;
        result.stddev_rmse[c] = splits.size() > 1 ? std::sqrt(ssd / (cells_per - 1.0)) : 0.0;
        if (mean < result.mean_rmse[result.winner]) result.winner = c;
    }
    return result;
}

std::string spec_summary(const LearnerSpec& spec)
{
    std::ostringstream oss;
    switch (spec.kind) {
    case LearnerKind::Glmnet:
        oss << "alpha=" << format_double(spec.glmnet.alpha)
            << " lambda=" << format_double(spec.glmnet.lambda);
        break;
    case LearnerKind::Forest:
        oss << "ntree=" << spec.forest.ntree << " mtry=" << spec.forest.mtry
            << " bag_fraction=" << format_double(spec.forest.bag_fraction)
            << " min_node_size=" << spec.forest.min_node_size;
        break;
    case LearnerKind::Svr:
        oss << "cost=" << format_double(spec.svr.cost)
            << " epsilon=" << format_double(spec.svr.epsilon);
        break;
    }
    return oss.str();
}

void save_cv_results_csv(const GridResult& result, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << "candidate,kind,params,repeat,fold,rmse,mae,mape_pct,r_squared\n";
    for (const auto& cell : result.cells) {
        const auto& spec = result.candidates[cell.candidate];
        out << cell.candidate << ',' << learner_kind_name(spec.kind) << ',' << spec_summary(spec)
            << ',' << cell.repeat << ',' << cell.fold << ',' << format_double(cell.metrics.rmse)
            << ',' << format_double(cell.metrics.mae) << ',' << format_double(cell.metrics.mape)
            << ',' << format_double(cell.metrics.r_squared) << '\n';
    }
    out << "\nsummary,candidate,kind,params,mean_rmse,stddev_rmse,winner\n";
    for (std::size_t c = 0; c < result.candidates.size(); ++c) {
        const auto& spec = result.candidates[c];
        out << "summary," << c << ',' << learner_kind_name(spec.kind) << ',' << spec_summary(spec)
            << ',' << format_double(result.mean_rmse[c]) << ','
            << format_double(result.stddev_rmse[c]) << ',' << (c == result.winner ? 1 : 0)
            << '\n';
    }
    if (!out) throw Error(ErrorKind::IoError, "failed writing " + path);
}

} // namespace stackcast
