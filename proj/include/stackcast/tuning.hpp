#pragma once

#include "stackcast/evaluation.hpp"
#include "stackcast/learner.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace stackcast {

struct CvSpec {
    int folds = 10;
    int repeats = 1;
    std::uint64_t rng_seed = 1;
    bool shuffle = true; // false keeps each fold a contiguous row block
};

/// The published resampling protocols: glmnet 10x6, forest 12x8, svr 10x1.
CvSpec cv_preset(LearnerKind kind);
/// Meta-learner protocol for stacking: 10 folds, 5 repeats.
CvSpec cv_preset_stack_meta();

struct FoldSplit {
    std::vector<std::size_t> train_rows;      // ascending
    std::vector<std::size_t> validation_rows; // ascending
    int repeat = 0;
    int fold = 0;
};

/// Random k-fold splits, one set per repeat. Within a repeat the validation
/// folds partition all rows with sizes differing by at most one.
std::vector<FoldSplit> kfold_splits(std::size_t n, const CvSpec& spec);

/// Forward-chaining splits for time-ordered rows: fold f validates one
/// contiguous block and trains on everything before it, so no training row
/// ever postdates a validation row.
std::vector<FoldSplit> forward_chain_splits(std::size_t n, int folds);

struct CvCell {
    std::size_t candidate = 0;
    int repeat = 0;
    int fold = 0;
    // Lenient per-cell metrics: single-row or otherwise degenerate
    // validation folds leave MAPE or R^2 as NaN instead of failing the run.
    MetricsReport metrics;
};

struct GridResult {
    std::vector<LearnerSpec> candidates;
    std::vector<double> mean_rmse;   // per candidate, across all cells
    std::vector<double> stddev_rmse; // sample stddev; 0 for a single cell
    std::size_t winner = 0;          // least mean RMSE, first-in-grid on ties
    std::vector<CvCell> cells;       // candidate-major, then split order
};

/// Trains and scores every candidate on every split (the same splits for
/// all candidates, so comparisons are paired). Cells run in parallel when
/// jobs > 1 with bit-identical results, each training single-threaded.
GridResult grid_search(const FeatureMatrix& m, const std::vector<LearnerSpec>& grid,
                       const std::vector<FoldSplit>& splits, int jobs = 1);

/// One line per cell plus a per-candidate summary block flagging the winner.
void save_cv_results_csv(const GridResult& result, const std::string& path);

/// Short human-readable hyperparameter summary, e.g. "alpha=0.5 lambda=0.1".
std::string spec_summary(const LearnerSpec& spec);

} // namespace stackcast
