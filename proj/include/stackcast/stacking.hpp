#pragma once

#include "stackcast/learner.hpp"
#include "stackcast/tuning.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stackcast {

struct StackConfig {
    std::vector<LearnerSpec> base_specs; // see default_stack_config()
    LearnerSpec meta_spec;
    int folds = 10;
    int repeats = 5;
    std::uint64_t rng_seed = 1;
};

/// Forest + elastic net bases under a linear SVR meta-learner with cost 1.
StackConfig default_stack_config();

struct StackedModel {
    std::vector<LearnerModel> base_models; // refit on the full training data
    std::vector<std::string> base_names;   // meta-feature column names
    LearnerModel meta;
    StackConfig config;
    std::vector<std::string> column_names; // training feature columns

    // Audit trail: which fold validated each row in each repeat, and the
    // per-base out-of-fold predictions (averaged over repeats) that trained
    // the meta-learner. Not part of the serialized document.
    std::vector<std::vector<int>> fold_of_row; // [repeat][row]
    std::vector<std::vector<double>> oof_meta_features; // [base][row]
};

/// Two-level stacking. Each repeat partitions the rows into k folds; every
/// base learner is trained k times on the out-fold rows and predicts the
/// held-out fold, giving strictly out-of-fold meta-features (averaged across
/// repeats). The meta-learner trains on those, and the bases are refit on
/// all rows for deployment.
StackedModel fit_stack(const FeatureMatrix& m, const StackConfig& cfg, int jobs = 1);

std::vector<double> predict(const StackedModel& model, const FeatureMatrix& m);

} // namespace stackcast
