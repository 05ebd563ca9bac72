#pragma once

#include "stackcast/feature_matrix.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stackcast {

struct ForestParams {
    int ntree = 500;
    int mtry = 0;              // features tried per split; 0 = floor(p/3), at least 1
    double bag_fraction = 0.5; // rows sampled per tree
    bool bootstrap = false;    // false: without replacement; true: classic bootstrap
    int min_node_size = 5;     // every leaf keeps at least this many rows
    std::uint64_t rng_seed = 1;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf mean
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
};

struct ForestModel {
    std::vector<Tree> trees;
    std::vector<double> importance; // mean per-tree sum of split variance reductions
    std::vector<std::string> column_names;
    ForestParams params;
    double oob_rmse = 0.0; // NaN when no row was ever out of bag
};

/// Grows ntree regression trees on independent row subsamples. Splits
/// minimize child squared error over mtry randomly drawn features, with
/// midpoint thresholds and deterministic tie-breaking (lowest feature index,
/// then lowest threshold). Each tree draws from an RNG stream derived from
/// (rng_seed, tree index), so a fixed seed gives a bit-identical model at
/// any jobs count.
ForestModel fit_forest(const FeatureMatrix& m, const ForestParams& p, int jobs = 1);

/// Mean of per-tree leaf values.
std::vector<double> predict(const ForestModel& model, const FeatureMatrix& m);

} // namespace stackcast
