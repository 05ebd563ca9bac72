#pragma once

#include "stackcast/feature_matrix.hpp"
#include "stackcast/forest.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stackcast {

struct BorutaConfig {
    int max_runs = 99;
    double p_value = 0.01;
    ForestParams forest_params;
    bool permutation_importance = false; // slower; mean-impurity-decrease otherwise
    std::uint64_t rng_seed = 1;
};

enum class BorutaDecision { Confirmed, Tentative, Rejected };

const char* to_string(BorutaDecision decision);

struct FeatureVerdict {
    std::string feature_name;
    BorutaDecision decision = BorutaDecision::Tentative;
    double mean_importance = 0.0; // over the runs the feature was still in play
    int hit_count = 0;
    int runs = 0; // runs the feature participated in
};

struct BorutaResult {
    std::vector<FeatureVerdict> verdicts; // original column order
    int runs = 0;                         // runs actually executed

    // Per-run audit trail for the box plot: importance samples for each
    // feature while it was in play, and the shadow envelope per run.
    std::vector<std::vector<double>> importance_samples; // [feature][run]
    std::vector<double> shadow_min;
    std::vector<double> shadow_mean;
    std::vector<double> shadow_max;
};

/// All-relevant feature selection against random probes. Every run
/// row-permutes a fresh shadow copy of each surviving feature, fits a
/// forest on real + shadow columns, and scores a hit for features beating
/// the best shadow importance. Hits feed opposing one-sided binomial tests
/// (success probability one half) at cfg.p_value, Bonferroni-corrected
/// across the features still undecided; passing the upper tail confirms,
/// passing the lower tail rejects and drops the feature from later runs.
/// Whatever is still undecided after max_runs is Tentative.
BorutaResult run_boruta(const FeatureMatrix& m, const BorutaConfig& cfg, int jobs = 1);

/// Verdicts ranked by mean importance, highest first.
std::vector<FeatureVerdict> importance_report(const std::vector<FeatureVerdict>& verdicts);

/// Features to keep for training: Confirmed plus, unless dropped, Tentative.
std::vector<std::string> selected_features(const std::vector<FeatureVerdict>& verdicts,
                                           bool drop_tentative = false);

void save_boruta_report_csv(const std::vector<FeatureVerdict>& verdicts, const std::string& path);

/// Long-format samples, one `name,run,importance` row per surviving feature
/// per run, plus shadowMin/shadowMean/shadowMax rows describing each run's
/// probe envelope.
void save_boruta_boxplot_csv(const BorutaResult& result, const std::string& path);

} // namespace stackcast
